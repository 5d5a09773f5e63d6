#ifndef GAITSEG_TREND_HPP
#define GAITSEG_TREND_HPP

#include <vector>

#include "gaitseg/types.hpp"

namespace gaitseg {

/// Piecewise-linear trend estimate for one channel.
struct TrendFit {
  std::vector<double> trend;
  double lambda = 0.0;
  double objective_value = 0.0;
  bool converged = true;
  int iterations = 0;
};

struct TrendOptions {
  int max_iters = 10000;
  double tol = 1e-6;  // relative primal/dual residual
  /// When true, the per-iteration best objective trace is recorded in
  /// TrendFit-adjacent diagnostics (see l1_trend_filter_traced).
};

/// argmin_v 0.5*sum (x_t - v_t)^2 + lambda * sum |v_{t-1} - 2 v_t + v_{t+1}|,
/// solved by ADMM on the second-difference split. Returns the best iterate
/// found (objective trace is non-increasing).
TrendFit l1_trend_filter(const std::vector<double>& channel, double lambda,
                         const TrendOptions& opts = {});

/// Same solve, also reporting the (non-increasing) objective value after
/// each accepted improvement. trace[i] is the best objective seen through
/// iteration i.
TrendFit l1_trend_filter_traced(const std::vector<double>& channel,
                                double lambda, std::vector<double>& trace,
                                const TrendOptions& opts = {});

/// 0.5*||x - v||^2 + lambda*||D2 v||_1 for a candidate trend v.
double trend_objective(const std::vector<double>& channel,
                       const std::vector<double>& trend, double lambda);

/// Default regularization weight: 50*T/30 at the working rate.
double default_trend_lambda(std::size_t n, double rate);

struct DynamicAmplitudeResult {
  AmplitudeSeries amplitude;
  std::array<TrendFit, 3> trends;
};

/// Remove the per-axis L1 trend and return the Euclidean norm of the 3-axis
/// residual at each point.
DynamicAmplitudeResult dynamic_amplitude(const UniformSeries& s, double lambda,
                                         const TrendOptions& opts = {});

}  // namespace gaitseg

#endif
