#ifndef GAITSEG_FEATURES_HPP
#define GAITSEG_FEATURES_HPP

#include <vector>

#include "gaitseg/segmenter.hpp"
#include "gaitseg/types.hpp"

namespace gaitseg {

/// Gaussian-bump fit f(j) = a*exp(-((j-b)/c)^2) + d to a state's AR
/// coefficients, plus the gait metrics derived from it.
struct GaitFeatures {
  double a = 0.0;  // peak height
  double b = 0.0;  // peak location, lag units
  double c = 1.0;  // width, lag units
  double d = 0.0;  // offset
  double cycle_time_s = 0.0;  // b / rate
  double variability = 0.0;   // == c
  double support = 0.0;       // a + d
  double fit_rss = 0.0;
  bool degenerate = false;
};

struct LagRange {
  double lo = 10.0;
  double hi = 90.0;
};

struct GaussFitOptions {
  double grid_step = 2.0;   // multi-start spacing over b
  int max_iters = 200;
  double step_tol = 1e-10;
};

/// Multi-start (grid over b) damped Gauss-Newton least squares fit of the
/// Gaussian bump to coefficients A_1..A_r; b constrained to lag_range, c > 0.
GaitFeatures fit_gaussian_poly(const std::vector<double>& coeffs,
                               const LagRange& lag_range,
                               const GaussFitOptions& opts = {});

/// cycle_time_s = b/rate, variability = c, support = a + d.
void derive_metrics(GaitFeatures& fit, double rate);

/// One feature set per active state in the snapshot. Per-state fit failures
/// mark that entry degenerate without aborting the others.
std::vector<GaitFeatures> per_state_features(const ModelSnapshot& snapshot,
                                             const LagRange& lag_range,
                                             double rate);

struct TimelineRow {
  double window_start_s = 0.0;
  double c = 0.0;
  double support = 0.0;
  double b = 0.0;
  bool empty = false;
};

/// Posterior-weighted per-window average of per-state features. Uses the
/// final retained snapshot's states (the alignment target of the posterior).
std::vector<TimelineRow> feature_timeline(const std::vector<ModelSnapshot>& snapshots,
                                          const StatePosterior& posterior,
                                          double window_s, double rate,
                                          const LagRange& lag_range);

}  // namespace gaitseg

#endif
