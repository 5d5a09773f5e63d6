#include "gaitseg/trend.hpp"

#include <Eigen/Sparse>
#include <cmath>

namespace gaitseg {

namespace {

// y = D2 * v, second differences (length n-2)
Eigen::VectorXd second_diff(const Eigen::VectorXd& v) {
  const long n = v.size();
  Eigen::VectorXd d(n - 2);
  for (long i = 0; i < n - 2; ++i) d[i] = v[i] - 2.0 * v[i + 1] + v[i + 2];
  return d;
}

// y = D2^T * z (length n)
Eigen::VectorXd second_diff_t(const Eigen::VectorXd& z, long n) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  for (long i = 0; i < z.size(); ++i) {
    y[i] += z[i];
    y[i + 1] -= 2.0 * z[i];
    y[i + 2] += z[i];
  }
  return y;
}

double soft(double x, double k) {
  if (x > k) return x - k;
  if (x < -k) return x + k;
  return 0.0;
}

}  // namespace

double trend_objective(const std::vector<double>& channel,
                       const std::vector<double>& trend, double lambda) {
  double fit = 0.0;
  for (std::size_t i = 0; i < channel.size(); ++i) {
    const double r = channel[i] - trend[i];
    fit += 0.5 * r * r;
  }
  double pen = 0.0;
  for (std::size_t i = 0; i + 2 < trend.size(); ++i)
    pen += std::abs(trend[i] - 2.0 * trend[i + 1] + trend[i + 2]);
  return fit + lambda * pen;
}

double default_trend_lambda(std::size_t n, double rate) {
  return 50.0 * static_cast<double>(n) / std::max(rate, 1e-9);
}

TrendFit l1_trend_filter_traced(const std::vector<double>& channel,
                                double lambda, std::vector<double>& trace,
                                const TrendOptions& opts) {
  const long n = static_cast<long>(channel.size());
  if (n < 3) throw Error(ErrorCode::TooShort, "trend filter needs length >= 3");
  if (lambda < 0) throw Error(ErrorCode::ConfigInvalid, "lambda must be >= 0");

  TrendFit fit;
  fit.lambda = lambda;
  if (lambda == 0.0) {
    fit.trend = channel;
    fit.objective_value = 0.0;
    trace.assign(1, 0.0);
    return fit;
  }

  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(channel.data(), n);
  const double rho = lambda;

  // factor (I + rho * D2^T D2) once
  Eigen::SparseMatrix<double> D(n - 2, n);
  {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * (n - 2));
    for (long i = 0; i < n - 2; ++i) {
      trip.emplace_back(i, i, 1.0);
      trip.emplace_back(i, i + 1, -2.0);
      trip.emplace_back(i, i + 2, 1.0);
    }
    D.setFromTriplets(trip.begin(), trip.end());
  }
  Eigen::SparseMatrix<double> M(n, n);
  {
    Eigen::SparseMatrix<double> I(n, n);
    I.setIdentity();
    M = I + rho * Eigen::SparseMatrix<double>(D.transpose() * D);
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(M);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::StageFailed, "trend filter factorization failed");

  Eigen::VectorXd v = x;
  Eigen::VectorXd z = second_diff(v);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n - 2);

  std::vector<double> best(channel);
  fit.trend = channel;
  double best_obj = trend_objective(channel, channel, lambda);
  {
    std::vector<double> v0(v.data(), v.data() + n);
    double obj0 = trend_objective(channel, v0, lambda);
    if (obj0 < best_obj) {
      best_obj = obj0;
      best = v0;
    }
  }
  trace.clear();
  trace.push_back(best_obj);

  const double kappa = lambda / rho;
  bool converged = false;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    v = solver.solve(x + rho * second_diff_t(z - u, n));
    Eigen::VectorXd Dv = second_diff(v);
    Eigen::VectorXd z_old = z;
    for (long i = 0; i < z.size(); ++i) z[i] = soft(Dv[i] + u[i], kappa);
    u += Dv - z;

    std::vector<double> vcur(v.data(), v.data() + n);
    const double obj = trend_objective(channel, vcur, lambda);
    if (obj < best_obj) {
      best_obj = obj;
      best = std::move(vcur);
    }
    trace.push_back(best_obj);

    const double pri = (Dv - z).norm();
    const double dua = rho * second_diff_t(z - z_old, n).norm();
    const double pscale = std::max({Dv.norm(), z.norm(), 1e-12});
    const double dscale = std::max(rho * second_diff_t(u, n).norm(), 1e-12);
    if (pri <= opts.tol * pscale && dua <= opts.tol * dscale) {
      converged = true;
      ++it;
      break;
    }
  }

  fit.trend = std::move(best);
  fit.objective_value = best_obj;
  fit.converged = converged;
  fit.iterations = it;
  return fit;
}

TrendFit l1_trend_filter(const std::vector<double>& channel, double lambda,
                         const TrendOptions& opts) {
  std::vector<double> trace;
  return l1_trend_filter_traced(channel, lambda, trace, opts);
}

DynamicAmplitudeResult dynamic_amplitude(const UniformSeries& s, double lambda,
                                         const TrendOptions& opts) {
  s.validate();
  DynamicAmplitudeResult out;
  const std::size_t n = s.size();
  std::array<std::vector<double>, 3> resid;
  for (int c = 0; c < 3; ++c) {
    out.trends[c] = l1_trend_filter(s.channels[c], lambda, opts);
    resid[c].resize(n);
    for (std::size_t i = 0; i < n; ++i)
      resid[c][i] = s.channels[c][i] - out.trends[c].trend[i];
  }
  out.amplitude.rate = s.rate;
  out.amplitude.values.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.amplitude.values[i] = std::sqrt(resid[0][i] * resid[0][i] +
                                        resid[1][i] * resid[1][i] +
                                        resid[2][i] * resid[2][i]);
  out.amplitude.boundaries = {0};
  return out;
}

}  // namespace gaitseg
