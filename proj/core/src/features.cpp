#include "gaitseg/features.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace gaitseg {

namespace {

struct Params {
  double a, b, c, d;
};

double rss_for(const std::vector<double>& coeffs, const Params& p) {
  double rss = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const double j = static_cast<double>(i + 1);
    const double g = std::exp(-((j - p.b) / p.c) * ((j - p.b) / p.c));
    const double res = coeffs[i] - (p.a * g + p.d);
    rss += res * res;
  }
  return rss;
}

// optimal (a, d) for fixed (b, c) by linear least squares
void solve_linear(const std::vector<double>& coeffs, Params& p) {
  double sg = 0, sgg = 0, sy = 0, sgy = 0;
  const double n = static_cast<double>(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const double j = static_cast<double>(i + 1);
    const double g = std::exp(-((j - p.b) / p.c) * ((j - p.b) / p.c));
    sg += g;
    sgg += g * g;
    sy += coeffs[i];
    sgy += g * coeffs[i];
  }
  const double det = n * sgg - sg * sg;
  if (std::abs(det) < 1e-14) {
    p.a = 0.0;
    p.d = sy / n;
    return;
  }
  p.a = (n * sgy - sg * sy) / det;
  p.d = (sy * sgg - sg * sgy) / det;
}

// damped Gauss-Newton refinement; b clamped to [lo, hi], c kept positive
Params refine(const std::vector<double>& coeffs, Params p, double lo,
              double hi, const GaussFitOptions& opts) {
  const long n = static_cast<long>(coeffs.size());
  double mu = 1e-4;
  double rss = rss_for(coeffs, p);
  for (int it = 0; it < opts.max_iters; ++it) {
    Eigen::MatrixXd J(n, 4);
    Eigen::VectorXd res(n);
    for (long i = 0; i < n; ++i) {
      const double j = static_cast<double>(i + 1);
      const double u = (j - p.b) / p.c;
      const double g = std::exp(-u * u);
      res[i] = coeffs[static_cast<std::size_t>(i)] - (p.a * g + p.d);
      J(i, 0) = g;
      J(i, 1) = p.a * g * 2.0 * u / p.c;
      J(i, 2) = p.a * g * 2.0 * u * u / p.c;
      J(i, 3) = 1.0;
    }
    Eigen::Matrix4d H = J.transpose() * J;
    Eigen::Vector4d grad = J.transpose() * res;
    bool stepped = false;
    for (int tries = 0; tries < 12; ++tries) {
      Eigen::Matrix4d Hd = H;
      Hd.diagonal() += Eigen::Vector4d::Constant(mu);
      Eigen::Vector4d step = Hd.ldlt().solve(grad);
      Params q{p.a + step[0], p.b + step[1], p.c + step[2], p.d + step[3]};
      q.b = std::clamp(q.b, lo, hi);
      q.c = std::max(q.c, 1e-3);
      const double rq = rss_for(coeffs, q);
      if (rq < rss) {
        if (step.norm() < opts.step_tol) {
          p = q;
          return p;
        }
        p = q;
        rss = rq;
        mu = std::max(mu * 0.3, 1e-12);
        stepped = true;
        break;
      }
      mu *= 10.0;
    }
    if (!stepped) break;
  }
  return p;
}

}  // namespace

GaitFeatures fit_gaussian_poly(const std::vector<double>& coeffs,
                               const LagRange& lag_range,
                               const GaussFitOptions& opts) {
  const std::size_t r = coeffs.size();
  if (r < 8)
    throw Error(ErrorCode::TooShort, "need at least 8 coefficients");
  const double lo = lag_range.lo, hi = std::min(lag_range.hi, static_cast<double>(r));
  if (!(lo >= 1.0) || !(lo < hi))
    throw Error(ErrorCode::LagRangeInvalid, "require 1 <= lo < hi <= r");

  GaitFeatures out;
  double mn = coeffs[0], mx = coeffs[0];
  for (double v : coeffs) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  if (mx - mn <= 1e-12) {
    out.a = 0.0;
    out.d = coeffs[0];
    out.b = 0.5 * (lo + hi);
    out.c = 0.5 * (hi - lo);
    out.fit_rss = 0.0;
    out.degenerate = true;
    return out;
  }

  Params best{0.0, 0.5 * (lo + hi), 0.25 * (hi - lo), 0.0};
  solve_linear(coeffs, best);
  double best_rss = rss_for(coeffs, best);

  const double widths[] = {0.1 * (hi - lo), 0.25 * (hi - lo), 0.5 * (hi - lo)};
  for (double b0 = lo; b0 <= hi + 1e-9; b0 += opts.grid_step) {
    for (double c0 : widths) {
      Params p{0.0, std::min(b0, hi), std::max(c0, 1e-3), 0.0};
      solve_linear(coeffs, p);
      p = refine(coeffs, p, lo, hi, opts);
      const double rss = rss_for(coeffs, p);
      if (rss < best_rss) {
        best_rss = rss;
        best = p;
      }
    }
  }

  out.a = best.a;
  out.b = best.b;
  out.c = best.c;
  out.d = best.d;
  out.fit_rss = best_rss;
  return out;
}

void derive_metrics(GaitFeatures& fit, double rate) {
  fit.cycle_time_s = fit.b / rate;
  fit.variability = fit.c;
  fit.support = fit.a + fit.d;
}

std::vector<GaitFeatures> per_state_features(const ModelSnapshot& snapshot,
                                             const LagRange& lag_range,
                                             double rate) {
  std::vector<GaitFeatures> out;
  out.reserve(snapshot.states.size());
  for (const auto& state : snapshot.states) {
    GaitFeatures f;
    try {
      f = fit_gaussian_poly(state.coeffs, lag_range);
    } catch (const Error&) {
      f.degenerate = true;
    }
    derive_metrics(f, rate);
    out.push_back(f);
  }
  return out;
}

std::vector<TimelineRow> feature_timeline(
    const std::vector<ModelSnapshot>& snapshots, const StatePosterior& posterior,
    double window_s, double rate, const LagRange& lag_range) {
  if (snapshots.empty())
    throw Error(ErrorCode::MissingArtifacts, "no snapshots");
  const auto& final_snap = snapshots.back();
  const std::size_t T = posterior.probs.size();
  if (T != final_snap.sequence.labels.size())
    throw Error(ErrorCode::LengthMismatch, "posterior/snapshot length mismatch");

  std::vector<GaitFeatures> feats =
      per_state_features(final_snap, lag_range, rate);
  const std::size_t K = feats.size();

  const std::size_t win =
      std::max<std::size_t>(1, static_cast<std::size_t>(window_s * rate));
  std::vector<TimelineRow> rows;
  for (std::size_t w0 = 0; w0 < T; w0 += win) {
    const std::size_t w1 = std::min(T, w0 + win);
    std::vector<double> weight(K, 0.0);
    double total = 0.0;
    for (std::size_t t = w0; t < w1; ++t) {
      // columns beyond K belong to states absent from the final snapshot
      for (std::size_t k = 0; k < K && k < posterior.probs[t].size(); ++k) {
        weight[k] += posterior.probs[t][k];
        total += posterior.probs[t][k];
      }
    }
    TimelineRow row;
    row.window_start_s = static_cast<double>(w0) / rate;
    if (total <= 0.0) {
      row.empty = true;
    } else {
      for (std::size_t k = 0; k < K; ++k) {
        const double wgt = weight[k] / total;
        row.c += wgt * feats[k].c;
        row.support += wgt * feats[k].support;
        row.b += wgt * feats[k].b;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gaitseg
