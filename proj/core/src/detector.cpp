#include "gaitseg/detector.hpp"

#include <algorithm>
#include <cmath>

#include "gaitseg/spectral.hpp"

namespace gaitseg {

NbModel train_nb(const StatePosterior& posterior,
                 const std::vector<int>& labels) {
  const std::size_t T = posterior.probs.size();
  if (T != labels.size())
    throw Error(ErrorCode::LengthMismatch, "posterior/label length mismatch");
  const std::size_t K = posterior.num_states();
  bool has0 = false, has1 = false;
  for (int y : labels) (y ? has1 : has0) = true;
  if (!has0 || !has1)
    throw Error(ErrorCode::SingleClassCorpus, "both classes required");

  // Laplace-smoothed expected state counts per class
  std::vector<double> c1(K, 1.0), c0(K, 1.0);
  long n1 = 0, n0 = 0;
  for (std::size_t t = 0; t < T; ++t) {
    auto& c = labels[t] ? c1 : c0;
    (labels[t] ? n1 : n0)++;
    for (std::size_t k = 0; k < K; ++k) c[k] += posterior.probs[t][k];
  }
  NbModel m;
  m.log_theta_gait.resize(K);
  m.log_theta_nongait.resize(K);
  double s1 = 0.0, s0 = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    s1 += c1[k];
    s0 += c0[k];
  }
  for (std::size_t k = 0; k < K; ++k) {
    m.log_theta_gait[k] = std::log(c1[k] / s1);
    m.log_theta_nongait[k] = std::log(c0[k] / s0);
  }
  const double n = static_cast<double>(n0 + n1);
  m.log_prior_gait = std::log(static_cast<double>(n1) / n);
  m.log_prior_nongait = std::log(static_cast<double>(n0) / n);
  return m;
}

std::vector<int> predict_nb(const NbModel& model,
                            const StatePosterior& posterior) {
  const std::size_t K = model.num_states();
  if (posterior.num_states() != K)
    throw Error(ErrorCode::DimensionMismatch,
                "posterior state dimension does not match training");
  std::vector<int> out(posterior.probs.size());
  for (std::size_t t = 0; t < posterior.probs.size(); ++t) {
    double lg = model.log_prior_gait, ln = model.log_prior_nongait;
    for (std::size_t k = 0; k < K; ++k) {
      lg += posterior.probs[t][k] * model.log_theta_gait[k];
      ln += posterior.probs[t][k] * model.log_theta_nongait[k];
    }
    out[t] = lg > ln ? 1 : 0;  // ties toward non-gait
  }
  return out;
}

namespace {

// nearest covering-window index for hop = win/2
std::vector<std::size_t> window_starts(std::size_t T, std::size_t win,
                                       std::size_t hop) {
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + win <= T; s += hop) starts.push_back(s);
  if (starts.empty()) starts.push_back(0);
  return starts;
}

std::vector<int> labels_from_windows(std::size_t T,
                                     const std::vector<std::size_t>& starts,
                                     std::size_t win,
                                     const std::vector<int>& window_label) {
  std::vector<int> out(T, 0);
  for (std::size_t t = 0; t < T; ++t) {
    // window whose center is nearest to t
    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t w = 0; w < starts.size(); ++w) {
      const double center =
          static_cast<double>(starts[w]) + 0.5 * static_cast<double>(win - 1);
      const double dist = std::abs(static_cast<double>(t) - center);
      if (dist < best_d) {
        best_d = dist;
        best = w;
      }
    }
    out[t] = window_label[best];
  }
  return out;
}

}  // namespace

std::vector<int> detect_stddev(const AmplitudeSeries& x, double window_s,
                               double threshold) {
  x.validate();
  const long T = static_cast<long>(x.size());
  const long win = static_cast<long>(std::lround(window_s * x.rate));
  if (win < 2) throw Error(ErrorCode::WindowTooShort, "window too short");
  const long half = win / 2;
  std::vector<int> out(static_cast<std::size_t>(T));
  // prefix sums for O(1) window moments
  std::vector<double> ps(T + 1, 0.0), ps2(T + 1, 0.0);
  for (long t = 0; t < T; ++t) {
    ps[t + 1] = ps[t] + x.values[t];
    ps2[t + 1] = ps2[t] + x.values[t] * x.values[t];
  }
  for (long t = 0; t < T; ++t) {
    const long lo = std::max<long>(0, t - half);
    const long hi = std::min(T, t + half + 1);
    const double n = static_cast<double>(hi - lo);
    const double mean = (ps[hi] - ps[lo]) / n;
    const double var = std::max(0.0, (ps2[hi] - ps2[lo]) / n - mean * mean);
    out[t] = std::sqrt(var) > threshold ? 1 : 0;
  }
  return out;
}

std::vector<int> detect_stft(const AmplitudeSeries& x, double window_s,
                             double f_lo, double f_hi,
                             double ratio_threshold) {
  x.validate();
  if (!(f_lo > 0.0) || !(f_hi > f_lo) || f_hi >= 0.5 * x.rate)
    throw Error(ErrorCode::BandOutOfRange, "band must lie within (0, rate/2)");
  const std::size_t T = x.size();
  const std::size_t win =
      std::max<std::size_t>(4, static_cast<std::size_t>(std::lround(window_s * x.rate)));
  if (win > T) throw Error(ErrorCode::WindowTooShort, "series shorter than window");
  const std::size_t hop = std::max<std::size_t>(1, win / 2);

  auto starts = window_starts(T, win, hop);
  std::vector<int> wl(starts.size(), 0);
  std::vector<double> centered(win);
  for (std::size_t w = 0; w < starts.size(); ++w) {
    // subtract the window mean: rectified amplitudes carry a large DC
    // component whose leakage through the analysis window would otherwise
    // swamp the nearby bins
    const double* v = x.values.data() + starts[w];
    double mean = 0.0;
    for (std::size_t i = 0; i < win; ++i) mean += v[i];
    mean /= static_cast<double>(win);
    for (std::size_t i = 0; i < win; ++i) centered[i] = v[i] - mean;
    auto p = power_spectrum(std::span<const double>(centered), true);
    double total = 0.0, in_band = 0.0;
    for (std::size_t k = 1; k <= win / 2; ++k) {  // DC excluded
      const double f = static_cast<double>(k) * x.rate / static_cast<double>(win);
      total += p[k];
      if (f >= f_lo && f <= f_hi) in_band += p[k];
    }
    wl[w] = (total > 0.0 && in_band / total > ratio_threshold) ? 1 : 0;
  }
  return labels_from_windows(T, starts, win, wl);
}

std::vector<int> detect_nasc(const AmplitudeSeries& x, double window_s,
                             int l_min, int l_max, double threshold) {
  x.validate();
  const std::size_t T = x.size();
  const std::size_t win =
      std::max<std::size_t>(4, static_cast<std::size_t>(std::lround(window_s * x.rate)));
  if (win > T) throw Error(ErrorCode::WindowTooShort, "series shorter than window");
  if (l_min < 1 || l_max < l_min || static_cast<std::size_t>(l_max) >= win)
    throw Error(ErrorCode::LagRangeInvalid, "lag range invalid for window");
  const std::size_t hop = std::max<std::size_t>(1, win / 2);

  auto starts = window_starts(T, win, hop);
  std::vector<int> wl(starts.size(), 0);
  for (std::size_t w = 0; w < starts.size(); ++w) {
    const double* v = x.values.data() + starts[w];
    double mean = 0.0;
    for (std::size_t i = 0; i < win; ++i) mean += v[i];
    mean /= static_cast<double>(win);
    double var = 0.0;
    for (std::size_t i = 0; i < win; ++i)
      var += (v[i] - mean) * (v[i] - mean);
    var /= static_cast<double>(win);
    double best = 0.0;  // constant windows score 0 by convention
    // guard against rounding residue: a numerically constant window can have
    // a tiny positive variance whose correlated rounding errors would score
    // near 1
    const double tiny = 1e-18 * (mean * mean + 1.0);
    if (var > tiny) {
      for (int l = l_min; l <= l_max; ++l) {
        double acc = 0.0;
        const std::size_t n = win - static_cast<std::size_t>(l);
        for (std::size_t i = 0; i < n; ++i)
          acc += (v[i] - mean) * (v[i + static_cast<std::size_t>(l)] - mean);
        best = std::max(best, acc / (static_cast<double>(n) * var));
      }
    }
    wl[w] = best > threshold ? 1 : 0;
  }
  return labels_from_windows(T, starts, win, wl);
}

ConfusionMetrics score(const std::vector<int>& pred,
                       const std::vector<int>& truth) {
  if (pred.size() != truth.size())
    throw Error(ErrorCode::LengthMismatch, "pred/truth length mismatch");
  ConfusionMetrics m;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (truth[i]) (pred[i] ? m.tp : m.fn)++;
    else (pred[i] ? m.fp : m.tn)++;
  }
  m.sensitivity = m.tp + m.fn > 0
                      ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn)
                      : 0.0;
  m.specificity = m.tn + m.fp > 0
                      ? static_cast<double>(m.tn) / static_cast<double>(m.tn + m.fp)
                      : 0.0;
  m.balanced_accuracy = 0.5 * (m.sensitivity + m.specificity);
  return m;
}

double tune_threshold(const ParamDetector& detector,
                      const std::vector<int>& truth,
                      const std::vector<double>& grid) {
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "empty parameter grid");
  double best_param = grid.front();
  double best_ba = -1.0;
  for (double g : grid) {
    const double ba = score(detector(g), truth).balanced_accuracy;
    if (ba > best_ba || (ba == best_ba && g < best_param)) {
      best_ba = ba;
      best_param = g;
    }
  }
  return best_param;
}

}  // namespace gaitseg
