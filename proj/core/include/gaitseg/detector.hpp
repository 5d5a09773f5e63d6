#ifndef GAITSEG_DETECTOR_HPP
#define GAITSEG_DETECTOR_HPP

#include <functional>
#include <vector>

#include "gaitseg/segmenter.hpp"
#include "gaitseg/types.hpp"

namespace gaitseg {

struct ConfusionMetrics {
  double sensitivity = 0.0;
  double specificity = 0.0;
  double balanced_accuracy = 0.0;
  long tp = 0, fp = 0, tn = 0, fn = 0;
};

/// Multinomial Naive Bayes over state posteriors: Laplace-smoothed expected
/// state counts per class, class priors from label frequencies.
struct NbModel {
  std::vector<double> log_theta_gait;
  std::vector<double> log_theta_nongait;
  double log_prior_gait = 0.0;
  double log_prior_nongait = 0.0;
  std::size_t num_states() const { return log_theta_gait.size(); }
};

NbModel train_nb(const StatePosterior& posterior,
                 const std::vector<int>& labels);

/// Per-point argmax of class log-posterior; ties go to non-gait (0).
std::vector<int> predict_nb(const NbModel& model,
                            const StatePosterior& posterior);

/// Gait iff centered moving-window standard deviation > threshold.
std::vector<int> detect_stddev(const AmplitudeSeries& x, double window_s,
                               double threshold);

/// Gait iff the fraction of windowed spectral power (Hann, hop = window/2,
/// DC excluded) inside [f_lo, f_hi] exceeds ratio_threshold. Each point is
/// labeled by the window whose center is nearest.
std::vector<int> detect_stft(const AmplitudeSeries& x, double window_s,
                             double f_lo, double f_hi,
                             double ratio_threshold);

/// Gait iff the maximum mean-removed, variance-normalized autocorrelation
/// over lag in [l_min, l_max] samples exceeds threshold. Constant windows
/// score 0.
std::vector<int> detect_nasc(const AmplitudeSeries& x, double window_s,
                             int l_min, int l_max, double threshold);

ConfusionMetrics score(const std::vector<int>& pred,
                       const std::vector<int>& truth);

/// Detector parametrized by a single scalar, returning per-point predictions
/// for the whole corpus (concatenated).
using ParamDetector = std::function<std::vector<int>(double)>;

/// Grid value maximizing in-sample balanced accuracy; ties toward the
/// smaller parameter.
double tune_threshold(const ParamDetector& detector,
                      const std::vector<int>& truth,
                      const std::vector<double>& grid);

}  // namespace gaitseg

#endif
