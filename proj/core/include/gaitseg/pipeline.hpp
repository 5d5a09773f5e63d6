#ifndef GAITSEG_PIPELINE_HPP
#define GAITSEG_PIPELINE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gaitseg/detector.hpp"
#include "gaitseg/features.hpp"
#include "gaitseg/segmenter.hpp"
#include "gaitseg/synth.hpp"
#include "gaitseg/trend.hpp"

namespace gaitseg {

enum class SamplerKind { Direct, Blocked };
enum class DetectMethod { Nb, Stddev, Stft, Nasc };

struct SimulateConfig {
  std::string preset = "default3";  // or "default4", or "" with spec_file
  std::string spec_file;
  double duration_s = 200.0;
};

struct PreprocessConfig {
  double lambda = -1.0;  // <0: default 50*T/30
  double gap_split_s = 2.0;
};

struct FitConfig {
  int order = 90;
  int iters = 300;
  int burn_in = -1;  // <0: iters/2
  SamplerKind sampler = SamplerKind::Direct;
  int truncation = 20;
  double kappa = 50.0;
  double alpha = 1.0;
  double gamma = 1.0;
  PriorKind prior = PriorKind::Conjugate;
  double coeff_var = 0.25;
  double nu = 2.0;
  double theta = 1.0;
};

struct FeaturesConfig {
  double window_s = 60.0;
  double lag_lo = 10.0;
  double lag_hi = -1.0;  // <0: order
};

struct DetectConfig {
  DetectMethod method = DetectMethod::Nb;
  double window_s = 3.0;
  double stddev_threshold = -1.0;  // <0: tune in-sample
  double stft_f_lo = 0.5;
  double stft_f_hi = 3.0;
  double stft_ratio = -1.0;
  double nasc_threshold = -1.0;
  double nasc_lag_lo_s = 0.33;
  double nasc_lag_hi_s = 3.0;
};

struct PipelineConfig {
  std::uint64_t seed = 1;
  double rate = 30.0;
  std::string out_dir;
  std::string input_csv;   // empty: simulate stage provides data
  std::string labels_csv;  // empty: simulate stage provides labels
  std::vector<std::string> stages;  // subset of simulate..report, in order
  SimulateConfig simulate;
  PreprocessConfig preprocess;
  FitConfig fit;
  FeaturesConfig features;
  DetectConfig detect;

  static PipelineConfig from_json_file(const std::string& path);
  static PipelineConfig from_json_text(const std::string& text);
  std::string canonical_json() const;
  std::string hash() const;
};

struct PipelineResult {
  int exit_code = 0;
  std::string failed_stage;
  std::vector<std::string> artifacts;
};

/// Runs the configured stages in order, writing artifacts under
/// config.out_dir. Every artifact carries a `# config_hash=` header line.
PipelineResult run_pipeline(const PipelineConfig& config);

/// Summarize an artifact directory; returns the human-readable summary and
/// writes report CSVs (benchmark table, feature timeline copy) next to it.
std::string report(const std::string& artifact_dir);

/// Thread cap from GAITSEG_THREADS (>=1), default hardware_concurrency.
int thread_cap();

struct BenchmarkRow {
  std::string method;
  double tuned_param = 0.0;
  ConfusionMetrics metrics;
};

/// Runs all four detectors with in-sample tuning (NB uses the provided state
/// posterior) on one labeled series; recordings are evaluated corpus-wide.
std::vector<BenchmarkRow> run_benchmark(const AmplitudeSeries& amp,
                                        const std::vector<int>& truth,
                                        const StatePosterior& posterior,
                                        const DetectConfig& cfg);

}  // namespace gaitseg

#endif
