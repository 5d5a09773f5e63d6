#ifndef GAITSEG_SYNTH_HPP
#define GAITSEG_SYNTH_HPP

#include <cstdint>
#include <vector>

#include "gaitseg/ar.hpp"
#include "gaitseg/types.hpp"

namespace gaitseg {

struct SynthRegime {
  ArState state;
  bool is_gait = false;
  double mean_dwell_s = 15.0;
  std::string name;
};

struct GravityKnot {
  double t = 0.0;
  Vec3 g{0.0, 0.0, 9.81};
};

struct SynthSpec {
  std::vector<SynthRegime> regimes;
  std::vector<GravityKnot> gravity;
  double rate = 30.0;
  double duration_s = 200.0;
  std::uint64_t seed = 1;
  double timestamp_jitter = 0.2;  // fraction of 1/rate

  void validate() const;
};

struct SynthOutput {
  RawRecording recording;
  std::vector<int> regime_labels;  // per internal grid point
  std::vector<int> gait_labels;    // 0/1
  std::vector<double> grid_times;  // internal uniform grid
  std::vector<double> dynamic;     // pre-rectification AR component
  AmplitudeSeries amplitude;       // |dynamic| at spec.rate (ground truth)
};

/// Semi-Markov regime switching (exponential dwell), AR dynamics with a lag
/// buffer carried across switches, dynamic component projected on a slowly
/// rotating axis plus piecewise-linear gravity; timestamps jittered around
/// 1/rate.
SynthOutput generate(const SynthSpec& spec);

/// AR(4) with a doubled complex pole pair at angle 2*pi*freq/rate and
/// modulus exp(-pi*bandwidth/rate), noise variance calibrated by simulation
/// so the process variance matches `variance` within 5%.
ArState make_ar_with_peak(double freq_hz, double rate, double bandwidth_hz,
                          double variance);

/// AR state whose coefficient profile is itself a Gaussian bump at the cycle
/// lag (peak_lag, width in lags, total coefficient mass < 1). Mirrors the
/// structure the gait-cycle features are extracted from.
ArState make_cycle_bump_state(int order, double peak_lag, double width,
                              double mass, double noise_var);

/// The 3-regime acceptance preset: gait-A (0.75 Hz peak, high variance),
/// gait-B (0.9 Hz peak, higher variance), idle white noise (low variance).
SynthSpec default3_spec(std::uint64_t seed = 1, double duration_s = 200.0);

/// default3 plus a non-gait "fidget" regime (slow drift, moderate variance),
/// used by the detection benchmark corpus.
SynthSpec default4_spec(std::uint64_t seed = 1, double duration_s = 60.0);

}  // namespace gaitseg

#endif
