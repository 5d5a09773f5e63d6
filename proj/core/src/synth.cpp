#include "gaitseg/synth.hpp"

#include "gaitseg/ar.hpp"

#include <cmath>
#include <numbers>

namespace gaitseg {

void SynthSpec::validate() const {
  if (regimes.empty()) throw Error(ErrorCode::InvalidSpec, "no regimes");
  if (!(rate > 0) || !(duration_s > 0))
    throw Error(ErrorCode::InvalidSpec, "rate and duration must be positive");
  for (const auto& r : regimes) {
    if (!(r.mean_dwell_s > 0))
      throw Error(ErrorCode::InvalidSpec, "dwell times must be positive");
    r.state.validate();
  }
  if (timestamp_jitter < 0 || timestamp_jitter >= 1.0)
    throw Error(ErrorCode::InvalidSpec, "jitter must be in [0, 1)");
}

namespace {

Vec3 gravity_at(const std::vector<GravityKnot>& knots, double t) {
  if (knots.empty()) return {0.0, 0.0, 9.81};
  if (t <= knots.front().t) return knots.front().g;
  if (t >= knots.back().t) return knots.back().g;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (t <= knots[i].t) {
      const double w = (t - knots[i - 1].t) / (knots[i].t - knots[i - 1].t);
      Vec3 g;
      for (int c = 0; c < 3; ++c)
        g[c] = knots[i - 1].g[c] + w * (knots[i].g[c] - knots[i - 1].g[c]);
      return g;
    }
  }
  return knots.back().g;
}

// slowly rotating unit axis
Vec3 axis_at(double t) {
  const double az = 0.05 * t + 0.3 * std::sin(0.011 * t);
  const double el = 0.4 + 0.2 * std::sin(0.017 * t);
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
          std::sin(el)};
}

}  // namespace

SynthOutput generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Rng regime_rng = rng.split("regimes");
  Rng noise_rng = rng.split("innovations");
  Rng jitter_rng = rng.split("timestamps");

  const std::size_t T =
      static_cast<std::size_t>(std::lround(spec.duration_s * spec.rate));
  SynthOutput out;
  out.regime_labels.resize(T);
  out.gait_labels.resize(T);
  out.dynamic.resize(T);
  out.grid_times.resize(T);

  // semi-Markov regime path: exponential dwell, uniform jump to another regime
  std::vector<int> path(T);
  {
    std::size_t t = 0;
    int cur = static_cast<int>(regime_rng.uniform() * spec.regimes.size()) %
              static_cast<int>(spec.regimes.size());
    while (t < T) {
      const double dwell =
          regime_rng.exponential(spec.regimes[cur].mean_dwell_s);
      std::size_t steps = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::lround(dwell * spec.rate)));
      for (std::size_t i = 0; i < steps && t < T; ++i, ++t) path[t] = cur;
      if (spec.regimes.size() > 1) {
        // Alternate between gait and non-gait regimes when both kinds exist
        // (activity bouts separated by rest, as in free-living recordings);
        // otherwise jump uniformly to any other regime.
        std::vector<int> cand;
        for (int k = 0; k < static_cast<int>(spec.regimes.size()); ++k)
          if (k != cur &&
              spec.regimes[static_cast<std::size_t>(k)].is_gait !=
                  spec.regimes[static_cast<std::size_t>(cur)].is_gait)
            cand.push_back(k);
        if (cand.empty()) {
          for (int k = 0; k < static_cast<int>(spec.regimes.size()); ++k)
            if (k != cur) cand.push_back(k);
        }
        cur = cand[static_cast<std::size_t>(regime_rng.uniform() *
                                            static_cast<double>(cand.size())) %
                   cand.size()];
      }
    }
  }

  // AR dynamics with a lag buffer carried across regime switches
  int max_order = 1;
  for (const auto& r : spec.regimes) max_order = std::max(max_order, r.state.order());
  std::vector<double> buf(static_cast<std::size_t>(max_order), 0.0);
  std::size_t head = 0;  // buf[(head - 1 - j) mod max_order] = value j+1 steps back
  for (std::size_t t = 0; t < T; ++t) {
    const ArState& st = spec.regimes[static_cast<std::size_t>(path[t])].state;
    double v = noise_rng.normal(0.0, std::sqrt(st.noise_var));
    for (int j = 0; j < st.order(); ++j)
      v += st.coeffs[j] *
           buf[(head + static_cast<std::size_t>(max_order) - 1 -
                static_cast<std::size_t>(j)) %
               static_cast<std::size_t>(max_order)];
    buf[head] = v;
    head = (head + 1) % static_cast<std::size_t>(max_order);
    out.dynamic[t] = v;
    out.regime_labels[t] = path[t];
    out.gait_labels[t] =
        spec.regimes[static_cast<std::size_t>(path[t])].is_gait ? 1 : 0;
    out.grid_times[t] = static_cast<double>(t) / spec.rate;
  }

  out.amplitude.rate = spec.rate;
  out.amplitude.origin = "synth";
  out.amplitude.boundaries = {0};
  out.amplitude.values.resize(T);
  for (std::size_t t = 0; t < T; ++t)
    out.amplitude.values[t] = std::abs(out.dynamic[t]);

  // 3-axis recording: gravity + dynamic component on a rotating axis,
  // timestamps jittered around 1/rate
  out.recording.source_id = "synth";
  out.recording.timestamps.resize(T);
  out.recording.samples.resize(T);
  double tprev = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double dt =
        (1.0 / spec.rate) *
        (1.0 + spec.timestamp_jitter * jitter_rng.uniform(-1.0, 1.0));
    const double ts = t == 0 ? 0.0 : tprev + dt;
    tprev = ts;
    out.recording.timestamps[t] = ts;
    const Vec3 g = gravity_at(spec.gravity, ts);
    const Vec3 u = axis_at(ts);
    for (int c = 0; c < 3; ++c)
      out.recording.samples[t][c] = g[c] + out.dynamic[t] * u[c];
  }
  return out;
}

ArState make_ar_with_peak(double freq_hz, double rate, double bandwidth_hz,
                          double variance) {
  if (!(freq_hz > 0) || !(freq_hz < 0.5 * rate))
    throw Error(ErrorCode::FrequencyOutOfRange, "freq must be in (0, rate/2)");
  const double m = std::exp(-std::numbers::pi * bandwidth_hz / rate);
  const double w = 2.0 * std::numbers::pi * freq_hz / rate;
  const double u = 2.0 * m * std::cos(w);
  const double v = m * m;
  ArState s;
  // (1 - u z + v z^2)^2: doubled conjugate pole pair
  s.coeffs = {2.0 * u, -(u * u + 2.0 * v), 2.0 * u * v, -v * v};
  s.noise_var = 1.0;

  // calibrate the innovation variance by simulation
  Rng rng(0x9e3779b97f4a7c15ull ^ static_cast<std::uint64_t>(freq_hz * 1e6) ^
          (static_cast<std::uint64_t>(bandwidth_hz * 1e6) << 20));
  auto sim = ar_simulate(s, 1 << 18, rng, 4000);
  double mean = 0.0;
  for (double x : sim) mean += x;
  mean /= static_cast<double>(sim.size());
  double var = 0.0;
  for (double x : sim) var += (x - mean) * (x - mean);
  var /= static_cast<double>(sim.size());
  s.noise_var = variance / var;
  return s;
}

ArState make_cycle_bump_state(int order, double peak_lag, double width,
                              double mass, double noise_var) {
  ArState s;
  s.coeffs.resize(static_cast<std::size_t>(order));
  double sum = 0.0;
  for (int j = 1; j <= order; ++j) {
    const double u = (static_cast<double>(j) - peak_lag) / width;
    s.coeffs[static_cast<std::size_t>(j - 1)] = std::exp(-u * u);
    sum += s.coeffs[static_cast<std::size_t>(j - 1)];
  }
  for (auto& c : s.coeffs) c *= mass / sum;
  s.noise_var = noise_var;
  return s;
}

namespace {

// AR(4) with a sharp resonance at f0 (pins the spectral peak) plus two real
// poles that keep a broadband noise floor. The floor keeps the one-step
// innovation variance proportional to the process variance, so regimes that
// differ in scale stay separable after rectification; a doubled narrowband
// pole pair would make the process nearly deterministic instead.
ArState make_peaky_state(double f0, double rate, double modulus, double p,
                         double q, double variance) {
  // Iteratively nudge the resonant pole angle so the PSD argmax lands on f0;
  // the real poles tilt the spectrum and would otherwise drag the peak down.
  double w = 2.0 * std::numbers::pi * f0 / rate;
  ArState s;
  std::vector<double> grid;
  for (double f = 0.05; f <= 5.0; f += 0.005) grid.push_back(f);
  for (int pass = 0; pass < 6; ++pass) {
    // (1 - 2 m cos(w) z + m^2 z^2)(1 - p z)(1 - q z), coefficients negated
    const double f2[3] = {1.0, -2.0 * modulus * std::cos(w),
                          modulus * modulus};
    const double g2[3] = {1.0, -(p + q), p * q};
    double c[5] = {0, 0, 0, 0, 0};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) c[i + j] += f2[i] * g2[j];
    s.coeffs = {-c[1], -c[2], -c[3], -c[4]};
    s.noise_var = 1.0;
    auto psd = ar_psd(s, grid, rate);
    std::size_t am = 0;
    for (std::size_t i = 0; i < psd.size(); ++i)
      if (psd[i] > psd[am]) am = i;
    const double err = f0 - grid[am];
    if (std::abs(err) < 0.005) break;
    w += 2.0 * std::numbers::pi * err / rate;
  }
  Rng rng(0xa0761d6478bd642full ^ static_cast<std::uint64_t>(f0 * 1e6) ^
          (static_cast<std::uint64_t>(modulus * 1e6) << 20));
  auto sim = ar_simulate(s, 1 << 18, rng, 4000);
  double mean = 0.0;
  for (double x : sim) mean += x;
  mean /= static_cast<double>(sim.size());
  double var = 0.0;
  for (double x : sim) var += (x - mean) * (x - mean);
  var /= static_cast<double>(sim.size());
  s.noise_var = variance / var;
  return s;
}

}  // namespace

SynthSpec default3_spec(std::uint64_t seed, double duration_s) {
  SynthSpec spec;
  spec.rate = 30.0;
  spec.duration_s = duration_s;
  spec.seed = seed;
  spec.regimes = {
      {make_peaky_state(0.75, 30.0, 0.93, 0.15, -0.15, 1.0), true, 20.0,
       "gait-A"},
      {make_peaky_state(0.9, 30.0, 0.93, 0.15, -0.15, 16.0), true, 20.0,
       "gait-B"},
      {ArState{{0.0, 0.0, 0.0, 0.0}, 0.04}, false, 12.0, "idle"},
  };
  spec.gravity = {
      {0.0, {0.3, -0.2, 9.79}},
      {0.5 * duration_s, {1.1, 0.6, 9.70}},
      {duration_s, {0.4, 1.3, 9.68}},
  };
  return spec;
}

SynthSpec default4_spec(std::uint64_t seed, double duration_s) {
  SynthSpec spec = default3_spec(seed, duration_s);
  // Detection-oriented variant of the 3-regime preset. The gait resonances
  // are much sharper (modulus 0.995): rectification attenuates
  // autocorrelation strongly, so only a near-periodic oscillation keeps a
  // usable autocorrelation peak in the amplitude series. Bouts are longer so
  // that windowed detectors see mostly pure windows, and a fourth non-gait
  // "fidget" regime adds mildly correlated arbitrary movement between idle
  // and gait in scale.
  spec.regimes[0].state = make_peaky_state(0.75, 30.0, 0.995, 0.15, -0.15, 1.0);
  spec.regimes[0].mean_dwell_s = 45.0;
  spec.regimes[1].state =
      make_peaky_state(0.9, 30.0, 0.995, 0.15, -0.15, 16.0);
  spec.regimes[1].mean_dwell_s = 45.0;
  spec.regimes[2].mean_dwell_s = 30.0;
  ArState fidget;
  fidget.coeffs = {0.5};
  fidget.noise_var = 0.15 * (1.0 - 0.5 * 0.5);  // process variance 0.15
  spec.regimes.push_back({fidget, false, 20.0, "fidget"});
  return spec;
}

}  // namespace gaitseg
