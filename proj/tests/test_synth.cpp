#include <cmath>
#include <vector>

#include "doctest.h"
#include "gaitseg/ingest.hpp"
#include "gaitseg/spectral.hpp"
#include "gaitseg/synth.hpp"
#include "gaitseg/trend.hpp"

using namespace gaitseg;

TEST_SUITE("synth") {

TEST_CASE("single white-noise regime: one label, i.i.d. amplitude") {
  SynthSpec spec;
  spec.rate = 30.0;
  spec.duration_s = 100.0;
  spec.seed = 5;
  spec.regimes = {{ArState{{0.0}, 1.0}, false, 10.0, "idle"}};
  SynthOutput out = generate(spec);
  for (int z : out.regime_labels) CHECK(z == 0);
  for (int g : out.gait_labels) CHECK(g == 0);
  // the pre-rectification dynamic component is white: lag-1 autocorrelation
  // of a T=3000 sample is O(1/sqrt(T))
  const auto& x = out.dynamic;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double c0 = 0.0, c1 = 0.0;
  for (std::size_t t = 0; t + 1 < x.size(); ++t) {
    c0 += (x[t] - mean) * (x[t] - mean);
    c1 += (x[t] - mean) * (x[t + 1] - mean);
  }
  CHECK(std::abs(c1 / c0) < 0.06);
}

TEST_CASE("same seed twice: identical outputs") {
  SynthSpec spec = default3_spec(77, 60.0);
  SynthOutput a = generate(spec);
  SynthOutput b = generate(spec);
  CHECK(a.recording.timestamps == b.recording.timestamps);
  CHECK(a.recording.samples == b.recording.samples);
  CHECK(a.regime_labels == b.regime_labels);
  CHECK(a.amplitude.values == b.amplitude.values);
}

TEST_CASE("default3: per-regime periodogram peaks at the design frequencies") {
  SynthSpec spec = default3_spec(1, 200.0);
  const double design[2] = {0.75, 0.9};
  // the regime states themselves resonate exactly at the design frequencies
  for (int regime = 0; regime < 2; ++regime) {
    std::vector<double> freqs;
    for (double f = 0.05; f <= 5.0; f += 0.005) freqs.push_back(f);
    auto psd =
        ar_psd(spec.regimes[static_cast<std::size_t>(regime)].state, freqs,
               30.0);
    std::size_t am = 0;
    for (std::size_t i = 0; i < psd.size(); ++i)
      if (psd[i] > psd[am]) am = i;
    CHECK(std::abs(freqs[am] - design[regime]) <= 0.05);
  }
  // and the generated samples reproduce them: Welch estimate on each
  // regime's concatenated points (short segments for heavy averaging; the
  // raw periodogram of a moderate-bandwidth resonance is too noisy)
  SynthOutput out = generate(spec);
  for (int regime = 0; regime < 2; ++regime) {
    std::vector<double> concat;
    for (std::size_t t = 0; t < out.dynamic.size(); ++t)
      if (out.regime_labels[t] == regime) concat.push_back(out.dynamic[t]);
    REQUIRE(concat.size() > 600);
    const double peak = dominant_frequency(concat, 30.0, 0.2, 5.0, 256);
    CHECK(std::abs(peak - design[regime]) <= 0.1);
  }
  // idle regime is white and low variance
  std::vector<double> idle;
  for (std::size_t t = 0; t < out.dynamic.size(); ++t)
    if (out.regime_labels[t] == 2) idle.push_back(out.dynamic[t]);
  double var = 0.0;
  for (double v : idle) var += v * v;
  var /= static_cast<double>(idle.size());
  CHECK(var < 0.1);
}

TEST_CASE("make_ar_with_peak: PSD argmax at the requested frequency") {
  ArState st = make_ar_with_peak(1.0, 30.0, 0.5, 2.0);
  std::vector<double> freqs;
  for (double f = 0.1; f <= 10.0; f += 0.01) freqs.push_back(f);
  auto psd = ar_psd(st, freqs, 30.0);
  std::size_t am = 0;
  for (std::size_t i = 0; i < psd.size(); ++i)
    if (psd[i] > psd[am]) am = i;
  CHECK(std::abs(freqs[am] - 1.0) <= 0.1);
}

TEST_CASE("make_ar_with_peak: huge bandwidth gives a near-flat spectrum") {
  // poles shrink toward the origin; place the resonance mid-band so the two
  // conjugate pole contributions do not stack up at 0 Hz
  ArState st = make_ar_with_peak(7.5, 30.0, 15.0, 1.0);
  std::vector<double> freqs;
  for (double f = 0.0; f <= 15.0; f += 0.05) freqs.push_back(f);
  auto psd = ar_psd(st, freqs, 30.0);
  const double mx = *std::max_element(psd.begin(), psd.end());
  const double mn = *std::min_element(psd.begin(), psd.end());
  CHECK(mx / mn < 2.0);
}

TEST_CASE("make_ar_with_peak: always stationary, variance calibrated") {
  for (double bw : {0.3, 1.0, 5.0}) {
    ArState st = make_ar_with_peak(1.3, 30.0, bw, 2.5);
    CHECK(is_stationary(st));
    Rng rng(19);
    auto x = ar_simulate(st, 1 << 17, rng, 2000);
    double mean = 0.0, var = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.size());
    CHECK(var == doctest::Approx(2.5).epsilon(0.05));
  }
  CHECK_THROWS_AS(make_ar_with_peak(16.0, 30.0, 1.0, 1.0), Error);
}

TEST_CASE("make_cycle_bump_state: coefficient profile peaks at the cycle lag") {
  ArState st = make_cycle_bump_state(90, 40.0, 8.0, 0.7, 0.3);
  REQUIRE(st.order() == 90);
  double sum = 0.0;
  std::size_t am = 0;
  for (std::size_t j = 0; j < st.coeffs.size(); ++j) {
    sum += st.coeffs[j];
    if (st.coeffs[j] > st.coeffs[am]) am = j;
  }
  CHECK(sum == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(am + 1 == 40);  // lag index of the peak
  CHECK(is_stationary(st));
}

TEST_CASE("dwell durations: sample means within 15% of the specification") {
  SynthSpec spec;
  spec.rate = 30.0;
  spec.duration_s = 1200.0;
  spec.seed = 11;
  spec.regimes = {{ArState{{0.0}, 1.0}, true, 2.0, "a"},
                  {ArState{{0.0}, 0.2}, false, 3.0, "b"}};
  SynthOutput out = generate(spec);
  // collect run lengths per regime
  std::vector<double> total(2, 0.0);
  std::vector<int> runs(2, 0);
  std::size_t start = 0;
  for (std::size_t t = 1; t <= out.regime_labels.size(); ++t) {
    if (t == out.regime_labels.size() ||
        out.regime_labels[t] != out.regime_labels[start]) {
      const int r = out.regime_labels[start];
      total[static_cast<std::size_t>(r)] +=
          static_cast<double>(t - start) / 30.0;
      runs[static_cast<std::size_t>(r)]++;
      start = t;
    }
  }
  CHECK(total[0] / runs[0] == doctest::Approx(2.0).epsilon(0.15));
  CHECK(total[1] / runs[1] == doctest::Approx(3.0).epsilon(0.15));
}

TEST_CASE("generated recording satisfies raw-recording invariants") {
  SynthOutput out = generate(default3_spec(3, 60.0));
  CHECK_NOTHROW(out.recording.validate());
  for (std::size_t t = 1; t < out.recording.timestamps.size(); ++t)
    CHECK(out.recording.timestamps[t] > out.recording.timestamps[t - 1]);
}

TEST_CASE("pipeline closure: preprocessing recovers the generator amplitude") {
  // jitter-free timestamps: the ground-truth amplitude lives on the internal
  // grid, so jittered sampling plus resampling would decorrelate pointwise
  SynthSpec spec = default3_spec(1, 200.0);
  spec.timestamp_jitter = 0.0;
  SynthOutput out = generate(spec);
  auto series = ingest_recording(out.recording, 30.0);
  REQUIRE(series.size() == 1);
  auto res = dynamic_amplitude(series[0],
                               default_trend_lambda(series[0].size(), 30.0));
  const std::size_t n =
      std::min(res.amplitude.size(), out.amplitude.size());
  REQUIRE(n > 5000);
  double mx = 0.0, my = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    mx += res.amplitude.values[t];
    my += out.amplitude.values[t];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double dx = res.amplitude.values[t] - mx;
    const double dy = out.amplitude.values[t] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  CHECK(sxy / std::sqrt(sxx * syy) > 0.95);
}

TEST_CASE("spec validation") {
  SynthSpec spec;
  spec.rate = 30.0;
  spec.duration_s = 10.0;
  CHECK_THROWS_AS(generate(spec), Error);  // no regimes
  spec.regimes = {{ArState{{0.0}, 1.0}, false, -1.0, "bad"}};
  CHECK_THROWS_AS(generate(spec), Error);  // negative dwell
  spec.regimes[0].mean_dwell_s = 5.0;
  spec.timestamp_jitter = 1.5;
  CHECK_THROWS_AS(generate(spec), Error);  // jitter out of range
}

}  // TEST_SUITE
