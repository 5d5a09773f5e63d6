#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "gaitseg/io.hpp"
#include "gaitseg/pipeline.hpp"
#include "gaitseg/segmenter.hpp"
#include "gaitseg/synth.hpp"

using namespace gaitseg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("gaitseg_io_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace

TEST_SUITE("io") {

TEST_CASE("recording CSV round trip") {
  TempDir dir;
  SynthOutput out = generate(default3_spec(4, 20.0));
  const std::string path = dir.file("rec.csv");
  write_recording_csv(path, out.recording, "unit test");
  RawRecording back = read_recording_csv(path);
  REQUIRE(back.size() == out.recording.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back.timestamps[i] ==
          doctest::Approx(out.recording.timestamps[i]).epsilon(1e-10));
    for (int c = 0; c < 3; ++c)
      CHECK(back.samples[i][c] ==
            doctest::Approx(out.recording.samples[i][c]).epsilon(1e-10));
  }
}

TEST_CASE("amplitude CSV round trip keeps boundaries and rate") {
  TempDir dir;
  AmplitudeSeries amp;
  amp.rate = 30.0;
  amp.origin = "test";
  amp.boundaries = {0, 100};
  for (int i = 0; i < 200; ++i)
    amp.values.push_back(0.5 + 0.001 * static_cast<double>(i));
  const std::string path = dir.file("amp.csv");
  write_amplitude_csv(path, amp, "unit test");
  AmplitudeSeries back = read_amplitude_csv(path);
  REQUIRE(back.size() == amp.size());
  CHECK(back.rate == doctest::Approx(30.0).epsilon(1e-6));
  CHECK(back.boundaries == amp.boundaries);
  for (std::size_t i = 0; i < amp.size(); ++i)
    CHECK(back.values[i] == doctest::Approx(amp.values[i]).epsilon(1e-10));
}

TEST_CASE("labels CSV round trip and grid alignment") {
  TempDir dir;
  LabelSeries ls;
  for (int i = 0; i < 50; ++i) {
    ls.times.push_back(static_cast<double>(i) / 10.0);
    ls.labels.push_back(i % 3 == 0 ? 1 : 0);
  }
  const std::string path = dir.file("labels.csv");
  write_labels_csv(path, ls, "unit test");
  LabelSeries back = read_labels_csv(path);
  CHECK(back.labels == ls.labels);

  // exact-grid alignment is the identity
  CHECK(align_labels(back, ls.times) == ls.labels);
  // nearest-timestamp alignment on a shifted grid
  std::vector<int> aligned = align_labels(back, {0.01, 0.11, 0.52});
  CHECK(aligned[0] == ls.labels[0]);
  CHECK(aligned[1] == ls.labels[1]);
  CHECK(aligned[2] == ls.labels[5]);
}

TEST_CASE("snapshot NDJSON round trip") {
  SynthOutput out = generate(default3_spec(2, 30.0));
  HdpHyper h;
  h.order = 3;
  h.ar_prior = ArPrior::conjugate(3);
  Rng rng(2);
  auto snaps = gibbs_direct_assignment(out.amplitude, h, 5, rng);
  std::ostringstream os;
  write_snapshots_ndjson(os, snaps, "unit test");
  TempDir dir;
  const std::string path = dir.file("snaps.ndjson");
  {
    std::ofstream f(path);
    f << os.str();
  }
  auto back = read_snapshots_ndjson(path);
  REQUIRE(back.size() == snaps.size());
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    CHECK(back[i].sequence.labels == snaps[i].sequence.labels);
    CHECK(back[i].sequence.k_active == snaps[i].sequence.k_active);
    CHECK(back[i].beta == snaps[i].beta);
    REQUIRE(back[i].states.size() == snaps[i].states.size());
    for (std::size_t k = 0; k < snaps[i].states.size(); ++k) {
      CHECK(back[i].states[k].coeffs == snaps[i].states[k].coeffs);
      CHECK(back[i].states[k].noise_var == snaps[i].states[k].noise_var);
    }
    CHECK(back[i].transition_counts == snaps[i].transition_counts);
    CHECK_NOTHROW(back[i].validate());
  }
}

TEST_CASE("ArState JSON round trip and mismatch detection") {
  ArState st;
  st.coeffs = {0.5, -0.25, 0.1};
  st.noise_var = 0.42;
  ArState back = ar_state_from_json(ar_state_to_json(st));
  CHECK(back.coeffs == st.coeffs);
  CHECK(back.noise_var == st.noise_var);
  CHECK_THROWS_AS(
      ar_state_from_json(R"({"order":5,"coeffs":[0.1],"noise_var":1.0})"),
      Error);
}

TEST_CASE("synthetic spec JSON loader") {
  TempDir dir;
  const std::string path = dir.file("spec.json");
  {
    std::ofstream f(path);
    f << R"({
      "rate": 30.0,
      "duration_s": 12.0,
      "timestamp_jitter": 0.1,
      "regimes": [
        {"coeffs": [0.9], "noise_var": 0.19, "is_gait": true,
         "mean_dwell_s": 4.0, "name": "walk"},
        {"coeffs": [0.0], "noise_var": 0.05, "name": "rest"}
      ],
      "gravity": [{"t": 0.0, "g": [0.0, 0.0, 9.81]}]
    })";
  }
  SynthSpec spec = load_synth_spec_json(path, 99);
  CHECK(spec.seed == 99);  // falls back to the default seed
  CHECK(spec.duration_s == 12.0);
  REQUIRE(spec.regimes.size() == 2);
  CHECK(spec.regimes[0].is_gait);
  CHECK(!spec.regimes[1].is_gait);
  CHECK(spec.regimes[0].name == "walk");
  CHECK_NOTHROW(generate(spec));

  const std::string bad = dir.file("bad.json");
  {
    std::ofstream f(bad);
    f << R"({"regimes": [], "surprise": 1})";
  }
  CHECK_THROWS_AS(load_synth_spec_json(bad, 1), Error);
}

TEST_CASE("fnv1a_hex is deterministic and input-sensitive") {
  CHECK(fnv1a_hex("abc") == fnv1a_hex("abc"));
  CHECK(fnv1a_hex("abc") != fnv1a_hex("abd"));
  CHECK(fnv1a_hex("").size() == 16);
}

TEST_CASE("format_double is stable") {
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0 / 3.0) == format_double(1.0 / 3.0));
}

TEST_CASE("pipeline config: defaults, canonical form, and hash") {
  PipelineConfig a = PipelineConfig::from_json_text(R"({"out_dir": "x"})");
  CHECK(a.rate == 30.0);
  CHECK(a.fit.order == 90);
  CHECK(a.fit.iters == 300);
  CHECK(a.detect.window_s == 3.0);
  PipelineConfig b = PipelineConfig::from_json_text(
      R"({"out_dir": "x", "rate": 30.0})");
  // same effective config -> same canonical form and hash
  CHECK(a.canonical_json() == b.canonical_json());
  CHECK(a.hash() == b.hash());
  PipelineConfig c = PipelineConfig::from_json_text(
      R"({"out_dir": "x", "seed": 2})");
  CHECK(a.hash() != c.hash());
}

TEST_CASE("pipeline config: unknown keys rejected") {
  try {
    PipelineConfig::from_json_text(R"({"out_dir": "x", "bogus": 1})");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigInvalid);
  }
  CHECK_THROWS_AS(PipelineConfig::from_json_text(
                      R"({"out_dir": "x", "fit": {"iter": 10}})"),
                  Error);
}

}  // TEST_SUITE
