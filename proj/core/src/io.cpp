#include "gaitseg/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gaitseg {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

RawRecording read_recording_csv(const std::string& path) {
  auto in = open_in(path);
  RawRecording rec;
  rec.source_id = path;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // `t,ax,ay,az`
      continue;
    }
    auto f = split_csv(line);
    if (f.size() != 4)
      throw Error(ErrorCode::IoError, "expected 4 columns in " + path);
    rec.timestamps.push_back(std::stod(f[0]));
    rec.samples.push_back({std::stod(f[1]), std::stod(f[2]), std::stod(f[3])});
  }
  if (rec.timestamps.size() < 2)
    throw Error(ErrorCode::EmptyRecording, "too few rows in " + path);
  return rec;
}

void write_recording_csv(const std::string& path, const RawRecording& rec,
                         const std::string& header_comment) {
  auto out = open_out(path);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "t,ax,ay,az\n";
  for (std::size_t i = 0; i < rec.size(); ++i)
    out << format_double(rec.timestamps[i]) << ","
        << format_double(rec.samples[i][0]) << ","
        << format_double(rec.samples[i][1]) << ","
        << format_double(rec.samples[i][2]) << "\n";
}

AmplitudeSeries read_amplitude_csv(const std::string& path) {
  auto in = open_in(path);
  AmplitudeSeries amp;
  amp.origin = path;
  std::string line;
  bool header_seen = false;
  std::vector<double> times;
  while (std::getline(in, line)) {
    if (line.rfind("# boundary", 0) == 0) {
      amp.boundaries.push_back(amp.values.size());
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // `t,amp`
      continue;
    }
    auto f = split_csv(line);
    if (f.size() != 2)
      throw Error(ErrorCode::IoError, "expected 2 columns in " + path);
    times.push_back(std::stod(f[0]));
    amp.values.push_back(std::stod(f[1]));
  }
  if (amp.values.size() < 2)
    throw Error(ErrorCode::EmptyRecording, "too few rows in " + path);
  if (amp.boundaries.empty() || amp.boundaries.front() != 0)
    amp.boundaries.insert(amp.boundaries.begin(), 0);
  amp.rate = static_cast<double>(times.size() - 1) /
             (times.back() - times.front());
  amp.rate = std::round(amp.rate * 1e6) / 1e6;
  return amp;
}

void write_amplitude_csv(const std::string& path, const AmplitudeSeries& amp,
                         const std::string& header_comment) {
  auto out = open_out(path);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "t,amp\n";
  std::size_t bi = 0;
  for (std::size_t i = 0; i < amp.size(); ++i) {
    while (bi < amp.boundaries.size() && amp.boundaries[bi] == i) {
      if (i != 0) out << "# boundary\n";
      ++bi;
    }
    out << format_double(static_cast<double>(i) / amp.rate) << ","
        << format_double(amp.values[i]) << "\n";
  }
}

LabelSeries read_labels_csv(const std::string& path) {
  auto in = open_in(path);
  LabelSeries ls;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // `t,label`
      continue;
    }
    auto f = split_csv(line);
    if (f.size() != 2)
      throw Error(ErrorCode::IoError, "expected 2 columns in " + path);
    ls.times.push_back(std::stod(f[0]));
    ls.labels.push_back(std::stoi(f[1]));
  }
  return ls;
}

void write_labels_csv(const std::string& path, const LabelSeries& labels,
                      const std::string& header_comment) {
  auto out = open_out(path);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "t,label\n";
  for (std::size_t i = 0; i < labels.times.size(); ++i)
    out << format_double(labels.times[i]) << "," << labels.labels[i] << "\n";
}

std::vector<int> align_labels(const LabelSeries& labels,
                              const std::vector<double>& grid_times) {
  if (labels.times.empty())
    throw Error(ErrorCode::EmptyRecording, "empty label series");
  std::vector<int> out(grid_times.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < grid_times.size(); ++i) {
    while (j + 1 < labels.times.size() &&
           std::abs(labels.times[j + 1] - grid_times[i]) <=
               std::abs(labels.times[j] - grid_times[i]))
      ++j;
    out[i] = labels.labels[j];
  }
  return out;
}

namespace {

json snapshot_to_json(const ModelSnapshot& s) {
  json j;
  j["iteration"] = s.iteration;
  j["seed"] = s.seed;
  j["k_active"] = s.sequence.k_active;
  j["beta"] = s.beta;
  json rle = json::array();
  {
    const auto& z = s.sequence.labels;
    std::size_t i = 0;
    while (i < z.size()) {
      std::size_t run = 1;
      while (i + run < z.size() && z[i + run] == z[i]) ++run;
      rle.push_back({z[i] + 1, run});  // serialized labels are 1-based
      i += run;
    }
  }
  j["labels_rle"] = rle;
  json states = json::array();
  for (const auto& st : s.states)
    states.push_back({{"order", st.order()},
                      {"coeffs", st.coeffs},
                      {"noise_var", st.noise_var}});
  j["states"] = states;
  j["transition_counts"] = s.transition_counts;
  j["hyper"] = {{"gamma", s.hyper.gamma},
                {"alpha", s.hyper.alpha},
                {"kappa", s.hyper.kappa},
                {"order", s.hyper.order},
                {"truncation", s.hyper.truncation},
                {"prior", s.hyper.ar_prior.kind == PriorKind::Conjugate
                              ? "conjugate"
                              : "sparse"},
                {"coeff_var", s.hyper.ar_prior.coeff_var.size()
                                  ? s.hyper.ar_prior.coeff_var[0]
                                  : 0.25},
                {"nu", s.hyper.ar_prior.nu},
                {"theta", s.hyper.ar_prior.theta}};
  j["truncation_saturated"] = s.truncation_saturated;
  return j;
}

ModelSnapshot snapshot_from_json(const json& j) {
  ModelSnapshot s;
  s.iteration = j.at("iteration").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.sequence.k_active = j.at("k_active").get<int>();
  s.beta = j.at("beta").get<std::vector<double>>();
  for (const auto& run : j.at("labels_rle")) {
    const int label = run.at(0).get<int>() - 1;
    const std::size_t count = run.at(1).get<std::size_t>();
    s.sequence.labels.insert(s.sequence.labels.end(), count, label);
  }
  for (const auto& st : j.at("states")) {
    ArState a;
    a.coeffs = st.at("coeffs").get<std::vector<double>>();
    a.noise_var = st.at("noise_var").get<double>();
    s.states.push_back(std::move(a));
  }
  s.transition_counts =
      j.at("transition_counts").get<std::vector<std::vector<long>>>();
  const auto& h = j.at("hyper");
  s.hyper.gamma = h.at("gamma").get<double>();
  s.hyper.alpha = h.at("alpha").get<double>();
  s.hyper.kappa = h.at("kappa").get<double>();
  s.hyper.order = h.at("order").get<int>();
  s.hyper.truncation = h.at("truncation").get<int>();
  const bool conj = h.at("prior").get<std::string>() == "conjugate";
  const double cv = h.at("coeff_var").get<double>();
  s.hyper.ar_prior =
      conj ? ArPrior::conjugate(s.hyper.order, cv, h.at("nu").get<double>(),
                                h.at("theta").get<double>())
           : ArPrior::sparse_ard(s.hyper.order, cv, h.at("nu").get<double>(),
                                 h.at("theta").get<double>());
  s.truncation_saturated = j.value("truncation_saturated", false);
  return s;
}

}  // namespace

void write_snapshot_ndjson_line(std::ostream& os, const ModelSnapshot& snap) {
  os << snapshot_to_json(snap).dump() << "\n";
}

void write_snapshots_ndjson(std::ostream& os,
                            const std::vector<ModelSnapshot>& snaps,
                            const std::string& header_comment) {
  if (!header_comment.empty())
    os << R"({"comment":")" << header_comment << "\"}\n";
  for (const auto& s : snaps) write_snapshot_ndjson_line(os, s);
}

std::vector<ModelSnapshot> read_snapshots_ndjson(const std::string& path) {
  auto in = open_in(path);
  std::vector<ModelSnapshot> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    if (j.contains("comment")) continue;
    out.push_back(snapshot_from_json(j));
  }
  if (out.empty())
    throw Error(ErrorCode::MissingArtifacts, "no snapshots in " + path);
  return out;
}

std::string ar_state_to_json(const ArState& state) {
  json j = {{"order", state.order()},
            {"coeffs", state.coeffs},
            {"noise_var", state.noise_var}};
  return j.dump();
}

ArState ar_state_from_json(const std::string& json_text) {
  json j = json::parse(json_text);
  ArState s;
  s.coeffs = j.at("coeffs").get<std::vector<double>>();
  s.noise_var = j.at("noise_var").get<double>();
  if (j.contains("order") &&
      j.at("order").get<int>() != s.order())
    throw Error(ErrorCode::DimensionMismatch, "order/coeffs mismatch");
  return s;
}

SynthSpec load_synth_spec_json(const std::string& path,
                               std::uint64_t default_seed) {
  auto in = open_in(path);
  json j = json::parse(in);
  if (!j.is_object())
    throw Error(ErrorCode::InvalidSpec, "spec must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    static const char* known[] = {"regimes", "gravity", "rate", "duration_s",
                                  "seed", "timestamp_jitter"};
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok)
      throw Error(ErrorCode::InvalidSpec, "unknown spec key '" + key + "'");
  }
  SynthSpec spec;
  spec.rate = j.value("rate", spec.rate);
  spec.duration_s = j.value("duration_s", spec.duration_s);
  spec.seed = j.value("seed", default_seed);
  spec.timestamp_jitter = j.value("timestamp_jitter", spec.timestamp_jitter);
  for (const auto& r : j.at("regimes")) {
    SynthRegime reg;
    reg.state.coeffs = r.at("coeffs").get<std::vector<double>>();
    reg.state.noise_var = r.at("noise_var").get<double>();
    reg.is_gait = r.value("is_gait", false);
    reg.mean_dwell_s = r.value("mean_dwell_s", 15.0);
    reg.name = r.value("name", "");
    spec.regimes.push_back(std::move(reg));
  }
  if (j.contains("gravity"))
    for (const auto& k : j.at("gravity")) {
      GravityKnot knot;
      knot.t = k.at("t").get<double>();
      auto g = k.at("g").get<std::vector<double>>();
      if (g.size() != 3)
        throw Error(ErrorCode::InvalidSpec, "gravity knot needs 3 components");
      knot.g = {g[0], g[1], g[2]};
      spec.gravity.push_back(knot);
    }
  return spec;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace gaitseg
