#include "gaitseg/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "gaitseg/ingest.hpp"
#include "gaitseg/io.hpp"
#include "json.hpp"

namespace gaitseg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::string& where,
                    std::initializer_list<const char*> known) {
  if (!j.is_object())
    throw Error(ErrorCode::ConfigInvalid, where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find_if(known.begin(), known.end(), [&](const char* k) {
          return key == k;
        }) == known.end())
      throw Error(ErrorCode::ConfigInvalid,
                  "unknown config key '" + key + "' in " + where);
  }
}

SamplerKind parse_sampler(const std::string& s) {
  if (s == "direct") return SamplerKind::Direct;
  if (s == "blocked") return SamplerKind::Blocked;
  throw Error(ErrorCode::ConfigInvalid, "sampler must be direct or blocked");
}

DetectMethod parse_method(const std::string& s) {
  if (s == "nb") return DetectMethod::Nb;
  if (s == "stddev") return DetectMethod::Stddev;
  if (s == "stft") return DetectMethod::Stft;
  if (s == "nasc") return DetectMethod::Nasc;
  throw Error(ErrorCode::ConfigInvalid, "unknown detect method " + s);
}

const char* method_name(DetectMethod m) {
  switch (m) {
    case DetectMethod::Nb: return "nb";
    case DetectMethod::Stddev: return "stddev";
    case DetectMethod::Stft: return "stft";
    case DetectMethod::Nasc: return "nasc";
  }
  return "?";
}

PriorKind parse_prior(const std::string& s) {
  if (s == "conjugate") return PriorKind::Conjugate;
  if (s == "sparse") return PriorKind::SparseARD;
  throw Error(ErrorCode::ConfigInvalid, "prior must be conjugate or sparse");
}

}  // namespace

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("config parse: ") + e.what());
  }
  reject_unknown(j, "config",
                 {"seed", "rate", "out_dir", "input_csv", "labels_csv",
                  "stages", "simulate", "preprocess", "fit", "features",
                  "detect"});
  PipelineConfig c;
  c.seed = j.value("seed", c.seed);
  c.rate = j.value("rate", c.rate);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.input_csv = j.value("input_csv", c.input_csv);
  c.labels_csv = j.value("labels_csv", c.labels_csv);
  if (j.contains("stages"))
    c.stages = j.at("stages").get<std::vector<std::string>>();
  if (j.contains("simulate")) {
    const auto& s = j.at("simulate");
    reject_unknown(s, "simulate", {"preset", "spec_file", "duration_s"});
    c.simulate.preset = s.value("preset", c.simulate.preset);
    c.simulate.spec_file = s.value("spec_file", c.simulate.spec_file);
    c.simulate.duration_s = s.value("duration_s", c.simulate.duration_s);
  }
  if (j.contains("preprocess")) {
    const auto& s = j.at("preprocess");
    reject_unknown(s, "preprocess", {"lambda", "gap_split_s"});
    c.preprocess.lambda = s.value("lambda", c.preprocess.lambda);
    c.preprocess.gap_split_s = s.value("gap_split_s", c.preprocess.gap_split_s);
  }
  if (j.contains("fit")) {
    const auto& s = j.at("fit");
    reject_unknown(s, "fit",
                   {"order", "iters", "burn_in", "sampler", "truncation",
                    "kappa", "alpha", "gamma", "prior", "coeff_var", "nu",
                    "theta"});
    c.fit.order = s.value("order", c.fit.order);
    c.fit.iters = s.value("iters", c.fit.iters);
    c.fit.burn_in = s.value("burn_in", c.fit.burn_in);
    if (s.contains("sampler"))
      c.fit.sampler = parse_sampler(s.at("sampler").get<std::string>());
    c.fit.truncation = s.value("truncation", c.fit.truncation);
    c.fit.kappa = s.value("kappa", c.fit.kappa);
    c.fit.alpha = s.value("alpha", c.fit.alpha);
    c.fit.gamma = s.value("gamma", c.fit.gamma);
    if (s.contains("prior"))
      c.fit.prior = parse_prior(s.at("prior").get<std::string>());
    c.fit.coeff_var = s.value("coeff_var", c.fit.coeff_var);
    c.fit.nu = s.value("nu", c.fit.nu);
    c.fit.theta = s.value("theta", c.fit.theta);
  }
  if (j.contains("features")) {
    const auto& s = j.at("features");
    reject_unknown(s, "features", {"window_s", "lag_lo", "lag_hi"});
    c.features.window_s = s.value("window_s", c.features.window_s);
    c.features.lag_lo = s.value("lag_lo", c.features.lag_lo);
    c.features.lag_hi = s.value("lag_hi", c.features.lag_hi);
  }
  if (j.contains("detect")) {
    const auto& s = j.at("detect");
    reject_unknown(s, "detect",
                   {"method", "window_s", "stddev_threshold", "stft_f_lo",
                    "stft_f_hi", "stft_ratio", "nasc_threshold",
                    "nasc_lag_lo_s", "nasc_lag_hi_s"});
    if (s.contains("method"))
      c.detect.method = parse_method(s.at("method").get<std::string>());
    c.detect.window_s = s.value("window_s", c.detect.window_s);
    c.detect.stddev_threshold = s.value("stddev_threshold", c.detect.stddev_threshold);
    c.detect.stft_f_lo = s.value("stft_f_lo", c.detect.stft_f_lo);
    c.detect.stft_f_hi = s.value("stft_f_hi", c.detect.stft_f_hi);
    c.detect.stft_ratio = s.value("stft_ratio", c.detect.stft_ratio);
    c.detect.nasc_threshold = s.value("nasc_threshold", c.detect.nasc_threshold);
    c.detect.nasc_lag_lo_s = s.value("nasc_lag_lo_s", c.detect.nasc_lag_lo_s);
    c.detect.nasc_lag_hi_s = s.value("nasc_lag_hi_s", c.detect.nasc_lag_hi_s);
  }
  if (c.rate <= 0) throw Error(ErrorCode::ConfigInvalid, "rate must be positive");
  if (c.fit.order < 1 || c.fit.iters < 1)
    throw Error(ErrorCode::ConfigInvalid, "fit.order and fit.iters must be >= 1");
  return c;
}

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string PipelineConfig::canonical_json() const {
  json j;
  // out_dir is deliberately excluded: it cannot affect numeric content, and
  // including it would make otherwise-identical runs hash differently
  j["seed"] = seed;
  j["rate"] = rate;
  j["input_csv"] = input_csv;
  j["labels_csv"] = labels_csv;
  j["stages"] = stages;
  j["simulate"] = {{"preset", simulate.preset},
                   {"spec_file", simulate.spec_file},
                   {"duration_s", simulate.duration_s}};
  j["preprocess"] = {{"lambda", preprocess.lambda},
                     {"gap_split_s", preprocess.gap_split_s}};
  j["fit"] = {{"order", fit.order},
              {"iters", fit.iters},
              {"burn_in", fit.burn_in},
              {"sampler", fit.sampler == SamplerKind::Direct ? "direct" : "blocked"},
              {"truncation", fit.truncation},
              {"kappa", fit.kappa},
              {"alpha", fit.alpha},
              {"gamma", fit.gamma},
              {"prior", fit.prior == PriorKind::Conjugate ? "conjugate" : "sparse"},
              {"coeff_var", fit.coeff_var},
              {"nu", fit.nu},
              {"theta", fit.theta}};
  j["features"] = {{"window_s", features.window_s},
                   {"lag_lo", features.lag_lo},
                   {"lag_hi", features.lag_hi}};
  j["detect"] = {{"method", method_name(detect.method)},
                 {"window_s", detect.window_s},
                 {"stddev_threshold", detect.stddev_threshold},
                 {"stft_f_lo", detect.stft_f_lo},
                 {"stft_f_hi", detect.stft_f_hi},
                 {"stft_ratio", detect.stft_ratio},
                 {"nasc_threshold", detect.nasc_threshold},
                 {"nasc_lag_lo_s", detect.nasc_lag_lo_s},
                 {"nasc_lag_hi_s", detect.nasc_lag_hi_s}};
  return j.dump();
}

std::string PipelineConfig::hash() const { return fnv1a_hex(canonical_json()); }

int thread_cap() {
  if (const char* env = std::getenv("GAITSEG_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

namespace {

HdpHyper hyper_from(const FitConfig& f) {
  HdpHyper h;
  h.gamma = f.gamma;
  h.alpha = f.alpha;
  h.kappa = f.kappa;
  h.order = f.order;
  h.truncation = f.truncation;
  h.ar_prior = f.prior == PriorKind::Conjugate
                   ? ArPrior::conjugate(f.order, f.coeff_var, f.nu, f.theta)
                   : ArPrior::sparse_ard(f.order, f.coeff_var, f.nu, f.theta);
  return h;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i)
    g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return g;
}

std::vector<double> lin_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return g;
}

struct StageContext {
  const PipelineConfig& cfg;
  fs::path dir;
  std::string hash;

  std::string path(const std::string& name) const { return (dir / name).string(); }
  std::string stamp() const { return "config_hash=" + hash; }
};

void stage_simulate(const StageContext& ctx) {
  SynthSpec spec;
  if (!ctx.cfg.simulate.spec_file.empty()) {
    spec = load_synth_spec_json(ctx.cfg.simulate.spec_file, ctx.cfg.seed);
  } else if (ctx.cfg.simulate.preset == "default3") {
    spec = default3_spec(ctx.cfg.seed, ctx.cfg.simulate.duration_s);
  } else if (ctx.cfg.simulate.preset == "default4") {
    spec = default4_spec(ctx.cfg.seed, ctx.cfg.simulate.duration_s);
  } else {
    throw Error(ErrorCode::ConfigInvalid,
                "unknown preset " + ctx.cfg.simulate.preset);
  }
  SynthOutput out = generate(spec);
  write_recording_csv(ctx.path("data.csv"), out.recording, ctx.stamp());
  LabelSeries ls;
  ls.times = out.grid_times;
  ls.labels = out.gait_labels;
  write_labels_csv(ctx.path("labels.csv"), ls, ctx.stamp());
  LabelSeries rs;
  rs.times = out.grid_times;
  rs.labels = out.regime_labels;
  write_labels_csv(ctx.path("regimes.csv"), rs, ctx.stamp());
}

void stage_preprocess(const StageContext& ctx) {
  const std::string in_path = !ctx.cfg.input_csv.empty()
                                  ? ctx.cfg.input_csv
                                  : ctx.path("data.csv");
  RawRecording rec = read_recording_csv(in_path);
  auto segments =
      ingest_recording(rec, ctx.cfg.rate, ctx.cfg.preprocess.gap_split_s);

  AmplitudeSeries amp;
  amp.rate = ctx.cfg.rate;
  amp.origin = in_path;
  for (const auto& seg : segments) {
    const double lambda = ctx.cfg.preprocess.lambda >= 0
                              ? ctx.cfg.preprocess.lambda
                              : default_trend_lambda(seg.size(), ctx.cfg.rate);
    auto res = dynamic_amplitude(seg, lambda);
    amp.boundaries.push_back(amp.values.size());
    amp.values.insert(amp.values.end(), res.amplitude.values.begin(),
                      res.amplitude.values.end());
  }
  write_amplitude_csv(ctx.path("amp.csv"), amp, ctx.stamp());
}

void stage_fit(const StageContext& ctx) {
  AmplitudeSeries amp = read_amplitude_csv(ctx.path("amp.csv"));
  amp.rate = ctx.cfg.rate;
  HdpHyper hyper = hyper_from(ctx.cfg.fit);
  Rng rng = Rng(ctx.cfg.seed).split("fit");

  // producer/consumer hand-off: sampler pushes snapshots, writer drains
  std::ofstream os(ctx.path("snapshots.ndjson"));
  if (!os) throw Error(ErrorCode::IoError, "cannot write snapshots.ndjson");
  os << R"({"comment":")" << ctx.stamp() << "\"}\n";
  BoundedQueue<ModelSnapshot> queue(16);
  std::thread writer([&] {
    while (auto snap = queue.pop()) write_snapshot_ndjson_line(os, *snap);
  });
  auto sink = [&](const ModelSnapshot& s) { queue.push(s); };
  try {
    if (ctx.cfg.fit.sampler == SamplerKind::Direct)
      gibbs_direct_assignment(amp, hyper, ctx.cfg.fit.iters, rng, sink);
    else
      gibbs_blocked_weak_limit(amp, hyper, ctx.cfg.fit.iters, rng, sink);
  } catch (...) {
    queue.close();
    writer.join();
    throw;
  }
  queue.close();
  writer.join();
}

int effective_burn_in(const FitConfig& f) {
  return f.burn_in >= 0 ? f.burn_in : f.iters / 2;
}

void stage_features(const StageContext& ctx) {
  auto snaps = read_snapshots_ndjson(ctx.path("snapshots.ndjson"));
  const int burn = std::min<int>(effective_burn_in(ctx.cfg.fit),
                                 static_cast<int>(snaps.size()) - 1);
  StatePosterior post = state_posterior(snaps, burn);
  LagRange lr{ctx.cfg.features.lag_lo,
              ctx.cfg.features.lag_hi > 0 ? ctx.cfg.features.lag_hi
                                          : static_cast<double>(ctx.cfg.fit.order)};
  auto feats = per_state_features(snaps.back(), lr, ctx.cfg.rate);

  std::ofstream fs_out(ctx.path("states.csv"));
  fs_out << "# " << ctx.stamp() << "\n";
  fs_out << "state,a,b,c,d,cycle_time_s,support,rss\n";
  for (std::size_t k = 0; k < feats.size(); ++k) {
    const auto& f = feats[k];
    fs_out << (k + 1) << "," << format_double(f.a) << "," << format_double(f.b)
           << "," << format_double(f.c) << "," << format_double(f.d) << ","
           << format_double(f.cycle_time_s) << "," << format_double(f.support)
           << "," << format_double(f.fit_rss) << "\n";
  }

  auto timeline = feature_timeline(snaps, post, ctx.cfg.features.window_s,
                                   ctx.cfg.rate, lr);
  std::ofstream tl(ctx.path("timeline.csv"));
  tl << "# " << ctx.stamp() << "\n";
  tl << "t,c,support,b\n";
  for (const auto& row : timeline) {
    if (row.empty) {
      tl << format_double(row.window_start_s) << ",,,\n";
      continue;
    }
    tl << format_double(row.window_start_s) << "," << format_double(row.c)
       << "," << format_double(row.support) << "," << format_double(row.b)
       << "\n";
  }

  // per-point posterior, reused by detect
  std::ofstream po(ctx.path("posterior.csv"));
  po << "# " << ctx.stamp() << "\n";
  po << "t";
  for (std::size_t k = 0; k < post.num_states(); ++k) po << ",p" << (k + 1);
  po << "\n";
  for (std::size_t t = 0; t < post.probs.size(); ++t) {
    po << format_double(static_cast<double>(t) / ctx.cfg.rate);
    for (double p : post.probs[t]) po << "," << format_double(p);
    po << "\n";
  }
}

StatePosterior read_posterior_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingArtifacts, "missing " + path);
  StatePosterior post;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool first = true;
    while (std::getline(ss, cell, ',')) {
      if (first) {
        first = false;
        continue;
      }
      row.push_back(std::stod(cell));
    }
    post.probs.push_back(std::move(row));
  }
  return post;
}

std::vector<int> truth_for(const StageContext& ctx, std::size_t T) {
  const std::string path = !ctx.cfg.labels_csv.empty() ? ctx.cfg.labels_csv
                                                       : ctx.path("labels.csv");
  LabelSeries ls = read_labels_csv(path);
  std::vector<double> grid(T);
  for (std::size_t i = 0; i < T; ++i)
    grid[i] = static_cast<double>(i) / ctx.cfg.rate;
  return align_labels(ls, grid);
}

void write_metrics_json(const std::string& path, const ConfusionMetrics& m,
                        const std::string& hash) {
  json j = {{"sensitivity", m.sensitivity},
            {"specificity", m.specificity},
            {"balanced_accuracy", m.balanced_accuracy},
            {"tp", m.tp},
            {"fp", m.fp},
            {"tn", m.tn},
            {"fn", m.fn},
            {"config_hash", hash}};
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

void stage_detect(const StageContext& ctx) {
  AmplitudeSeries amp = read_amplitude_csv(ctx.path("amp.csv"));
  amp.rate = ctx.cfg.rate;
  std::vector<int> truth = truth_for(ctx, amp.size());
  const DetectConfig& dc = ctx.cfg.detect;

  std::vector<int> pred;
  if (dc.method == DetectMethod::Nb) {
    StatePosterior post = read_posterior_csv(ctx.path("posterior.csv"));
    NbModel model = train_nb(post, truth);
    pred = predict_nb(model, post);
  } else if (dc.method == DetectMethod::Stddev) {
    double thr = dc.stddev_threshold;
    if (thr < 0) {
      double mx = *std::max_element(amp.values.begin(), amp.values.end());
      thr = tune_threshold(
          [&](double p) { return detect_stddev(amp, dc.window_s, p); }, truth,
          log_grid(1e-3, std::max(mx, 1e-2), 50));
    }
    pred = detect_stddev(amp, dc.window_s, thr);
  } else if (dc.method == DetectMethod::Stft) {
    double thr = dc.stft_ratio;
    if (thr < 0)
      thr = tune_threshold(
          [&](double p) {
            return detect_stft(amp, dc.window_s, dc.stft_f_lo, dc.stft_f_hi, p);
          },
          truth, lin_grid(0.05, 0.95, 46));
    pred = detect_stft(amp, dc.window_s, dc.stft_f_lo, dc.stft_f_hi, thr);
  } else {
    const int win = static_cast<int>(std::lround(dc.window_s * ctx.cfg.rate));
    const int l_min = std::max(1, static_cast<int>(dc.nasc_lag_lo_s * ctx.cfg.rate));
    // cap lags at half the window: longer lags leave too few overlap
    // products for a stable autocorrelation estimate
    const int l_max = std::min(win / 2,
                               static_cast<int>(dc.nasc_lag_hi_s * ctx.cfg.rate));
    double thr = dc.nasc_threshold;
    if (thr < 0)
      thr = tune_threshold(
          [&](double p) {
            return detect_nasc(amp, dc.window_s, l_min, l_max, p);
          },
          truth, lin_grid(0.05, 0.95, 46));
    pred = detect_nasc(amp, dc.window_s, l_min, l_max, thr);
  }

  std::ofstream out(ctx.path("pred.csv"));
  out << "# " << ctx.stamp() << "\n";
  out << "t,label\n";
  for (std::size_t i = 0; i < pred.size(); ++i)
    out << format_double(static_cast<double>(i) / ctx.cfg.rate) << ","
        << pred[i] << "\n";
  write_metrics_json(ctx.path("metrics.json"), score(pred, truth), ctx.hash);
}

void stage_benchmark(const StageContext& ctx) {
  AmplitudeSeries amp = read_amplitude_csv(ctx.path("amp.csv"));
  amp.rate = ctx.cfg.rate;
  std::vector<int> truth = truth_for(ctx, amp.size());
  StatePosterior post = read_posterior_csv(ctx.path("posterior.csv"));
  auto rows = run_benchmark(amp, truth, post, ctx.cfg.detect);

  std::ofstream out(ctx.path("benchmark.csv"));
  out << "# " << ctx.stamp() << "\n";
  out << "method,param,sensitivity,specificity,balanced_accuracy,tp,fp,tn,fn\n";
  for (const auto& row : rows)
    out << row.method << "," << format_double(row.tuned_param) << ","
        << format_double(row.metrics.sensitivity) << ","
        << format_double(row.metrics.specificity) << ","
        << format_double(row.metrics.balanced_accuracy) << ","
        << row.metrics.tp << "," << row.metrics.fp << "," << row.metrics.tn
        << "," << row.metrics.fn << "\n";
}

void stage_report(const StageContext& ctx) {
  std::string summary = report(ctx.dir.string());
  std::ofstream out(ctx.path("summary.txt"));
  out << summary;
}

}  // namespace

std::vector<BenchmarkRow> run_benchmark(const AmplitudeSeries& amp,
                                        const std::vector<int>& truth,
                                        const StatePosterior& posterior,
                                        const DetectConfig& cfg) {
  std::vector<BenchmarkRow> rows;
  {
    BenchmarkRow row;
    row.method = "nb";
    NbModel model = train_nb(posterior, truth);
    row.metrics = score(predict_nb(model, posterior), truth);
    rows.push_back(row);
  }
  {
    BenchmarkRow row;
    row.method = "stddev";
    double mx = *std::max_element(amp.values.begin(), amp.values.end());
    row.tuned_param = tune_threshold(
        [&](double p) { return detect_stddev(amp, cfg.window_s, p); }, truth,
        log_grid(1e-3, std::max(mx, 1e-2), 50));
    row.metrics = score(detect_stddev(amp, cfg.window_s, row.tuned_param), truth);
    rows.push_back(row);
  }
  {
    BenchmarkRow row;
    row.method = "stft";
    row.tuned_param = tune_threshold(
        [&](double p) {
          return detect_stft(amp, cfg.window_s, cfg.stft_f_lo, cfg.stft_f_hi, p);
        },
        truth, lin_grid(0.05, 0.95, 46));
    row.metrics = score(
        detect_stft(amp, cfg.window_s, cfg.stft_f_lo, cfg.stft_f_hi,
                    row.tuned_param),
        truth);
    rows.push_back(row);
  }
  {
    BenchmarkRow row;
    row.method = "nasc";
    const int win = static_cast<int>(std::lround(cfg.window_s * amp.rate));
    const int l_min = std::max(1, static_cast<int>(cfg.nasc_lag_lo_s * amp.rate));
    // cap lags at half the window: longer lags leave too few overlap
    // products for a stable autocorrelation estimate
    const int l_max = std::min(win / 2,
                               static_cast<int>(cfg.nasc_lag_hi_s * amp.rate));
    row.tuned_param = tune_threshold(
        [&](double p) {
          return detect_nasc(amp, cfg.window_s, l_min, l_max, p);
        },
        truth, lin_grid(0.05, 0.95, 46));
    row.metrics = score(
        detect_nasc(amp, cfg.window_s, l_min, l_max, row.tuned_param), truth);
    rows.push_back(row);
  }
  return rows;
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  PipelineResult result;
  if (config.out_dir.empty()) {
    result.exit_code = 2;
    result.failed_stage = "config";
    return result;
  }
  StageContext ctx{config, fs::path(config.out_dir), config.hash()};
  std::error_code ec;
  fs::create_directories(ctx.dir, ec);
  if (ec) {
    result.exit_code = 2;
    result.failed_stage = "config";
    return result;
  }

  std::vector<std::string> stages = config.stages;
  if (stages.empty()) {
    if (config.input_csv.empty()) stages.push_back("simulate");
    stages.insert(stages.end(),
                  {"preprocess", "fit", "features", "detect", "benchmark",
                   "report"});
  }
  const std::vector<std::string> known = {"simulate", "preprocess", "fit",
                                          "features", "detect", "benchmark",
                                          "report"};
  for (const auto& s : stages)
    if (std::find(known.begin(), known.end(), s) == known.end()) {
      result.exit_code = 2;
      result.failed_stage = "config";
      return result;
    }

  for (const auto& stage : stages) {
    std::cerr << "[gaitseg] stage=" << stage << " config_hash=" << ctx.hash
              << " seed=" << config.seed << "\n";
    try {
      if (stage == "simulate") stage_simulate(ctx);
      else if (stage == "preprocess") stage_preprocess(ctx);
      else if (stage == "fit") stage_fit(ctx);
      else if (stage == "features") stage_features(ctx);
      else if (stage == "detect") stage_detect(ctx);
      else if (stage == "benchmark") stage_benchmark(ctx);
      else stage_report(ctx);
    } catch (const std::exception& e) {
      std::cerr << "[gaitseg] stage " << stage << " failed: " << e.what()
                << "\n";
      result.exit_code = 3;
      result.failed_stage = stage;
      return result;
    }
  }

  for (const char* name :
       {"data.csv", "labels.csv", "amp.csv", "snapshots.ndjson", "states.csv",
        "timeline.csv", "posterior.csv", "pred.csv", "metrics.json",
        "benchmark.csv", "summary.txt"})
    if (fs::exists(ctx.dir / name)) result.artifacts.push_back(name);
  return result;
}

std::string report(const std::string& artifact_dir) {
  fs::path dir(artifact_dir);
  if (!fs::exists(dir / "amp.csv") && !fs::exists(dir / "snapshots.ndjson") &&
      !fs::exists(dir / "benchmark.csv"))
    throw Error(ErrorCode::MissingArtifacts,
                "no pipeline artifacts in " + artifact_dir);

  std::ostringstream out;
  out << "gaitseg run report\n==================\n";
  if (fs::exists(dir / "amp.csv")) {
    AmplitudeSeries amp = read_amplitude_csv((dir / "amp.csv").string());
    out << "amplitude points: " << amp.size() << " at " << amp.rate << " Hz, "
        << amp.boundaries.size() << " segment(s)\n";
  }
  if (fs::exists(dir / "snapshots.ndjson")) {
    auto snaps = read_snapshots_ndjson((dir / "snapshots.ndjson").string());
    const auto& last = snaps.back();
    out << "sampler iterations: " << snaps.size()
        << ", final K+: " << last.sequence.k_active << "\n";

    // plot-ready per-state PSD
    std::ofstream psd((dir / "psd.csv").string());
    psd << "state,freq_hz,power\n";
    std::vector<double> freqs;
    for (double f = 0.1; f <= 10.0 + 1e-9; f += 0.1) freqs.push_back(f);
    for (int k = 0; k < last.sequence.k_active; ++k) {
      auto p = ar_psd(last.states[k], freqs, 30.0);
      for (std::size_t i = 0; i < freqs.size(); ++i)
        psd << (k + 1) << "," << format_double(freqs[i]) << ","
            << format_double(p[i]) << "\n";
    }
    out << "wrote psd.csv (" << last.sequence.k_active << " states)\n";
  }
  if (fs::exists(dir / "states.csv")) out << "feature table: states.csv\n";
  if (fs::exists(dir / "timeline.csv")) out << "feature timeline: timeline.csv\n";
  if (fs::exists(dir / "metrics.json")) {
    std::ifstream in((dir / "metrics.json").string());
    json j = json::parse(in);
    out << "detection: sensitivity=" << j["sensitivity"].get<double>()
        << " specificity=" << j["specificity"].get<double>()
        << " balanced_accuracy=" << j["balanced_accuracy"].get<double>()
        << "\n";
  }
  if (fs::exists(dir / "benchmark.csv")) {
    std::ifstream in((dir / "benchmark.csv").string());
    std::string line;
    out << "benchmark table:\n";
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      out << "  " << line << "\n";
    }
  }
  return out.str();
}

}  // namespace gaitseg
