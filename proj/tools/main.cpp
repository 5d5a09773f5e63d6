// gaitseg: unsupervised gait segmentation and detection for wrist-worn
// accelerometer streams. Subcommands cover each pipeline stage plus `run`
// for the whole thing. Exit codes: 0 ok, 2 config error, 3 stage failure.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "gaitseg/ingest.hpp"
#include "gaitseg/io.hpp"
#include "gaitseg/pipeline.hpp"

using namespace gaitseg;

namespace {

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::InvalidSpec:
      return 2;
    default:
      return 3;
  }
}

SamplerKind sampler_from(const std::string& s) {
  if (s == "direct") return SamplerKind::Direct;
  if (s == "blocked") return SamplerKind::Blocked;
  throw Error(ErrorCode::ConfigInvalid, "sampler must be direct or blocked");
}

DetectMethod method_from(const std::string& s) {
  if (s == "nb") return DetectMethod::Nb;
  if (s == "stddev") return DetectMethod::Stddev;
  if (s == "stft") return DetectMethod::Stft;
  if (s == "nasc") return DetectMethod::Nasc;
  throw Error(ErrorCode::ConfigInvalid, "unknown method " + s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gaitseg: switching-AR gait segmentation pipeline"};
  app.require_subcommand(1);

  // ---- simulate -------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "generate a synthetic recording");
  std::string sim_preset = "default3", sim_spec, sim_data = "data.csv",
              sim_labels = "labels.csv", sim_regimes, sim_amp;
  double sim_duration = 200.0;
  std::uint64_t sim_seed = 1;
  sim->add_option("--preset", sim_preset, "default3 or default4");
  sim->add_option("--spec", sim_spec, "JSON spec file (overrides preset)");
  sim->add_option("--duration", sim_duration, "seconds");
  sim->add_option("--seed", sim_seed);
  sim->add_option("--data", sim_data, "output accelerometer CSV");
  sim->add_option("--labels", sim_labels, "output gait-label CSV");
  sim->add_option("--regimes", sim_regimes, "optional regime-label CSV");
  sim->add_option("--amp", sim_amp, "optional ground-truth amplitude CSV");

  // ---- preprocess -----------------------------------------------------
  auto* pre = app.add_subcommand("preprocess",
                                 "resample, remove gravity, emit amplitude");
  std::string pre_in, pre_out = "amp.csv", pre_trend_prefix;
  double pre_lambda = -1.0, pre_rate = 30.0, pre_gap = 2.0;
  pre->add_option("--input", pre_in)->required();
  pre->add_option("--output", pre_out, "amplitude CSV (t,amp)");
  pre->add_option("--lambda", pre_lambda, "trend weight (<0: 50*T/30)");
  pre->add_option("--rate", pre_rate, "working rate Hz");
  pre->add_option("--gap-split-seconds", pre_gap);
  pre->add_option("--trend-prefix", pre_trend_prefix,
                  "write per-axis trend CSVs <prefix>axis{0,1,2}.csv");

  // ---- fit ------------------------------------------------------------
  auto* fit = app.add_subcommand("fit", "sample the switching-AR posterior");
  std::string fit_in, fit_out = "snapshots.ndjson", fit_sampler = "direct",
              fit_prior = "conjugate";
  FitConfig fit_cfg;
  std::uint64_t fit_seed = 1;
  double fit_rate = 30.0;
  fit->add_option("--input", fit_in)->required();
  fit->add_option("--output", fit_out, "snapshot NDJSON stream");
  fit->add_option("--order", fit_cfg.order);
  fit->add_option("--iters", fit_cfg.iters);
  fit->add_option("--burn-in", fit_cfg.burn_in);
  fit->add_option("--sampler", fit_sampler, "direct or blocked");
  fit->add_option("--trunc", fit_cfg.truncation, "blocked truncation L");
  fit->add_option("--kappa", fit_cfg.kappa);
  fit->add_option("--alpha", fit_cfg.alpha);
  fit->add_option("--gamma", fit_cfg.gamma);
  fit->add_option("--seed", fit_seed);
  fit->add_option("--prior", fit_prior, "conjugate or sparse");
  fit->add_option("--coeff-var", fit_cfg.coeff_var);
  fit->add_option("--rate", fit_rate);

  // ---- features -------------------------------------------------------
  auto* feat = app.add_subcommand("features",
                                  "per-state gait-cycle features + timeline");
  std::string feat_snaps, feat_states = "states.csv",
              feat_timeline = "timeline.csv", feat_posterior;
  int feat_burn = -1;
  double feat_window = 60.0, feat_lag_lo = 10.0, feat_lag_hi = -1.0,
         feat_rate = 30.0;
  feat->add_option("--snapshots", feat_snaps)->required();
  feat->add_option("--states", feat_states);
  feat->add_option("--timeline", feat_timeline);
  feat->add_option("--posterior", feat_posterior, "optional per-point CSV");
  feat->add_option("--burn-in", feat_burn, "<0: half the snapshots");
  feat->add_option("--window", feat_window, "timeline window seconds");
  feat->add_option("--lag-lo", feat_lag_lo);
  feat->add_option("--lag-hi", feat_lag_hi, "<0: model order");
  feat->add_option("--rate", feat_rate);

  // ---- detect ---------------------------------------------------------
  auto* det = app.add_subcommand("detect", "gait vs non-gait classification");
  std::string det_in, det_labels, det_method = "stddev", det_posterior,
              det_pred = "pred.csv", det_metrics = "metrics.json";
  DetectConfig det_cfg;
  double det_rate = 30.0;
  det->add_option("--input", det_in)->required();
  det->add_option("--labels", det_labels, "truth CSV (t,label)")->required();
  det->add_option("--method", det_method, "nb, stddev, stft, or nasc");
  det->add_option("--posterior", det_posterior, "state posterior CSV (nb)");
  det->add_option("--pred", det_pred);
  det->add_option("--metrics", det_metrics);
  det->add_option("--window", det_cfg.window_s);
  det->add_option("--stddev-threshold", det_cfg.stddev_threshold);
  det->add_option("--stft-f-lo", det_cfg.stft_f_lo);
  det->add_option("--stft-f-hi", det_cfg.stft_f_hi);
  det->add_option("--stft-ratio", det_cfg.stft_ratio);
  det->add_option("--nasc-threshold", det_cfg.nasc_threshold);
  det->add_option("--nasc-lag-lo", det_cfg.nasc_lag_lo_s, "seconds");
  det->add_option("--nasc-lag-hi", det_cfg.nasc_lag_hi_s, "seconds");
  det->add_option("--rate", det_rate);

  // ---- benchmark ------------------------------------------------------
  auto* bench = app.add_subcommand("benchmark",
                                   "all four detectors on one labeled corpus");
  std::string bench_in, bench_labels, bench_posterior,
      bench_out = "benchmark.csv";
  DetectConfig bench_cfg;
  double bench_rate = 30.0;
  bench->add_option("--input", bench_in)->required();
  bench->add_option("--labels", bench_labels)->required();
  bench->add_option("--posterior", bench_posterior)->required();
  bench->add_option("--output", bench_out);
  bench->add_option("--window", bench_cfg.window_s);
  bench->add_option("--rate", bench_rate);

  // ---- report ---------------------------------------------------------
  auto* rep = app.add_subcommand("report", "summarize an artifact directory");
  std::string rep_dir;
  rep->add_option("--dir", rep_dir)->required();

  // ---- run ------------------------------------------------------------
  auto* run = app.add_subcommand("run", "full pipeline from a JSON config");
  std::string run_config, run_out_dir, run_input, run_labels;
  std::int64_t run_seed = -1;
  run->add_option("--config", run_config, "JSON config file");
  run->add_option("--out-dir", run_out_dir, "overrides config");
  run->add_option("--seed", run_seed, "overrides config");
  run->add_option("--input", run_input, "overrides config input_csv");
  run->add_option("--labels", run_labels, "overrides config labels_csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      SynthSpec spec;
      if (!sim_spec.empty()) {
        spec = load_synth_spec_json(sim_spec, sim_seed);
      } else if (sim_preset == "default3") {
        spec = default3_spec(sim_seed, sim_duration);
      } else if (sim_preset == "default4") {
        spec = default4_spec(sim_seed, sim_duration);
      } else {
        throw Error(ErrorCode::ConfigInvalid, "unknown preset " + sim_preset);
      }
      SynthOutput out = generate(spec);
      write_recording_csv(sim_data, out.recording, "seed=" + std::to_string(sim_seed));
      write_labels_csv(sim_labels, {out.grid_times, out.gait_labels},
                       "seed=" + std::to_string(sim_seed));
      if (!sim_regimes.empty())
        write_labels_csv(sim_regimes, {out.grid_times, out.regime_labels});
      if (!sim_amp.empty()) write_amplitude_csv(sim_amp, out.amplitude);
      return 0;
    }

    if (*pre) {
      RawRecording rec = read_recording_csv(pre_in);
      auto segments = ingest_recording(rec, pre_rate, pre_gap);
      AmplitudeSeries amp;
      amp.rate = pre_rate;
      amp.origin = pre_in;
      int axis_idx = 0;
      for (const auto& seg : segments) {
        const double lambda = pre_lambda >= 0
                                  ? pre_lambda
                                  : default_trend_lambda(seg.size(), pre_rate);
        auto res = dynamic_amplitude(seg, lambda);
        amp.boundaries.push_back(amp.values.size());
        amp.values.insert(amp.values.end(), res.amplitude.values.begin(),
                          res.amplitude.values.end());
        if (!pre_trend_prefix.empty() && axis_idx == 0) {
          for (int c = 0; c < 3; ++c) {
            std::ofstream tf(pre_trend_prefix + "axis" + std::to_string(c) +
                             ".csv");
            tf << "t,trend\n";
            for (std::size_t i = 0; i < res.trends[c].trend.size(); ++i)
              tf << format_double(static_cast<double>(i) / pre_rate) << ","
                 << format_double(res.trends[c].trend[i]) << "\n";
          }
        }
        ++axis_idx;
      }
      write_amplitude_csv(pre_out, amp);
      return 0;
    }

    if (*fit) {
      AmplitudeSeries amp = read_amplitude_csv(fit_in);
      amp.rate = fit_rate;
      HdpHyper hyper;
      hyper.gamma = fit_cfg.gamma;
      hyper.alpha = fit_cfg.alpha;
      hyper.kappa = fit_cfg.kappa;
      hyper.order = fit_cfg.order;
      hyper.truncation = fit_cfg.truncation;
      hyper.ar_prior = fit_prior == "sparse"
                           ? ArPrior::sparse_ard(fit_cfg.order, fit_cfg.coeff_var)
                           : ArPrior::conjugate(fit_cfg.order, fit_cfg.coeff_var);
      Rng rng = Rng(fit_seed).split("fit");
      std::ofstream os(fit_out);
      if (!os) throw Error(ErrorCode::IoError, "cannot write " + fit_out);
      auto sink = [&](const ModelSnapshot& s) { write_snapshot_ndjson_line(os, s); };
      if (sampler_from(fit_sampler) == SamplerKind::Direct)
        gibbs_direct_assignment(amp, hyper, fit_cfg.iters, rng, sink);
      else
        gibbs_blocked_weak_limit(amp, hyper, fit_cfg.iters, rng, sink);
      return 0;
    }

    if (*feat) {
      auto snaps = read_snapshots_ndjson(feat_snaps);
      const int burn = feat_burn >= 0
                           ? feat_burn
                           : static_cast<int>(snaps.size()) / 2;
      StatePosterior post = state_posterior(snaps, burn);
      const int order = snaps.back().hyper.order;
      LagRange lr{feat_lag_lo, feat_lag_hi > 0 ? feat_lag_hi
                                               : static_cast<double>(order)};
      auto feats = per_state_features(snaps.back(), lr, feat_rate);
      std::ofstream sf(feat_states);
      sf << "state,a,b,c,d,cycle_time_s,support,rss\n";
      for (std::size_t k = 0; k < feats.size(); ++k)
        sf << (k + 1) << "," << format_double(feats[k].a) << ","
           << format_double(feats[k].b) << "," << format_double(feats[k].c)
           << "," << format_double(feats[k].d) << ","
           << format_double(feats[k].cycle_time_s) << ","
           << format_double(feats[k].support) << ","
           << format_double(feats[k].fit_rss) << "\n";
      auto timeline = feature_timeline(snaps, post, feat_window, feat_rate, lr);
      std::ofstream tf(feat_timeline);
      tf << "t,c,support,b\n";
      for (const auto& row : timeline) {
        if (row.empty) {
          tf << format_double(row.window_start_s) << ",,,\n";
          continue;
        }
        tf << format_double(row.window_start_s) << "," << format_double(row.c)
           << "," << format_double(row.support) << "," << format_double(row.b)
           << "\n";
      }
      if (!feat_posterior.empty()) {
        std::ofstream po(feat_posterior);
        po << "t";
        for (std::size_t k = 0; k < post.num_states(); ++k) po << ",p" << (k + 1);
        po << "\n";
        for (std::size_t t = 0; t < post.probs.size(); ++t) {
          po << format_double(static_cast<double>(t) / feat_rate);
          for (double p : post.probs[t]) po << "," << format_double(p);
          po << "\n";
        }
      }
      return 0;
    }

    if (*det || *bench) {
      const bool is_bench = static_cast<bool>(*bench);
      const std::string in = is_bench ? bench_in : det_in;
      const std::string labels_path = is_bench ? bench_labels : det_labels;
      const double rate = is_bench ? bench_rate : det_rate;
      AmplitudeSeries amp = read_amplitude_csv(in);
      amp.rate = rate;
      LabelSeries ls = read_labels_csv(labels_path);
      std::vector<double> grid(amp.size());
      for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = static_cast<double>(i) / rate;
      std::vector<int> truth = align_labels(ls, grid);

      auto read_post = [](const std::string& path) {
        StatePosterior post;
        std::ifstream pin(path);
        if (!pin) throw Error(ErrorCode::MissingArtifacts, "missing " + path);
        std::string line;
        bool header = false;
        while (std::getline(pin, line)) {
          if (line.empty() || line[0] == '#') continue;
          if (!header) { header = true; continue; }
          std::vector<double> row;
          std::size_t pos = line.find(',');
          while (pos != std::string::npos) {
            std::size_t next = line.find(',', pos + 1);
            row.push_back(std::stod(line.substr(pos + 1, next - pos - 1)));
            pos = next;
          }
          post.probs.push_back(std::move(row));
        }
        return post;
      };

      if (is_bench) {
        StatePosterior post = read_post(bench_posterior);
        auto rows = run_benchmark(amp, truth, post, bench_cfg);
        std::ofstream out(bench_out);
        out << "method,param,sensitivity,specificity,balanced_accuracy,tp,fp,tn,fn\n";
        std::cout << "method      sens    spec    bal_acc\n";
        for (const auto& r : rows) {
          out << r.method << "," << format_double(r.tuned_param) << ","
              << format_double(r.metrics.sensitivity) << ","
              << format_double(r.metrics.specificity) << ","
              << format_double(r.metrics.balanced_accuracy) << ","
              << r.metrics.tp << "," << r.metrics.fp << "," << r.metrics.tn
              << "," << r.metrics.fn << "\n";
          std::printf("%-10s %6.3f  %6.3f  %6.3f\n", r.method.c_str(),
                      r.metrics.sensitivity, r.metrics.specificity,
                      r.metrics.balanced_accuracy);
        }
        return 0;
      }

      std::vector<int> pred;
      const DetectMethod method = method_from(det_method);
      if (method == DetectMethod::Nb) {
        if (det_posterior.empty())
          throw Error(ErrorCode::ConfigInvalid, "nb requires --posterior");
        StatePosterior post = read_post(det_posterior);
        pred = predict_nb(train_nb(post, truth), post);
      } else if (method == DetectMethod::Stddev) {
        double thr = det_cfg.stddev_threshold;
        if (thr < 0) {
          std::vector<double> grid_v(50);
          double mx = *std::max_element(amp.values.begin(), amp.values.end());
          for (int i = 0; i < 50; ++i)
            grid_v[i] = 1e-3 * std::pow(std::max(mx, 1e-2) / 1e-3, i / 49.0);
          thr = tune_threshold(
              [&](double p) { return detect_stddev(amp, det_cfg.window_s, p); },
              truth, grid_v);
        }
        pred = detect_stddev(amp, det_cfg.window_s, thr);
      } else if (method == DetectMethod::Stft) {
        double thr = det_cfg.stft_ratio;
        if (thr < 0) {
          std::vector<double> grid_v(46);
          for (int i = 0; i < 46; ++i) grid_v[i] = 0.05 + 0.02 * i;
          thr = tune_threshold(
              [&](double p) {
                return detect_stft(amp, det_cfg.window_s, det_cfg.stft_f_lo,
                                   det_cfg.stft_f_hi, p);
              },
              truth, grid_v);
        }
        pred = detect_stft(amp, det_cfg.window_s, det_cfg.stft_f_lo,
                           det_cfg.stft_f_hi, thr);
      } else {
        const int win = static_cast<int>(std::lround(det_cfg.window_s * rate));
        const int l_min = std::max(1, static_cast<int>(det_cfg.nasc_lag_lo_s * rate));
        // cap lags at half the window: longer lags leave too few overlap
        // products for a stable autocorrelation estimate
        const int l_max = std::min(win / 2,
                                   static_cast<int>(det_cfg.nasc_lag_hi_s * rate));
        double thr = det_cfg.nasc_threshold;
        if (thr < 0) {
          std::vector<double> grid_v(46);
          for (int i = 0; i < 46; ++i) grid_v[i] = 0.05 + 0.02 * i;
          thr = tune_threshold(
              [&](double p) {
                return detect_nasc(amp, det_cfg.window_s, l_min, l_max, p);
              },
              truth, grid_v);
        }
        pred = detect_nasc(amp, det_cfg.window_s, l_min, l_max, thr);
      }
      std::ofstream pf(det_pred);
      pf << "t,label\n";
      for (std::size_t i = 0; i < pred.size(); ++i)
        pf << format_double(grid[i]) << "," << pred[i] << "\n";
      ConfusionMetrics m = score(pred, truth);
      std::ofstream mf(det_metrics);
      mf << "{\n  \"sensitivity\": " << format_double(m.sensitivity)
         << ",\n  \"specificity\": " << format_double(m.specificity)
         << ",\n  \"balanced_accuracy\": " << format_double(m.balanced_accuracy)
         << ",\n  \"tp\": " << m.tp << ",\n  \"fp\": " << m.fp
         << ",\n  \"tn\": " << m.tn << ",\n  \"fn\": " << m.fn << "\n}\n";
      std::cout << "sensitivity=" << m.sensitivity
                << " specificity=" << m.specificity
                << " balanced_accuracy=" << m.balanced_accuracy << "\n";
      return 0;
    }

    if (*rep) {
      std::cout << report(rep_dir);
      return 0;
    }

    if (*run) {
      PipelineConfig cfg = run_config.empty()
                               ? PipelineConfig{}
                               : PipelineConfig::from_json_file(run_config);
      if (!run_out_dir.empty()) cfg.out_dir = run_out_dir;
      if (run_seed >= 0) cfg.seed = static_cast<std::uint64_t>(run_seed);
      if (!run_input.empty()) cfg.input_csv = run_input;
      if (!run_labels.empty()) cfg.labels_csv = run_labels;
      if (cfg.out_dir.empty())
        throw Error(ErrorCode::ConfigInvalid, "out_dir required");
      PipelineResult res = run_pipeline(cfg);
      if (res.exit_code != 0)
        std::cerr << "pipeline failed at stage " << res.failed_stage << "\n";
      return res.exit_code;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
