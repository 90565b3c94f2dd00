// stcf: simulate, calibrate, and analyze correlated-pair detection runs.

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stcf/coincidence.hpp"
#include "stcf/event_io.hpp"
#include "stcf/geometry.hpp"
#include "stcf/json_io.hpp"
#include "stcf/pipeline.hpp"
#include "stcf/roc.hpp"
#include "stcf/simulate.hpp"
#include "stcf/stats.hpp"
#include "stcf/theory.hpp"
#include "stcf/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::optional<uint64_t> seed;
  int threads = 1;
  std::string out_dir = "out";
};

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct Manifest {
  json j;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  Manifest(const std::string& command, const GlobalOpts& g,
           const stcf::AppConfig& cfg) {
    j["tool_version"] = stcf::kVersion;
    j["command"] = command;
    j["config_digest"] = stcf::config_digest(cfg);
    j["seed"] = cfg.source.seed;
    j["threads"] = g.threads;
    j["config_path"] = g.config_path;
    j["inputs"] = json::array();
    j["outputs"] = json::array();
    j["metrics"] = json::object();
  }
  void input(const std::string& p) { j["inputs"].push_back(p); }
  void output(const std::string& p) { j["outputs"].push_back(p); }
  void metric(const std::string& k, const json& v) { j["metrics"][k] = v; }
  void write(const fs::path& out_dir) {
    auto dt = std::chrono::steady_clock::now() - t0;
    j["wall_time_s"] =
        std::chrono::duration_cast<std::chrono::duration<double>>(dt).count();
    stcf::write_text_file((out_dir / "manifest.json").string(), j.dump(2) + "\n");
  }
};

stcf::AppConfig load_config(GlobalOpts& g) {
  stcf::AppConfig cfg;
  if (!g.config_path.empty())
    cfg = stcf::parse_config(stcf::read_text_file(g.config_path));
  if (g.seed) cfg.source.seed = *g.seed;
  return cfg;
}

fs::path ensure_outdir(const GlobalOpts& g) {
  fs::path p(g.out_dir);
  fs::create_directories(p);
  return p;
}

// Events -> photon events -> (signal, herald) streams.
struct ArmStreams {
  std::vector<stcf::PhotonEvent> signal;
  std::vector<stcf::PhotonEvent> herald;
};

ArmStreams split_arms(std::vector<stcf::PhotonEvent> events) {
  ArmStreams s;
  for (const stcf::PhotonEvent& e : events) {
    if (e.arm == stcf::Arm::Signal)
      s.signal.push_back(e);
    else if (e.arm == stcf::Arm::Herald)
      s.herald.push_back(e);
  }
  return s;
}

stcf::TimewalkTable load_timewalk(const std::string& path,
                                  const stcf::PipelineParams& p) {
  if (path.empty()) return stcf::TimewalkTable::identity(p);
  return stcf::TimewalkTable::from_json_string(stcf::read_text_file(path));
}

double infer_duration_s(const stcf::EventFile& ev) {
  if (ev.hits.empty()) return 1.0;
  return std::ceil(static_cast<double>(ev.hits.back().toa_ps) * 1e-12);
}

void write_histogram_csv(const stcf::Histogram& h, const fs::path& path) {
  std::string text = "bin_center_ns,count\n";
  for (size_t i = 0; i < h.counts.size(); ++i) {
    text += fmt_double(h.bin_center(static_cast<int>(i)));
    text += ',';
    text += std::to_string(h.counts[i]);
    text += '\n';
  }
  stcf::write_text_file(path.string(), text);
}

void write_joint_csv(const stcf::JointSpectrum& js, const fs::path& path) {
  std::string text = "signal_col,herald_col,count\n";
  for (int i = 0; i < stcf::kGridSize; ++i)
    for (int j2 = 0; j2 < stcf::kGridSize; ++j2) {
      uint64_t c = js.at(i, j2);
      if (c == 0) continue;  // sparse: zero cells omitted
      text += std::to_string(i);
      text += ',';
      text += std::to_string(j2);
      text += ',';
      text += std::to_string(c);
      text += '\n';
    }
  stcf::write_text_file(path.string(), text);
}

json result_to_json(const stcf::CoincidenceResult& r) {
  json j;
  j["mode"] = r.mode.spectral ? "ts" : "t";
  if (r.mode.spectral) j["w_px"] = r.mode.w_px;
  j["duration_s"] = r.duration_s;
  j["peak_ns"] = r.peak_ns;
  j["c_tot"] = r.c_tot;
  j["c_b"] = r.c_b;
  j["sbr"] = r.sbr;
  j["sbr_sigma"] = r.sbr_sigma;
  j["snr"] = r.snr;
  j["snr_sigma"] = r.snr_sigma;
  return j;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const GlobalOpts& g, const stcf::AppConfig& cfg0,
                 std::optional<double> duration, bool ideal, bool csv,
                 bool truth_full) {
  stcf::AppConfig cfg = cfg0;
  if (duration) cfg.source.duration_s = *duration;
  fs::path out = ensure_outdir(g);
  Manifest man("simulate", g, cfg);

  stcf::SimOutput sim = ideal
      ? stcf::simulate_ideal_full(cfg.source, cfg.spectrometer)
      : stcf::simulate_full(cfg.source, cfg.intensifier, cfg.spectrometer);

  stcf::EventFile file;
  file.config_digest = stcf::config_digest(cfg);
  file.hits = std::move(sim.hits);

  fs::path events_path = out / "events.bin";
  stcf::write_events(file, events_path.string());
  man.output(events_path.string());
  if (csv) {
    fs::path csv_path = out / "events.csv";
    stcf::write_events_csv(file, csv_path.string());
    man.output(csv_path.string());
  }

  uint64_t by_origin[4] = {0, 0, 0, 0};
  uint64_t pairs_both = 0;
  for (const stcf::Detection& d : sim.detections) {
    by_origin[static_cast<int>(d.origin)] += 1;
    if (d.origin == stcf::Origin::Pair && d.pair_id != 0 &&
        d.arm == stcf::Arm::Signal)
      pairs_both += 1;
  }
  json truth;
  truth["duration_s"] = cfg.source.duration_s;
  truth["seed"] = cfg.source.seed;
  truth["ideal"] = ideal;
  truth["n_hits"] = file.hits.size();
  truth["n_detections"] = sim.detections.size();
  truth["detections_by_origin"] = {{"pair", by_origin[0]},
                                   {"herald_only", by_origin[1]},
                                   {"signal_only", by_origin[2]},
                                   {"background", by_origin[3]}};
  truth["pairs_both_detected"] = pairs_both;
  if (truth_full) {
    json arr = json::array();
    for (const stcf::Detection& d : sim.detections) {
      arr.push_back({{"t_true_s", d.t_true_s},
                     {"t_det_s", d.t_det_s},
                     {"col", d.col},
                     {"row", d.row},
                     {"arm", static_cast<int>(d.arm)},
                     {"origin", static_cast<int>(d.origin)},
                     {"pair_id", d.pair_id}});
    }
    truth["detections"] = std::move(arr);
  }
  fs::path truth_path = out / "truth.json";
  stcf::write_text_file(truth_path.string(), truth.dump(2) + "\n");
  man.output(truth_path.string());

  man.metric("n_hits", file.hits.size());
  man.metric("n_detections", sim.detections.size());
  man.write(out);
  std::printf("simulate: %zu hits from %zu detections -> %s\n",
              file.hits.size(), sim.detections.size(),
              events_path.string().c_str());
  return 0;
}

int cmd_calibrate(const GlobalOpts& g, const stcf::AppConfig& cfg,
                  const std::string& events_path) {
  fs::path out = ensure_outdir(g);
  Manifest man("calibrate", g, cfg);
  man.input(events_path);

  stcf::EventFile ev = stcf::read_events(events_path);
  std::vector<stcf::Cluster> clusters =
      stcf::cluster(ev.hits, cfg.pipeline, g.threads);
  stcf::TimewalkTable table = stcf::calibrate_timewalk(clusters, cfg.pipeline);

  fs::path table_path = out / "timewalk.json";
  stcf::write_text_file(table_path.string(), table.to_json_string() + "\n");
  man.output(table_path.string());
  man.metric("n_clusters", clusters.size());
  man.metric("reference_bin", table.reference_bin());
  man.write(out);
  std::printf("calibrate: %zu clusters -> %s (reference bin %d)\n",
              clusters.size(), table_path.string().c_str(),
              table.reference_bin());
  return 0;
}

int cmd_analyze(const GlobalOpts& g, const stcf::AppConfig& cfg,
                const std::string& events_path, const std::string& mode_str,
                std::optional<double> w, std::optional<double> t_acq,
                const std::string& timewalk_path) {
  stcf::AnalysisMode mode = stcf::AnalysisMode::temporal();
  if (mode_str == "ts") {
    mode = stcf::AnalysisMode::temporal_spectral(w ? *w : cfg.theory.w_px);
  } else if (mode_str != "t") {
    throw CLI::ValidationError("--mode", "must be t or ts");
  }

  fs::path out = ensure_outdir(g);
  Manifest man("analyze", g, cfg);
  man.input(events_path);

  stcf::EventFile ev = stcf::read_events(events_path);
  if (ev.config_digest != 0 && ev.config_digest != stcf::config_digest(cfg))
    std::fprintf(stderr,
                 "warning: event file was produced with a different config\n");

  stcf::TimewalkTable table = load_timewalk(timewalk_path, cfg.pipeline);
  if (!timewalk_path.empty()) man.input(timewalk_path);

  std::vector<stcf::PhotonEvent> events = stcf::process_hits(
      ev.hits, table, cfg.spectrometer, cfg.pipeline, g.threads);
  ArmStreams arms = split_arms(std::move(events));
  double duration = t_acq ? *t_acq : infer_duration_s(ev);

  stcf::CoincidenceResult res =
      stcf::analyze(arms.signal, arms.herald, cfg.spectrometer, mode, duration);

  fs::path res_path = out / "result.json";
  stcf::write_text_file(res_path.string(), result_to_json(res).dump(2) + "\n");
  fs::path hist_path = out / "histogram.csv";
  write_histogram_csv(res.histogram, hist_path);
  fs::path joint_path = out / "joint.csv";
  write_joint_csv(res.joint, joint_path);
  man.output(res_path.string());
  man.output(hist_path.string());
  man.output(joint_path.string());
  man.metric("sbr", res.sbr);
  man.metric("snr", res.snr);
  man.metric("c_tot", res.c_tot);
  man.metric("c_b", res.c_b);
  man.metric("peak_ns", res.peak_ns);
  man.write(out);
  std::printf("analyze(%s): SBR %.4g +- %.2g, SNR %.4g +- %.2g (peak %.4g ns)\n",
              mode_str.c_str(), res.sbr, res.sbr_sigma, res.snr, res.snr_sigma,
              res.peak_ns);
  return 0;
}

int cmd_sweep_w(const GlobalOpts& g, const stcf::AppConfig& cfg, int w_min,
                int w_max, bool exact_nprime) {
  fs::path out = ensure_outdir(g);
  Manifest man("sweep-w", g, cfg);

  auto nprime = exact_nprime ? stcf::n_prime_exact(cfg.spectrometer)
                             : stcf::n_prime_approx(cfg.spectrometer);
  std::vector<stcf::WidthPoint> scan;
  int best = stcf::optimal_width(cfg.theory, w_min, w_max, nprime, &scan);

  std::string text = "w,eta,e_sbr,e_snr\n";
  for (const stcf::WidthPoint& pt : scan) {
    text += std::to_string(pt.w);
    text += ',';
    text += fmt_double(pt.eta);
    text += ',';
    text += fmt_double(pt.e_sbr);
    text += ',';
    text += fmt_double(pt.e_snr);
    text += '\n';
  }
  fs::path csv_path = out / "sweep_w.csv";
  stcf::write_text_file(csv_path.string(), text);
  man.output(csv_path.string());
  man.metric("optimal_w", best);
  man.write(out);
  std::printf("sweep-w: optimal w = %d\n", best);
  return 0;
}

int cmd_snr_vs_t(const GlobalOpts& g, const stcf::AppConfig& cfg,
                 std::optional<double> w, const std::vector<double>& t_list) {
  fs::path out = ensure_outdir(g);
  Manifest man("snr-vs-t", g, cfg);

  std::string text = "t_s,snr_t,snr_ts,ratio\n";
  for (double t : t_list) {
    stcf::TheoryParams p = cfg.theory;
    p.t_acq_s = t;
    if (w) p.w_px = *w;
    stcf::RatePair rt = stcf::sbr_snr_t(p);
    stcf::RatePair rts = stcf::sbr_snr_ts(p);
    text += fmt_double(t);
    text += ',';
    text += fmt_double(rt.snr);
    text += ',';
    text += fmt_double(rts.snr);
    text += ',';
    text += fmt_double(rt.snr > 0 ? rts.snr / rt.snr : 0.0);
    text += '\n';
  }
  fs::path csv_path = out / "snr_vs_t.csv";
  stcf::write_text_file(csv_path.string(), text);
  man.output(csv_path.string());
  man.write(out);
  std::printf("snr-vs-t: %zu rows -> %s\n", t_list.size(),
              csv_path.string().c_str());
  return 0;
}

void write_roc_csv(const stcf::RocCurve& curve, const fs::path& path) {
  std::string text = "threshold,p_d,p_d_sigma,p_fa,p_fa_sigma\n";
  for (const stcf::RocPoint& pt : curve.points) {
    text += std::to_string(pt.threshold);
    text += ',';
    text += fmt_double(pt.p_d);
    text += ',';
    text += fmt_double(pt.p_d_sigma);
    text += ',';
    text += fmt_double(pt.p_fa);
    text += ',';
    text += fmt_double(pt.p_fa_sigma);
    text += '\n';
  }
  stcf::write_text_file(path.string(), text);
}

int cmd_roc(const GlobalOpts& g, const stcf::AppConfig& cfg,
            const std::string& events_path, const std::string& mode_str,
            std::optional<double> w, double segment_s, double false_center_ns,
            double target_pfa, const std::string& timewalk_path) {
  bool spectral = mode_str == "ts";
  if (!spectral && mode_str != "t")
    throw CLI::ValidationError("--mode", "must be t or ts");
  double w_px = w ? *w : cfg.theory.w_px;

  fs::path out = ensure_outdir(g);
  Manifest man("roc", g, cfg);
  json summary;

  // model curve from the closed-form rates
  double eta = spectral ? stcf::eta(w_px, cfg.theory.alpha_px) : 1.0;
  double n_cells = spectral
      ? stcf::band_cell_count(w_px, cfg.spectrometer)
      : static_cast<double>(cfg.spectrometer.n_total);
  double lambda_sig =
      eta * cfg.theory.pair_coincidence_rate * segment_s;
  double lambda_bg = n_cells * cfg.theory.tau_s *
                     cfg.theory.singles_rate_signal *
                     cfg.theory.singles_rate_herald * segment_s;
  int k_max = static_cast<int>(
      std::ceil(lambda_sig + lambda_bg + 10 * std::sqrt(lambda_sig + lambda_bg + 1)));
  stcf::RocCurve model = stcf::model_roc(lambda_sig, lambda_bg, k_max);
  fs::path model_path = out / "roc_model.csv";
  write_roc_csv(model, model_path);
  man.output(model_path.string());
  stcf::RocPoint op_model = stcf::operating_point(model, target_pfa);
  summary["model"] = {{"lambda_sig", lambda_sig},
                      {"lambda_bg", lambda_bg},
                      {"operating_threshold", op_model.threshold},
                      {"operating_p_fa", op_model.p_fa},
                      {"operating_p_d", op_model.p_d}};

  if (!events_path.empty()) {
    man.input(events_path);
    stcf::EventFile ev = stcf::read_events(events_path);
    stcf::TimewalkTable table = load_timewalk(timewalk_path, cfg.pipeline);
    if (!timewalk_path.empty()) man.input(timewalk_path);
    std::vector<stcf::PhotonEvent> events = stcf::process_hits(
        ev.hits, table, cfg.spectrometer, cfg.pipeline, g.threads);
    ArmStreams arms = split_arms(std::move(events));
    std::vector<stcf::Match> matches =
        stcf::match_coincidences(arms.signal, arms.herald);
    if (spectral) {
      std::vector<stcf::Match> f;
      f.reserve(matches.size());
      for (const stcf::Match& m : matches) {
        double e = stcf::expected_signal_column(m.her_col, cfg.spectrometer);
        if (std::abs(m.sig_col - e) <= w_px * 0.5) f.push_back(m);
      }
      matches.swap(f);
    }
    double duration = infer_duration_s(ev);
    stcf::RocCurve emp = stcf::empirical_roc(matches, cfg.spectrometer,
                                             duration, segment_s,
                                             false_center_ns);
    fs::path emp_path = out / "roc_empirical.csv";
    write_roc_csv(emp, emp_path);
    man.output(emp_path.string());
    stcf::RocPoint op_emp = stcf::operating_point(emp, target_pfa);
    summary["empirical"] = {{"n_segments", emp.n_segments},
                            {"operating_threshold", op_emp.threshold},
                            {"operating_p_fa", op_emp.p_fa},
                            {"operating_p_d", op_emp.p_d}};
  }

  fs::path sum_path = out / "roc_summary.json";
  stcf::write_text_file(sum_path.string(), summary.dump(2) + "\n");
  man.output(sum_path.string());
  man.metric("model_operating_p_d", op_model.p_d);
  man.write(out);
  std::printf("roc: model operating point k=%d, P_fa=%.4g, P_d=%.4g\n",
              op_model.threshold, op_model.p_fa, op_model.p_d);
  return 0;
}

int cmd_theory(const GlobalOpts& g, const stcf::AppConfig& cfg,
               std::optional<double> w, std::optional<double> t_acq) {
  stcf::TheoryParams p = cfg.theory;
  if (w) p.w_px = *w;
  if (t_acq) p.t_acq_s = *t_acq;

  stcf::RatePair rt = stcf::sbr_snr_t(p);
  stcf::RatePair rts = stcf::sbr_snr_ts(p);
  stcf::Enhancements en = stcf::enhancements(p);
  stcf::ClassicalComparison cc = stcf::classical_comparison(p);

  json j;
  j["eta"] = stcf::eta(p.w_px, p.alpha_px);
  j["sbr_t"] = rt.sbr;
  j["snr_t"] = rt.snr;
  j["sbr_ts"] = rts.sbr;
  j["snr_ts"] = rts.snr;
  j["e_sbr"] = en.e_sbr;
  j["e_snr"] = en.e_snr;
  j["dat_reduction"] = en.dat_reduction;
  j["spectral_modes"] = stcf::spectral_modes(p.w_px);
  j["classical"] = {
      {"sbr_c", cc.degenerate ? json("inf") : json(cc.sbr_c)},
      {"snr_c", cc.snr_c},
      {"sbr_q", cc.sbr_q},
      {"snr_q", cc.snr_q},
      {"sbr_ratio", cc.sbr_ratio},
      {"snr_ratio", cc.snr_ratio},
      {"sbr_ratio_approx", cc.sbr_ratio_approx},
      {"snr_ratio_approx", cc.snr_ratio_approx},
  };

  std::string text = j.dump(2) + "\n";
  std::fputs(text.c_str(), stdout);
  fs::path out = ensure_outdir(g);
  Manifest man("theory", g, cfg);
  fs::path jpath = out / "theory.json";
  stcf::write_text_file(jpath.string(), text);
  man.output(jpath.string());
  man.metric("e_snr", en.e_snr);
  man.write(out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"correlated-pair target detection: simulation and analysis"};
  app.set_version_flag("--version", stcf::kVersion);
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "JSON configuration file");
  uint64_t seed_val = 0;
  CLI::Option* seed_opt =
      app.add_option("--seed", seed_val, "override the configured seed");
  app.add_option("--threads", g.threads, "analysis worker threads")
      ->check(CLI::Range(1, 64));
  app.add_option("--out", g.out_dir, "output directory");

  // Let --seed/--out/etc. appear after the subcommand name too.
  auto add_subcommand = [&app](const char* name, const char* desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->fallthrough();
    return sub;
  };

  // simulate
  CLI::App* sim = add_subcommand("simulate", "generate a raw event file");
  std::optional<double> sim_duration;
  bool sim_ideal = false, sim_csv = false, sim_truth_full = false;
  sim->add_option("--duration", sim_duration, "run length in seconds");
  sim->add_flag("--ideal", sim_ideal, "one hit per photon, no time walk");
  sim->add_flag("--csv", sim_csv, "also write events.csv");
  sim->add_flag("--truth-full", sim_truth_full,
                "include every detection in truth.json");

  // calibrate
  CLI::App* cal = add_subcommand("calibrate",
                                     "build a time-walk table from events");
  std::string cal_events;
  cal->add_option("--events", cal_events, "event file")->required();

  // analyze
  CLI::App* ana = add_subcommand("analyze", "coincidence analysis");
  std::string ana_events, ana_mode = "t", ana_timewalk;
  std::optional<double> ana_w, ana_t;
  ana->add_option("--events", ana_events, "event file")->required();
  ana->add_option("--mode", ana_mode, "t (temporal) or ts (spectro-temporal)");
  CLI::Option* ana_w_opt =
      ana->add_option("--w", ana_w, "selection band width, pixels");
  ana->add_option("--T", ana_t, "acquisition time override, seconds");
  ana->add_option("--timewalk", ana_timewalk, "time-walk table JSON");

  // sweep-w
  CLI::App* swp = add_subcommand("sweep-w", "enhancement vs band width");
  int swp_min = 1, swp_max = 40;
  bool swp_exact = false;
  swp->add_option("--w-min", swp_min, "first width");
  swp->add_option("--w-max", swp_max, "last width");
  swp->add_flag("--exact-nprime", swp_exact,
                "count band cells exactly instead of l*w");

  // snr-vs-t
  CLI::App* svt = add_subcommand("snr-vs-t", "SNR vs acquisition time");
  std::optional<double> svt_w;
  std::vector<double> svt_t = {12.5, 25, 50, 100, 200};
  svt->add_option("--w", svt_w, "selection band width, pixels");
  svt->add_option("--t-list", svt_t, "acquisition times, seconds");

  // roc
  CLI::App* roc = add_subcommand("roc", "detection ROC curves");
  std::string roc_events, roc_mode = "ts", roc_timewalk;
  std::optional<double> roc_w;
  double roc_segment = 0.5, roc_false_center = 75.0, roc_target = 1e-3;
  roc->add_option("--events", roc_events, "event file (empirical curve)");
  roc->add_option("--mode", roc_mode, "t or ts");
  roc->add_option("--w", roc_w, "selection band width, pixels");
  roc->add_option("--segment", roc_segment, "segment length, seconds");
  roc->add_option("--false-center", roc_false_center,
                  "false-window center, ns");
  roc->add_option("--target-pfa", roc_target, "operating point target");
  roc->add_option("--timewalk", roc_timewalk, "time-walk table JSON");

  // theory
  CLI::App* thy = add_subcommand("theory", "closed-form quantities");
  std::optional<double> thy_w, thy_t;
  thy->add_option("--w", thy_w, "selection band width, pixels");
  thy->add_option("--T", thy_t, "acquisition time, seconds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForVersion")
      return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (seed_opt->count() > 0) g.seed = seed_val;
    stcf::AppConfig cfg = load_config(g);

    if (sim->parsed())
      return cmd_simulate(g, cfg, sim_duration, sim_ideal, sim_csv,
                          sim_truth_full);
    if (cal->parsed()) return cmd_calibrate(g, cfg, cal_events);
    if (ana->parsed()) {
      if (ana_w_opt->count() > 0 && ana_mode != "ts") {
        std::fprintf(stderr, "error: --w requires --mode ts\n");
        return 2;
      }
      return cmd_analyze(g, cfg, ana_events, ana_mode, ana_w, ana_t,
                         ana_timewalk);
    }
    if (swp->parsed()) return cmd_sweep_w(g, cfg, swp_min, swp_max, swp_exact);
    if (svt->parsed()) return cmd_snr_vs_t(g, cfg, svt_w, svt_t);
    if (roc->parsed())
      return cmd_roc(g, cfg, roc_events, roc_mode, roc_w, roc_segment,
                     roc_false_center, roc_target, roc_timewalk);
    if (thy->parsed()) return cmd_theory(g, cfg, thy_w, thy_t);
    return 2;
  } catch (const stcf::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
