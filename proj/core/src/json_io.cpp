#include "stcf/json_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stcf/stats.hpp"

namespace stcf {

namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& where, const std::string& why) {
  throw ConfigError(where + ": " + why);
}

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad_field(section, "must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigError("unknown field: " + section + "." + it.key());
  }
}

double get_num(const json& j, const std::string& section, const char* key,
               double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) bad_field(section + "." + key, "must be a number");
  return v.get<double>();
}

int get_int(const json& j, const std::string& section, const char* key,
            int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) bad_field(section + "." + key, "must be an integer");
  return v.get<int>();
}

uint64_t get_u64(const json& j, const std::string& section, const char* key,
                 uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !v.is_number_integer())
    bad_field(section + "." + key, "must be an integer");
  return v.get<uint64_t>();
}

RowBand get_band(const json& j, const std::string& section, const char* key,
                 RowBand fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
      !v[1].is_number_integer())
    bad_field(section + "." + key, "must be [lo, hi]");
  return RowBand{v[0].get<int>(), v[1].get<int>()};
}

void parse_spectrometer(const json& j, SpectrometerConfig& c) {
  const std::string s = "spectrometer";
  check_keys(j, s,
             {"lambda_min_nm", "lambda_max_nm", "lambda_pump_nm",
              "herald_rows", "signal_rows", "tau_ns", "n_total",
              "band_length_l", "histogram_bin_ns", "peak_offset_ns"});
  c.lambda_min_nm = get_num(j, s, "lambda_min_nm", c.lambda_min_nm);
  c.lambda_max_nm = get_num(j, s, "lambda_max_nm", c.lambda_max_nm);
  c.lambda_pump_nm = get_num(j, s, "lambda_pump_nm", c.lambda_pump_nm);
  c.herald_rows = get_band(j, s, "herald_rows", c.herald_rows);
  c.signal_rows = get_band(j, s, "signal_rows", c.signal_rows);
  c.tau_ns = get_num(j, s, "tau_ns", c.tau_ns);
  c.n_total = get_int(j, s, "n_total", c.n_total);
  c.band_length_l = get_int(j, s, "band_length_l", c.band_length_l);
  c.histogram_bin_ns = get_num(j, s, "histogram_bin_ns", c.histogram_bin_ns);
  c.peak_offset_ns = get_num(j, s, "peak_offset_ns", c.peak_offset_ns);
}

void parse_source(const json& j, SourceParams& c) {
  const std::string s = "source";
  check_keys(j, s,
             {"pair_rate_P", "bg_rate_B", "mu_s", "mu_h", "herald_spectrum",
              "alpha_px", "jitter_ns_rms", "tof_delay_ns", "duration_s",
              "seed"});
  c.pair_rate_P = get_num(j, s, "pair_rate_P", c.pair_rate_P);
  c.bg_rate_B = get_num(j, s, "bg_rate_B", c.bg_rate_B);
  c.mu_s = get_num(j, s, "mu_s", c.mu_s);
  c.mu_h = get_num(j, s, "mu_h", c.mu_h);
  if (j.contains("herald_spectrum")) {
    const json& h = j.at("herald_spectrum");
    check_keys(h, s + ".herald_spectrum", {"center_nm", "fwhm_nm"});
    c.herald_center_nm =
        get_num(h, s + ".herald_spectrum", "center_nm", c.herald_center_nm);
    c.herald_fwhm_nm =
        get_num(h, s + ".herald_spectrum", "fwhm_nm", c.herald_fwhm_nm);
  }
  c.alpha_px = get_num(j, s, "alpha_px", c.alpha_px);
  c.jitter_ns_rms = get_num(j, s, "jitter_ns_rms", c.jitter_ns_rms);
  c.tof_delay_ns = get_num(j, s, "tof_delay_ns", c.tof_delay_ns);
  c.duration_s = get_num(j, s, "duration_s", c.duration_s);
  c.seed = get_u64(j, s, "seed", c.seed);
}

void parse_intensifier(const json& j, IntensifierParams& c) {
  const std::string s = "intensifier";
  check_keys(j, s,
             {"cluster_size_law", "tot_law", "timewalk_c0_ns",
              "timewalk_c1_ns"});
  if (j.contains("cluster_size_law")) {
    const json& g = j.at("cluster_size_law");
    check_keys(g, s + ".cluster_size_law", {"mean", "max"});
    c.cluster_mean = get_num(g, s + ".cluster_size_law", "mean", c.cluster_mean);
    c.cluster_max = get_int(g, s + ".cluster_size_law", "max", c.cluster_max);
  }
  if (j.contains("tot_law")) {
    const json& g = j.at("tot_law");
    check_keys(g, s + ".tot_law",
               {"log_mean", "log_sigma", "min_ns", "max_ns"});
    c.tot_log_mean = get_num(g, s + ".tot_law", "log_mean", c.tot_log_mean);
    c.tot_log_sigma = get_num(g, s + ".tot_law", "log_sigma", c.tot_log_sigma);
    c.tot_min_ns = get_int(g, s + ".tot_law", "min_ns", c.tot_min_ns);
    c.tot_max_ns = get_int(g, s + ".tot_law", "max_ns", c.tot_max_ns);
  }
  c.timewalk_c0_ns = get_num(j, s, "timewalk_c0_ns", c.timewalk_c0_ns);
  c.timewalk_c1_ns = get_num(j, s, "timewalk_c1_ns", c.timewalk_c1_ns);
}

void parse_pipeline(const json& j, PipelineParams& c) {
  const std::string s = "pipeline";
  check_keys(j, s,
             {"cluster_window_ns", "tot_bins", "tot_bin_lo_ns",
              "tot_bin_hi_ns", "min_samples", "anchor_mode"});
  c.cluster_window_ns = get_num(j, s, "cluster_window_ns", c.cluster_window_ns);
  c.tot_bins = get_int(j, s, "tot_bins", c.tot_bins);
  c.tot_bin_lo_ns = get_num(j, s, "tot_bin_lo_ns", c.tot_bin_lo_ns);
  c.tot_bin_hi_ns = get_num(j, s, "tot_bin_hi_ns", c.tot_bin_hi_ns);
  c.min_samples = get_int(j, s, "min_samples", c.min_samples);
  if (j.contains("anchor_mode")) {
    const json& v = j.at("anchor_mode");
    if (!v.is_string()) bad_field(s + ".anchor_mode", "must be a string");
    std::string m = v.get<std::string>();
    if (m == "max_tot")
      c.anchor_mode = PipelineParams::AnchorMode::MaxTot;
    else if (m == "nearest_centroid")
      c.anchor_mode = PipelineParams::AnchorMode::NearestCentroid;
    else
      bad_field(s + ".anchor_mode",
                "must be \"max_tot\" or \"nearest_centroid\"");
  }
}

void parse_theory(const json& j, TheoryParams& c) {
  const std::string s = "theory";
  check_keys(j, s,
             {"C", "S_s", "S_h", "tau_s", "N", "N_prime", "w_px", "alpha_px",
              "T_s", "P", "B", "mu_s", "mu_h"});
  c.pair_coincidence_rate = get_num(j, s, "C", c.pair_coincidence_rate);
  c.singles_rate_signal = get_num(j, s, "S_s", c.singles_rate_signal);
  c.singles_rate_herald = get_num(j, s, "S_h", c.singles_rate_herald);
  c.tau_s = get_num(j, s, "tau_s", c.tau_s);
  c.n_total = get_num(j, s, "N", c.n_total);
  c.n_prime = get_num(j, s, "N_prime", c.n_prime);
  c.w_px = get_num(j, s, "w_px", c.w_px);
  c.alpha_px = get_num(j, s, "alpha_px", c.alpha_px);
  c.t_acq_s = get_num(j, s, "T_s", c.t_acq_s);
  c.pair_rate_P = get_num(j, s, "P", c.pair_rate_P);
  c.bg_rate_B = get_num(j, s, "B", c.bg_rate_B);
  c.mu_s = get_num(j, s, "mu_s", c.mu_s);
  c.mu_h = get_num(j, s, "mu_h", c.mu_h);
}

json dump_config(const AppConfig& c) {
  json j;
  j["spectrometer"] = {
      {"lambda_min_nm", c.spectrometer.lambda_min_nm},
      {"lambda_max_nm", c.spectrometer.lambda_max_nm},
      {"lambda_pump_nm", c.spectrometer.lambda_pump_nm},
      {"herald_rows", {c.spectrometer.herald_rows.lo, c.spectrometer.herald_rows.hi}},
      {"signal_rows", {c.spectrometer.signal_rows.lo, c.spectrometer.signal_rows.hi}},
      {"tau_ns", c.spectrometer.tau_ns},
      {"n_total", c.spectrometer.n_total},
      {"band_length_l", c.spectrometer.band_length_l},
      {"histogram_bin_ns", c.spectrometer.histogram_bin_ns},
      {"peak_offset_ns", c.spectrometer.peak_offset_ns},
  };
  j["source"] = {
      {"pair_rate_P", c.source.pair_rate_P},
      {"bg_rate_B", c.source.bg_rate_B},
      {"mu_s", c.source.mu_s},
      {"mu_h", c.source.mu_h},
      {"herald_spectrum",
       {{"center_nm", c.source.herald_center_nm},
        {"fwhm_nm", c.source.herald_fwhm_nm}}},
      {"alpha_px", c.source.alpha_px},
      {"jitter_ns_rms", c.source.jitter_ns_rms},
      {"tof_delay_ns", c.source.tof_delay_ns},
      {"duration_s", c.source.duration_s},
      {"seed", c.source.seed},
  };
  j["intensifier"] = {
      {"cluster_size_law",
       {{"mean", c.intensifier.cluster_mean}, {"max", c.intensifier.cluster_max}}},
      {"tot_law",
       {{"log_mean", c.intensifier.tot_log_mean},
        {"log_sigma", c.intensifier.tot_log_sigma},
        {"min_ns", c.intensifier.tot_min_ns},
        {"max_ns", c.intensifier.tot_max_ns}}},
      {"timewalk_c0_ns", c.intensifier.timewalk_c0_ns},
      {"timewalk_c1_ns", c.intensifier.timewalk_c1_ns},
  };
  j["pipeline"] = {
      {"cluster_window_ns", c.pipeline.cluster_window_ns},
      {"tot_bins", c.pipeline.tot_bins},
      {"tot_bin_lo_ns", c.pipeline.tot_bin_lo_ns},
      {"tot_bin_hi_ns", c.pipeline.tot_bin_hi_ns},
      {"min_samples", c.pipeline.min_samples},
      {"anchor_mode",
       c.pipeline.anchor_mode == PipelineParams::AnchorMode::MaxTot
           ? "max_tot"
           : "nearest_centroid"},
  };
  j["theory"] = {
      {"C", c.theory.pair_coincidence_rate},
      {"S_s", c.theory.singles_rate_signal},
      {"S_h", c.theory.singles_rate_herald},
      {"tau_s", c.theory.tau_s},
      {"N", c.theory.n_total},
      {"N_prime", c.theory.n_prime},
      {"w_px", c.theory.w_px},
      {"alpha_px", c.theory.alpha_px},
      {"T_s", c.theory.t_acq_s},
      {"P", c.theory.pair_rate_P},
      {"B", c.theory.bg_rate_B},
      {"mu_s", c.theory.mu_s},
      {"mu_h", c.theory.mu_h},
  };
  return j;
}

}  // namespace

AppConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");
  check_keys(j, "config",
             {"spectrometer", "source", "intensifier", "pipeline", "theory"});

  AppConfig cfg;
  if (j.contains("spectrometer"))
    parse_spectrometer(j.at("spectrometer"), cfg.spectrometer);
  if (j.contains("source")) parse_source(j.at("source"), cfg.source);
  if (j.contains("intensifier"))
    parse_intensifier(j.at("intensifier"), cfg.intensifier);
  if (j.contains("pipeline")) parse_pipeline(j.at("pipeline"), cfg.pipeline);
  if (j.contains("theory")) parse_theory(j.at("theory"), cfg.theory);

  cfg.spectrometer.validate();
  cfg.source.validate();
  cfg.intensifier.validate();
  cfg.pipeline.validate();
  return cfg;
}

std::string config_to_json(const AppConfig& cfg) {
  return dump_config(cfg).dump(2);
}

uint64_t config_digest(const AppConfig& cfg) {
  // nlohmann::json objects iterate key-sorted, so dump() is canonical.
  // Seed and run length identify a run, not how to interpret its events, so
  // they stay out: reanalysis with a different duration must not warn.
  json j = dump_config(cfg);
  j["source"].erase("seed");
  j["source"].erase("duration_s");
  return fnv1a64(j.dump());
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace stcf
