#pragma once

#include <cstdint>
#include <string>

#include "stcf/pipeline.hpp"
#include "stcf/simulate.hpp"
#include "stcf/theory.hpp"
#include "stcf/types.hpp"

namespace stcf {

// Whole-run configuration. Every section is optional in the JSON document;
// unknown keys anywhere raise ConfigError naming the offending field.
struct AppConfig {
  SpectrometerConfig spectrometer;
  SourceParams source;
  IntensifierParams intensifier;
  PipelineParams pipeline;
  TheoryParams theory;
};

AppConfig parse_config(const std::string& json_text);
std::string config_to_json(const AppConfig& cfg);

// FNV-1a of the canonical (defaults-filled, key-sorted) serialization,
// excluding per-run identity fields (seed, duration): the digest says how to
// interpret an event stream, not which run produced it.
uint64_t config_digest(const AppConfig& cfg);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace stcf
