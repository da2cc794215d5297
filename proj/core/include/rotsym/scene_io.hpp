#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rotsym/metrics.hpp"
#include "rotsym/scene.hpp"
#include "rotsym/synth.hpp"

namespace rotsym {

/// Scene files are UTF-8 JSON, format_version 1. Parsing is permissive by
/// default: unknown fields are ignored. Strict mode rejects them.
struct ParseOptions {
  bool strict = false;
};

std::vector<Scene> parse_scenes_json(const std::string& text, const ParseOptions& opts = {});
std::vector<Scene> read_scene_file(const std::string& path, const ParseOptions& opts = {});

/// Serialization writes every real number with 17 significant digits so a
/// parse of the output reproduces the doubles exactly.
std::string scenes_to_json(std::span<const Scene> scenes);
void write_scene_file(const std::string& path, std::span<const Scene> scenes);

/// A synth run: generator config plus an optional noise model for the
/// prediction file.
struct SynthJob {
  SynthConfig synth;
  std::optional<NoiseSpec> noise;
};

SynthJob parse_synth_config_json(const std::string& text, const ParseOptions& opts = {});
SynthJob read_synth_config(const std::string& path, const ParseOptions& opts = {});

/// Evaluation reports echo the protocol constants they ran with; field
/// order is fixed so identical inputs produce identical bytes.
std::string report_to_json(const EvalReport& report);
std::string report_to_text(const EvalReport& report);

std::string read_text_file(const std::string& path);            // ConfigError on I/O failure
void write_text_file(const std::string& path, const std::string& content);

/// %.17g formatting used across all emitted files.
std::string format_double(double value);

}  // namespace rotsym
