#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mfac/simulation.hpp"

namespace mfac {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutputOptions {
  std::string dir = "out";
  bool svg = false;
};

/// File form: INI-style sections [plant] [controller] [estimator]
/// [simulation] [output] holding `key = value` lines; `#` starts a comment.
/// Matrices are written row by row, rows separated by `;`, entries by `,`.
struct ExperimentConfig {
  LoopConfig loop;
  OutputOptions output;
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& cfg);

/// Bundled presets: `example1` (benchmark with the printed settings), `lti`
/// (y(i+1) = 0.5 y(i) + u(i), constant target 1) and `identity`
/// (y(i+1) = u(i) with a matched initial estimate).
ExperimentConfig preset(std::string_view name);
/// Bundled config text of a preset.
std::string_view preset_text(std::string_view name);

/// Shortest decimal text that reads back to the same double.
std::string format_shortest(double v);
/// 17 significant digits.
std::string format_17g(double v);

}  // namespace mfac
