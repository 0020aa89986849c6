#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mfac/config.hpp"

namespace mfac {

enum ExitCode : int { exit_ok = 0, exit_config_error = 2, exit_diverged = 3 };

/// Header `i,y1..ym,yd1..ydm,u1..um,e1..em,phi_<r>_<c>...`; one row per step,
/// reals with 17 significant digits.
void write_trace_csv(const SimulationTrace& trace, std::ostream& out);
void write_trace_csv(const SimulationTrace& trace, const std::filesystem::path& path);

void write_metrics(const Metrics& metrics, std::ostream& out);

/// Header `i,rho_A,d4,flag_rho,flag_d4`, closed by `# lambda_min=<value>`.
void write_stability_csv(const StabilityReport<double>& report, std::ostream& out);

/// Line plots of y against y^d per channel, u per channel and PJM entries.
void write_trace_svgs(const SimulationTrace& trace, const std::filesystem::path& dir,
                      const std::string& prefix = "");

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<ControlLaw> variant;
  bool svg = false;
};

/// Each command writes its files under `opts.out_dir`, prints a summary to
/// `log`, diagnostics to `err`, and returns an ExitCode.
int cmd_run(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log, std::ostream& err);
int cmd_compare(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log, std::ostream& err);
int cmd_stability(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log, std::ostream& err);
int cmd_sweep(const ExperimentConfig& cfg, const RunOptions& opts, std::vector<double> lambdas,
              std::ostream& log, std::ostream& err);

}  // namespace mfac
