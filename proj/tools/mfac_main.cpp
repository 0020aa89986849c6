// mfac: run, compare, sweep and stability-check closed-loop experiments.

#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mfac/commands.hpp"

namespace {

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw mfac::ConfigError("bad grid value '" + item + "'");
    grid.push_back(v);
  }
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-free adaptive control experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string variant;
  bool svg = false;
  int seed = 0;
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Experiment config file")->required();
    cmd->add_option("--out", out_dir, "Output directory (default: [output] dir)");
    cmd->add_option("--variant", variant, "Control law")->check(CLI::IsMember({"proposed", "baseline"}));
    cmd->add_flag("--svg", svg, "Also write SVG line plots");
    cmd->add_option("--seed", seed, "Reserved; experiments are deterministic");
  };

  auto* run = app.add_subcommand("run", "Simulate one closed loop; write trace.csv and metrics.txt");
  auto* compare = app.add_subcommand("compare", "Run both control laws and tabulate the tracking error");
  auto* stability = app.add_subcommand("stability", "Write per-step stability diagnostics to stability.csv");
  auto* sweep = app.add_subcommand("sweep", "Repeat the run over a lambda grid; write sweep.csv");
  for (auto* cmd : {run, compare, stability, sweep}) add_common(cmd);

  std::string param = "lambda";
  std::string grid_text;
  sweep->add_option("--param", param, "Swept parameter")->check(CLI::IsMember({"lambda"}));
  sweep->add_option("--grid", grid_text, "Comma-separated grid values")->required();

  std::string preset_name;
  auto* preset = app.add_subcommand("preset", "Print a bundled config");
  preset->add_option("name", preset_name, "example1 | lti | identity")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return mfac::exit_config_error;
  }

  try {
    if (preset->parsed()) {
      std::cout << mfac::serialize_config(mfac::preset(preset_name));
      return mfac::exit_ok;
    }

    const auto cfg = mfac::load_config(config_path);
    mfac::RunOptions opts;
    opts.out_dir = out_dir;
    opts.svg = svg;
    if (variant == "proposed") opts.variant = mfac::ControlLaw::proposed;
    if (variant == "baseline") opts.variant = mfac::ControlLaw::baseline;

    if (run->parsed()) return mfac::cmd_run(cfg, opts, std::cout, std::cerr);
    if (compare->parsed()) return mfac::cmd_compare(cfg, opts, std::cout, std::cerr);
    if (stability->parsed()) return mfac::cmd_stability(cfg, opts, std::cout, std::cerr);
    return mfac::cmd_sweep(cfg, opts, parse_grid(grid_text), std::cout, std::cerr);
  } catch (const mfac::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return mfac::exit_config_error;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return mfac::exit_config_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
