#include "mfac/commands.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace mfac {

namespace {

struct Outcome {
  SimulationTrace trace;
  std::optional<std::string> divergence;
};

Outcome run_guarded(const LoopConfig& cfg) {
  try {
    return {run_closed_loop(cfg), std::nullopt};
  } catch (const LoopDivergence& e) {
    return {e.partial(), std::string(e.what())};
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void prepare_dir(const std::filesystem::path& dir) {
  if (!dir.empty()) std::filesystem::create_directories(dir);
}

std::filesystem::path out_dir_of(const ExperimentConfig& cfg, const RunOptions& opts) {
  return opts.out_dir.empty() ? std::filesystem::path(cfg.output.dir) : opts.out_dir;
}

LoopConfig with_variant(const ExperimentConfig& cfg, const RunOptions& opts) {
  LoopConfig loop = cfg.loop;
  if (opts.variant) loop.controller.variant = *opts.variant;
  return loop;
}

}  // namespace

void write_trace_csv(const SimulationTrace& trace, std::ostream& out) {
  const Index m = trace.dims.m;
  const Index cols = trace.dims.regressor_size();
  out << "i";
  for (const char* name : {"y", "yd", "u", "e"}) {
    for (Index j = 1; j <= m; ++j) out << ',' << name << j;
  }
  for (Index r = 1; r <= m; ++r) {
    for (Index c = 1; c <= cols; ++c) out << ",phi_" << r << '_' << c;
  }
  out << '\n';

  for (const auto& s : trace.steps) {
    out << s.i;
    for (const VectorXd* v : {&s.y, &s.y_ref, &s.u, &s.e}) {
      for (Index j = 0; j < m; ++j) out << ',' << format_17g((*v)(j));
    }
    for (Index r = 0; r < m; ++r) {
      for (Index c = 0; c < cols; ++c) out << ',' << format_17g(s.phi(r, c));
    }
    out << '\n';
  }
}

void write_trace_csv(const SimulationTrace& trace, const std::filesystem::path& path) {
  auto out = open_output(path);
  write_trace_csv(trace, out);
}

void write_metrics(const Metrics& metrics, std::ostream& out) {
  out << "window = " << metrics.first << ".." << metrics.last << '\n';
  for (Index j = 0; j < metrics.e_sum_sq.size(); ++j) {
    out << 'e' << j + 1 << "_sum_sq = " << format_17g(metrics.e_sum_sq(j)) << '\n';
  }
}

void write_stability_csv(const StabilityReport<double>& report, std::ostream& out) {
  out << "i,rho_A,d4,flag_rho,flag_d4\n";
  for (const auto& r : report.records) {
    out << r.step << ',' << format_17g(r.rho_a) << ',' << format_17g(r.d4) << ','
        << int(r.rho_a_contracting()) << ',' << int(r.d4_contracting()) << '\n';
  }
  out << "# lambda_min=" << format_17g(report.lambda_min) << '\n';
}

int cmd_run(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log, std::ostream& err) {
  const auto dir = out_dir_of(cfg, opts);
  prepare_dir(dir);
  const Outcome result = run_guarded(with_variant(cfg, opts));
  write_trace_csv(result.trace, dir / "trace.csv");
  if (opts.svg || cfg.output.svg) write_trace_svgs(result.trace, dir);

  auto metrics_file = open_output(dir / "metrics.txt");
  if (result.divergence) {
    metrics_file << "diverged: " << *result.divergence << '\n';
    err << "error: " << *result.divergence << '\n';
    return exit_diverged;
  }
  const Metrics metrics = compute_metrics(result.trace);
  write_metrics(metrics, metrics_file);
  write_metrics(metrics, log);
  return exit_ok;
}

int cmd_compare(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log, std::ostream& err) {
  const auto dir = out_dir_of(cfg, opts);
  prepare_dir(dir);
  LoopConfig proposed = cfg.loop;
  proposed.controller.variant = ControlLaw::proposed;
  LoopConfig baseline = cfg.loop;
  baseline.controller.variant = ControlLaw::baseline;
  const Outcome p = run_guarded(proposed);
  const Outcome b = run_guarded(baseline);
  write_trace_csv(p.trace, dir / "trace_proposed.csv");
  write_trace_csv(b.trace, dir / "trace_baseline.csv");
  if (opts.svg || cfg.output.svg) {
    write_trace_svgs(p.trace, dir, "proposed_");
    write_trace_svgs(b.trace, dir, "baseline_");
  }

  const auto cell = [](const Outcome& o, Index j) -> std::string {
    if (o.divergence) return "diverged";
    return format_17g(compute_metrics(o.trace).e_sum_sq(j));
  };
  std::ostringstream table;
  table << "# sum of squared tracking error over steps " << cfg.loop.first_step() << ".." << cfg.loop.horizon
        << '\n'
        << std::left << std::setw(8) << "output" << std::setw(26) << "proposed" << "current\n";
  for (Index j = 0; j < cfg.loop.dims.m; ++j) {
    table << std::setw(8) << ("y" + std::to_string(j + 1)) << std::setw(26) << cell(p, j) << cell(b, j) << '\n';
  }
  auto file = open_output(dir / "compare.txt");
  file << table.str();
  log << table.str();

  if (p.divergence || b.divergence) {
    if (p.divergence) err << "error: proposed: " << *p.divergence << '\n';
    if (b.divergence) err << "error: baseline: " << *b.divergence << '\n';
    return exit_diverged;
  }
  return exit_ok;
}

int cmd_stability(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log, std::ostream& err) {
  const auto dir = out_dir_of(cfg, opts);
  prepare_dir(dir);
  const LoopConfig loop = with_variant(cfg, opts);
  const Outcome result = run_guarded(loop);
  if (result.trace.empty()) {
    err << "error: empty trace\n";
    return exit_config_error;
  }
  const auto report = monitor_trace(result.trace, loop);
  auto file = open_output(dir / "stability.csv");
  write_stability_csv(report, file);
  log << "steps " << result.trace.first_step() << ".." << result.trace.last_step()
      << ", lambda_min = " << format_17g(report.lambda_min) << '\n';
  if (result.divergence) {
    err << "error: " << *result.divergence << '\n';
    return exit_diverged;
  }
  return exit_ok;
}

int cmd_sweep(const ExperimentConfig& cfg, const RunOptions& opts, std::vector<double> lambdas, std::ostream& log,
              std::ostream& err) {
  if (lambdas.empty()) {
    err << "error: empty lambda grid\n";
    return exit_config_error;
  }
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());

  const LoopConfig base = with_variant(cfg, opts);
  std::vector<LoopConfig> points;
  for (double lambda : lambdas) {
    LoopConfig loop = base;
    loop.controller.lambda = lambda;
    try {
      loop.validate();
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return exit_config_error;
    }
    points.push_back(std::move(loop));
  }

  struct Row {
    Outcome outcome;
    double max_rho_a = 0;
  };
  std::vector<std::future<Row>> jobs;
  for (const auto& loop : points) {
    jobs.push_back(std::async(std::launch::async, [&loop] {
      Row row{run_guarded(loop), 0.0};
      for (const auto& phi : row.outcome.trace.estimates()) {
        row.max_rho_a = std::max(row.max_rho_a, spectral_radius(build_companion_matrix(phi, loop.controller)));
      }
      return row;
    }));
  }

  const auto dir = out_dir_of(cfg, opts);
  prepare_dir(dir);
  auto file = open_output(dir / "sweep.csv");
  file << "lambda";
  for (Index j = 1; j <= base.dims.m; ++j) file << ",e" << j << "_sum_sq";
  file << ",max_rho_A,status\n";
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const Row row = jobs[k].get();
    const Metrics metrics = compute_metrics(row.outcome.trace);
    file << format_17g(lambdas[k]);
    for (Index j = 0; j < metrics.e_sum_sq.size(); ++j) file << ',' << format_17g(metrics.e_sum_sq(j));
    file << ',' << format_17g(row.max_rho_a) << ',' << (row.outcome.divergence ? "diverged" : "ok") << '\n';
    log << "lambda = " << format_17g(lambdas[k]) << ": " << (row.outcome.divergence ? "diverged" : "ok") << '\n';
  }
  return exit_ok;
}

}  // namespace mfac
