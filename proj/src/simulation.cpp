#include "mfac/simulation.hpp"

#include <sstream>

namespace mfac {

void LoopConfig::validate() const {
  estimator.validate();
  controller.validate(dims);
  if (horizon < 4) throw std::invalid_argument("simulation: horizon must be >= 4");
  if (initial_y.empty()) throw std::invalid_argument("simulation: at least one initial output is required");
  if (initial_u.size() + 1 != initial_y.size()) {
    throw std::invalid_argument("simulation: need exactly one fewer initial input than initial outputs");
  }
  if (first_step() > horizon) throw std::invalid_argument("simulation: horizon ends before the first controlled step");
  if (plant.channels != dims.m) throw DimensionError("simulation: plant channel count differs from m");
  if (plant.kind == PlantKind::benchmark10 && dims.m != 2) throw DimensionError("simulation: benchmark10 has m = 2");
  for (const auto& v : initial_y) detail::require(v.size() == dims.m, "simulation: initial output size");
  for (const auto& v : initial_u) detail::require(v.size() == dims.m, "simulation: initial input size");
  if (estimator.phi_init.dims() != dims) throw DimensionError("simulation: phi_init shape differs from dims");
  if (reference.kind == ReferenceKind::constant) {
    detail::require(reference.value.size() == dims.m, "simulation: constant reference size");
  } else if (dims.m != 2) {
    throw DimensionError("simulation: benchmark reference has two channels");
  }
  if (!(divergence_limit > 0)) throw std::invalid_argument("simulation: divergence_limit must be > 0");
}

std::unique_ptr<Plant<double>> make_plant(const PlantSpec& spec) {
  if (spec.kind == PlantKind::benchmark10) return std::make_unique<Benchmark10<double>>(spec.benchmark);
  return std::make_unique<LtiPlant<double>>(spec.a, spec.b);
}

VectorXd reference_at(const ReferenceSpec& spec, Index k) {
  if (spec.kind == ReferenceKind::constant) return spec.value;
  return reference_signals<double>(k - 1);
}

std::vector<Pjm<double>> SimulationTrace::estimates() const {
  std::vector<Pjm<double>> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.emplace_back(dims, s.phi);
  return out;
}

SimulationTrace run_closed_loop(const LoopConfig& cfg) {
  cfg.validate();
  const auto& dims = cfg.dims;
  auto plant = make_plant(cfg.plant);
  plant->reset(cfg.initial_y, cfg.initial_u);

  auto hist = HistoryWindow<double>::for_dims(dims);
  for (std::size_t t = 0; t + 1 < cfg.initial_y.size(); ++t) {
    hist.push_output(cfg.initial_y[t]);
    hist.push_input(cfg.initial_u[t]);
  }

  SimulationTrace trace{dims, {}};
  trace.steps.reserve(static_cast<std::size_t>(cfg.horizon - cfg.first_step() + 1));

  Pjm<double> phi = cfg.estimator.phi_init;
  VectorXd y_now = cfg.initial_y.back();
  for (Index i = cfg.first_step(); i <= cfg.horizon; ++i) {
    const auto dl_prev = assemble_delta_regressor(hist, dims);
    hist.push_output(y_now);
    const VectorXd dy = hist.delta_output(0);

    phi = update_pjm(phi, dy, dl_prev, cfg.estimator);
    phi = maybe_reset(phi, cfg.estimator, dl_prev);

    const VectorXd target_next = reference_at(cfg.reference, i + 1);
    const VectorXd du = control_increment(phi, hist, y_now, target_next, cfg.controller);
    const VectorXd u_prev = hist.input_count() > 0 ? hist.input(0) : VectorXd::Zero(dims.m);
    const VectorXd u = u_prev + du;
    hist.push_input(u);

    StepRecord rec;
    rec.i = i;
    rec.y = y_now;
    rec.y_ref = reference_at(cfg.reference, i);
    rec.u = u;
    rec.e = rec.y_ref - rec.y;
    rec.du = du;
    rec.phi = phi.flat();
    trace.steps.push_back(std::move(rec));

    y_now = plant->step(u);
    if (!y_now.allFinite() || y_now.norm() > cfg.divergence_limit) {
      std::ostringstream msg;
      msg << "closed loop diverged: |y(" << i + 1 << ")| exceeds " << cfg.divergence_limit;
      throw LoopDivergence(msg.str(), i + 1, std::move(trace));
    }
  }
  return trace;
}

Metrics compute_metrics(const SimulationTrace& trace, Index first, Index last) {
  if (trace.empty() || first > last) throw std::invalid_argument("compute_metrics: empty window");
  if (first < trace.first_step() || last > trace.last_step()) {
    throw std::out_of_range("compute_metrics: window outside the trace");
  }
  Metrics out{VectorXd::Zero(trace.dims.m), first, last};
  for (const auto& s : trace.steps) {
    if (s.i < first || s.i > last) continue;
    out.e_sum_sq += s.e.cwiseAbs2();
  }
  return out;
}

Metrics compute_metrics(const SimulationTrace& trace) {
  return compute_metrics(trace, trace.first_step(), trace.last_step());
}

Comparison compare_controllers(const LoopConfig& cfg) {
  LoopConfig proposed = cfg;
  proposed.controller.variant = ControlLaw::proposed;
  LoopConfig baseline = cfg;
  baseline.controller.variant = ControlLaw::baseline;

  Comparison out;
  out.proposed_trace = run_closed_loop(proposed);
  out.baseline_trace = run_closed_loop(baseline);
  out.proposed = compute_metrics(out.proposed_trace);
  out.baseline = compute_metrics(out.baseline_trace);
  return out;
}

StabilityReport<double> monitor_trace(const SimulationTrace& trace, const LoopConfig& cfg) {
  if (trace.empty()) throw std::invalid_argument("monitor_trace: empty trace");
  std::optional<MatrixXd> true_key;
  if (const auto truth = make_plant(cfg.plant)->true_pjm(cfg.dims)) true_key = MatrixXd(truth->key_block());

  StabilityReport<double> report;
  const auto estimates = trace.estimates();
  report.records.reserve(estimates.size());
  for (std::size_t s = 0; s < estimates.size(); ++s) {
    auto rec = assess_step(estimates[s], cfg.controller, true_key);
    rec.step = trace.steps[s].i;
    report.records.push_back(rec);
  }
  report.lambda_min = lambda_min_search<double>(estimates, cfg.controller, true_key);
  return report;
}

}  // namespace mfac
