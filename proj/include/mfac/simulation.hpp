#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "mfac/controller.hpp"
#include "mfac/estimator.hpp"
#include "mfac/plants.hpp"
#include "mfac/stability.hpp"

namespace mfac {

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;

enum class PlantKind { benchmark10, lti };
enum class ReferenceKind { benchmark, constant };

struct PlantSpec {
  PlantKind kind = PlantKind::benchmark10;
  Index channels = 2;
  Benchmark10Options benchmark{};
  std::vector<MatrixXd> a;  // LTI output coefficients A_1..A_na
  std::vector<MatrixXd> b;  // LTI input coefficients B_1..B_nb
};

struct ReferenceSpec {
  ReferenceKind kind = ReferenceKind::benchmark;
  VectorXd value;  // constant target
};

/// Everything one closed-loop run needs.
struct LoopConfig {
  Dimensions dims{2, 1, 3};
  EstimatorConfig<double> estimator;
  ControllerConfig<double> controller;
  Index horizon = 1000;
  PlantSpec plant;
  ReferenceSpec reference;
  /// Seeded history, oldest first. The last output is y(i0) with i0 the first
  /// controlled step; inputs run up to u(i0 - 1).
  std::vector<VectorXd> initial_y;
  std::vector<VectorXd> initial_u;
  double divergence_limit = 1e9;

  Index first_step() const { return static_cast<Index>(initial_y.size()); }
  void validate() const;
};

std::unique_ptr<Plant<double>> make_plant(const PlantSpec& spec);

/// Target y^d(k). The benchmark target for step k is reference_signals(k - 1).
VectorXd reference_at(const ReferenceSpec& spec, Index k);

struct StepRecord {
  Index i = 0;
  VectorXd y;      // y(i)
  VectorXd y_ref;  // y^d(i)
  VectorXd u;      // u(i)
  VectorXd e;      // y^d(i) - y(i)
  VectorXd du;     // du(i)
  MatrixXd phi;    // flattened estimate after the step-i update
};

struct SimulationTrace {
  Dimensions dims;
  std::vector<StepRecord> steps;

  bool empty() const noexcept { return steps.empty(); }
  Index first_step() const { return steps.empty() ? 0 : steps.front().i; }
  Index last_step() const { return steps.empty() ? -1 : steps.back().i; }
  std::vector<Pjm<double>> estimates() const;
};

/// Thrown by run_closed_loop when |y| leaves the divergence guard. Carries
/// every step recorded before the abort.
class LoopDivergence : public DivergenceError {
 public:
  LoopDivergence(const std::string& what, Index step, SimulationTrace partial)
      : DivergenceError(what, step), partial_(std::move(partial)) {}
  const SimulationTrace& partial() const noexcept { return partial_; }

 private:
  SimulationTrace partial_;
};

/// Steps i = i0..N: estimate, reset, control, apply, advance the plant.
SimulationTrace run_closed_loop(const LoopConfig& cfg);

struct Metrics {
  VectorXd e_sum_sq;  // per-channel sum of squared tracking error
  Index first = 0;
  Index last = 0;
};

/// Sums e_j(i)^2 over steps first..last inclusive.
Metrics compute_metrics(const SimulationTrace& trace, Index first, Index last);
Metrics compute_metrics(const SimulationTrace& trace);

struct Comparison {
  Metrics proposed;
  Metrics baseline;
  SimulationTrace proposed_trace;
  SimulationTrace baseline_trace;
};

/// Runs both control laws from identical settings.
Comparison compare_controllers(const LoopConfig& cfg);

/// Stability atoms along a recorded trace. The true input gain enters d4 when
/// the plant has a known constant PJM for the configured orders.
StabilityReport<double> monitor_trace(const SimulationTrace& trace, const LoopConfig& cfg);

}  // namespace mfac
