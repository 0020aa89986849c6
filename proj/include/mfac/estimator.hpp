#pragma once

#include "mfac/core.hpp"

namespace mfac {

template <typename Scalar>
struct EstimatorConfig {
  Scalar mu = Scalar(1);
  Scalar eta = Scalar(0.5);
  bool reset_enabled = true;
  Scalar reset_epsilon = Scalar(1e-5);
  Pjm<Scalar> phi_init;

  void validate() const {
    if (!(mu > 0)) throw std::invalid_argument("estimator: mu must be > 0");
    if (!(eta > 0 && eta <= 2)) throw std::invalid_argument("estimator: eta must lie in (0, 2]");
    if (!(reset_epsilon > 0)) throw std::invalid_argument("estimator: reset_epsilon must be > 0");
  }
};

/// Projection update of the PJM estimate:
///   Phi(i) = Phi(i-1) + eta (dy(i) - Phi(i-1) dL(i-1)) dL(i-1)^T / (mu + |dL(i-1)|^2).
/// A zero regressor leaves the estimate untouched.
template <typename Scalar, typename Derived>
Pjm<Scalar> update_pjm(const Pjm<Scalar>& phi_prev, const Eigen::MatrixBase<Derived>& dy_now,
                       const DeltaRegressor<Scalar>& dl_prev, const EstimatorConfig<Scalar>& cfg) {
  const auto& dims = phi_prev.dims();
  detail::require(dy_now.size() == dims.m && dl_prev.size() == dims.regressor_size(),
                  "update_pjm: dimension mismatch");
  const Scalar energy = dl_prev.squared_norm();
  if (energy == Scalar(0)) return phi_prev;

  const Vector<Scalar> innovation = dy_now - phi_prev.flat() * dl_prev.entries;
  Pjm<Scalar> next = phi_prev;
  next.flat().noalias() += (cfg.eta / (cfg.mu + energy)) * innovation * dl_prev.entries.transpose();
  return next;
}

/// Restores `cfg.phi_init` when the regressor stalls, the input gain collapses,
/// or a diagonal entry of the input gain changes sign relative to the initial
/// estimate.
template <typename Scalar>
Pjm<Scalar> maybe_reset(const Pjm<Scalar>& phi, const EstimatorConfig<Scalar>& cfg,
                        const DeltaRegressor<Scalar>& dl_prev) {
  if (!cfg.reset_enabled) return phi;

  const Matrix<Scalar> gain = phi.key_block();
  if (dl_prev.norm() <= cfg.reset_epsilon || gain.operatorNorm() <= cfg.reset_epsilon) {
    return cfg.phi_init;
  }
  const auto init_gain = cfg.phi_init.key_block();
  const auto sign = [](Scalar x) { return (Scalar(0) < x) - (x < Scalar(0)); };
  for (Index d = 0; d < gain.rows(); ++d) {
    if (sign(gain(d, d)) != sign(init_gain(d, d))) return cfg.phi_init;
  }
  return phi;
}

}  // namespace mfac
