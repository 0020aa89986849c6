#pragma once

#include <vector>

#include "mfac/core.hpp"

namespace mfac {

enum class ControlLaw { proposed, baseline };
enum class GainNorm { spectral, frobenius };

template <typename Scalar>
struct ControllerConfig {
  Scalar lambda = Scalar(1);
  /// Step factors rho_1..rho_{ly+lu}, stored zero based in block order.
  std::vector<Scalar> rho;
  ControlLaw variant = ControlLaw::proposed;
  /// Norm used in the baseline denominator lambda + |Phi_key|^2.
  GainNorm baseline_norm = GainNorm::spectral;

  void validate(const Dimensions& dims) const {
    if (!(lambda > 0)) throw std::invalid_argument("controller: lambda must be > 0");
    if (static_cast<Index>(rho.size()) != dims.block_count()) {
      throw DimensionError("controller: rho needs ly + lu entries");
    }
    for (Scalar r : rho) {
      if (!(r > 0 && r <= 1)) throw std::invalid_argument("controller: each rho must lie in (0, 1]");
    }
  }
};

/// G = (Phi^T Phi + lambda I)^{-1} Phi^T for an m x m input gain block, by
/// Cholesky solve.
template <typename Derived>
Matrix<typename Derived::Scalar> gain_matrix(const Eigen::MatrixBase<Derived>& key_block,
                                             typename Derived::Scalar lambda) {
  using Scalar = typename Derived::Scalar;
  const Index m = key_block.cols();
  const Matrix<Scalar> normal =
      key_block.transpose() * key_block + lambda * Matrix<Scalar>::Identity(m, m);
  const Eigen::LLT<Matrix<Scalar>> llt(normal);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("gain_matrix: regularized normal matrix is not positive definite");
  }
  return llt.solve(key_block.transpose());
}

template <typename Scalar>
Matrix<Scalar> gain_matrix(const Pjm<Scalar>& phi, Scalar lambda) {
  return gain_matrix(phi.key_block(), lambda);
}

namespace detail {

/// rho_key (y_ref - y) - sum_k rho_k Phi_k dy(i-k+1) - sum_{j>=2} rho_{ly+j} Phi_{ly+j} du(i-j+1).
/// The newest input in `hist` is u(i-1), so du(i-j+1) sits at input lag j-2.
template <typename Scalar, typename DerivedY, typename DerivedR>
Vector<Scalar> control_bracket(const Pjm<Scalar>& phi, const HistoryWindow<Scalar>& hist,
                               const Eigen::MatrixBase<DerivedY>& y_now,
                               const Eigen::MatrixBase<DerivedR>& y_ref_next,
                               const ControllerConfig<Scalar>& cfg) {
  const auto& dims = phi.dims();
  require(hist.channels() == dims.m && y_now.size() == dims.m && y_ref_next.size() == dims.m,
          "control law: dimension mismatch");
  require(static_cast<Index>(cfg.rho.size()) == dims.block_count(),
          "control law: rho needs ly + lu entries");

  const auto& rho = cfg.rho;
  const auto at = [](Index k) { return static_cast<std::size_t>(k); };
  Vector<Scalar> bracket = rho[at(dims.key_block())] * (y_ref_next - y_now);
  for (Index k = 0; k < dims.ly; ++k) {
    bracket.noalias() -= rho[at(k)] * (phi.block(k) * hist.delta_output(k));
  }
  for (Index j = 1; j < dims.lu; ++j) {
    const Index k = dims.ly + j;
    bracket.noalias() -= rho[at(k)] * (phi.block(k) * hist.delta_input(j - 1));
  }
  return bracket;
}

}  // namespace detail

/// Control increment du(i) = G(i) * bracket with the regularized matrix-inverse
/// gain. `hist` holds outputs up to y(i) and inputs up to u(i-1).
template <typename Scalar, typename DerivedY, typename DerivedR>
Vector<Scalar> control_increment_proposed(const Pjm<Scalar>& phi, const HistoryWindow<Scalar>& hist,
                                          const Eigen::MatrixBase<DerivedY>& y_now,
                                          const Eigen::MatrixBase<DerivedR>& y_ref_next,
                                          const ControllerConfig<Scalar>& cfg) {
  const Vector<Scalar> bracket = detail::control_bracket(phi, hist, y_now, y_ref_next, cfg);
  return gain_matrix(phi, cfg.lambda) * bracket;
}

/// Norm-denominator law: du(i) = Phi_key^T bracket / (lambda + |Phi_key|^2).
template <typename Scalar, typename DerivedY, typename DerivedR>
Vector<Scalar> control_increment_baseline(const Pjm<Scalar>& phi, const HistoryWindow<Scalar>& hist,
                                          const Eigen::MatrixBase<DerivedY>& y_now,
                                          const Eigen::MatrixBase<DerivedR>& y_ref_next,
                                          const ControllerConfig<Scalar>& cfg) {
  const Vector<Scalar> bracket = detail::control_bracket(phi, hist, y_now, y_ref_next, cfg);
  const Matrix<Scalar> key = phi.key_block();
  const Scalar norm = cfg.baseline_norm == GainNorm::spectral ? key.operatorNorm() : key.norm();
  return key.transpose() * bracket / (cfg.lambda + norm * norm);
}

template <typename Scalar, typename DerivedY, typename DerivedR>
Vector<Scalar> control_increment(const Pjm<Scalar>& phi, const HistoryWindow<Scalar>& hist,
                                 const Eigen::MatrixBase<DerivedY>& y_now,
                                 const Eigen::MatrixBase<DerivedR>& y_ref_next,
                                 const ControllerConfig<Scalar>& cfg) {
  return cfg.variant == ControlLaw::proposed
             ? control_increment_proposed(phi, hist, y_now, y_ref_next, cfg)
             : control_increment_baseline(phi, hist, y_now, y_ref_next, cfg);
}

}  // namespace mfac
