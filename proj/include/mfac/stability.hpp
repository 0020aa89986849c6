#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mfac/controller.hpp"

namespace mfac {

/// Closed-loop increment transition matrix A(i) of size m(ly+lu).
///
/// First block row: [-p_{ly+2} ... -p_{ly+lu}, -p_1 ... -p_ly, 0] with
/// p_k = rho_k G(i) Phi_k(i); identity blocks on the block sub-diagonal.
template <typename Scalar>
Matrix<Scalar> build_companion_matrix(const Pjm<Scalar>& phi_hat, const ControllerConfig<Scalar>& cfg) {
  const auto& dims = phi_hat.dims();
  cfg.validate(dims);
  const Index m = dims.m;
  const Index n = dims.block_count();
  const Matrix<Scalar> gain = gain_matrix(phi_hat, cfg.lambda);
  const auto coupling = [&](Index k) -> Matrix<Scalar> {
    return cfg.rho[static_cast<std::size_t>(k)] * (gain * phi_hat.block(k));
  };

  Matrix<Scalar> a = Matrix<Scalar>::Zero(m * n, m * n);
  Index col = 0;
  for (Index j = 1; j < dims.lu; ++j, col += m) a.block(0, col, m, m) = -coupling(dims.ly + j);
  for (Index k = 0; k < dims.ly; ++k, col += m) a.block(0, col, m, m) = -coupling(k);
  for (Index r = 1; r < n; ++r) a.block(r * m, (r - 1) * m, m, m).setIdentity();
  return a;
}

/// max |eigenvalue|, via Hessenberg reduction and shifted QR.
template <typename Derived>
typename Derived::Scalar spectral_radius(const Eigen::MatrixBase<Derived>& mat) {
  using Scalar = typename Derived::Scalar;
  detail::require(mat.rows() == mat.cols(), "spectral_radius: matrix must be square");
  if (mat.rows() == 0) return Scalar(0);
  const Eigen::EigenSolver<Matrix<Scalar>> solver(mat, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("spectral_radius: eigenvalue iteration did not converge");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

template <typename Scalar>
struct NormIdentity {
  Scalar lhs;  // |(Phi^T Phi + lambda I)^{-1}|_2
  Scalar rhs;  // 1 / (lambda + s_min)
};

/// Evaluates both sides of |(Phi^T Phi + lambda I)^{-1}|_2 = 1/(lambda + s_min),
/// s_min the smallest eigenvalue of Phi^T Phi. Each side takes its own route
/// (inverse + SVD versus symmetric eigen-decomposition).
template <typename Derived>
NormIdentity<typename Derived::Scalar> regularized_inverse_norm_identity_check(
    const Eigen::MatrixBase<Derived>& phi_block, typename Derived::Scalar lambda) {
  using Scalar = typename Derived::Scalar;
  const Index m = phi_block.cols();
  const Matrix<Scalar> gram = phi_block.transpose() * phi_block;
  const Matrix<Scalar> inv = (gram + lambda * Matrix<Scalar>::Identity(m, m)).inverse();
  const Eigen::JacobiSVD<Matrix<Scalar>> svd(inv);
  const Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(gram, Eigen::EigenvaluesOnly);
  return {svd.singularValues()(0), Scalar(1) / (lambda + eig.eigenvalues().minCoeff())};
}

/// Maximum absolute row sum.
template <typename Derived>
typename Derived::Scalar infinity_norm(const Eigen::MatrixBase<Derived>& mat) {
  return mat.cwiseAbs().rowwise().sum().maxCoeff();
}

/// d4 = |I - rho_key Phi_key G|_inf, with G the regularized gain of the
/// estimated key block. Pass the estimate as `phi_true_block` when the true
/// gain is unknown.
template <typename DerivedT, typename DerivedH>
typename DerivedT::Scalar d4_quantity(const Eigen::MatrixBase<DerivedT>& phi_true_block,
                                      const Eigen::MatrixBase<DerivedH>& phi_hat_block,
                                      typename DerivedT::Scalar lambda,
                                      typename DerivedT::Scalar rho_key) {
  using Scalar = typename DerivedT::Scalar;
  const Index m = phi_true_block.rows();
  const Matrix<Scalar> gain = gain_matrix(phi_hat_block, lambda);
  const Matrix<Scalar> closed = Matrix<Scalar>::Identity(m, m) - rho_key * (phi_true_block * gain);
  return infinity_norm(closed);
}

/// Computable atoms of the contraction argument for one time step.
template <typename Scalar>
struct StabilityRecord {
  Index step = 0;
  Scalar rho_a = 0;              // s(A(i))
  Scalar d4 = 0;                 // |I - rho_key Phi_key G|_inf
  bool d4_is_estimate = true;    // true when Phi_hat stood in for the true gain
  Scalar coupling_sum = 0;       // sum_{k != key} rho_k |G Phi_k|_inf
  Scalar m1_proxy = 0;           // (sum_{k != key} |G Phi_k|_inf)^{1/(ly+lu-1)}
  Scalar contraction_bound = 0;  // (max_{k != key} rho_k)^{1/(ly+lu-1)} * m1_proxy

  bool rho_a_contracting() const { return rho_a < Scalar(1); }
  bool d4_contracting() const { return d4 < Scalar(1); }
};

template <typename Scalar>
struct StabilityReport {
  std::vector<StabilityRecord<Scalar>> records;
  Scalar lambda_min = std::numeric_limits<Scalar>::infinity();
};

/// Evaluates one estimate. `true_key_block`, when given, replaces the
/// estimated input gain in d4.
template <typename Scalar>
StabilityRecord<Scalar> assess_step(const Pjm<Scalar>& phi_hat, const ControllerConfig<Scalar>& cfg,
                                    const std::optional<Matrix<Scalar>>& true_key_block = std::nullopt) {
  const auto& dims = phi_hat.dims();
  StabilityRecord<Scalar> rec;
  rec.rho_a = spectral_radius(build_companion_matrix(phi_hat, cfg));

  const Scalar rho_key = cfg.rho[static_cast<std::size_t>(dims.key_block())];
  const Matrix<Scalar> hat_key = phi_hat.key_block();
  rec.d4_is_estimate = !true_key_block.has_value();
  rec.d4 = d4_quantity(true_key_block.value_or(hat_key), hat_key, cfg.lambda, rho_key);

  const Matrix<Scalar> gain = gain_matrix(hat_key, cfg.lambda);
  Scalar plain_sum(0);
  Scalar rho_max(0);
  for (Index k = 0; k < dims.block_count(); ++k) {
    if (k == dims.key_block()) continue;
    const Scalar rho_k = cfg.rho[static_cast<std::size_t>(k)];
    const Scalar term = infinity_norm(gain * phi_hat.block(k));
    plain_sum += term;
    rec.coupling_sum += rho_k * term;
    rho_max = std::max(rho_max, rho_k);
  }
  const Scalar root = Scalar(1) / Scalar(dims.block_count() - 1);
  rec.m1_proxy = std::pow(plain_sum, root);
  rec.contraction_bound = std::pow(rho_max, root) * rec.m1_proxy;
  return rec;
}

namespace detail {

template <typename Scalar>
bool meets_target(std::span<const Pjm<Scalar>> trace, ControllerConfig<Scalar> cfg, Scalar lambda,
                  const std::optional<Matrix<Scalar>>& true_key_block) {
  cfg.lambda = lambda;
  const Scalar rho_key = cfg.rho[static_cast<std::size_t>(trace.front().dims().key_block())];
  for (const auto& phi : trace) {
    if (!(spectral_radius(build_companion_matrix(phi, cfg)) < Scalar(1))) return false;
    const Matrix<Scalar> hat_key = phi.key_block();
    if (!(d4_quantity(true_key_block.value_or(hat_key), hat_key, lambda, rho_key) < Scalar(1))) {
      return false;
    }
  }
  return true;
}

}  // namespace detail

/// Smallest lambda on a logarithmic grid over [1e-3, 1e6] for which every
/// estimate in `trace` gives s(A) < 1 and d4 < 1. Decades are scanned first;
/// the first passing decade is then refined over two significant figures
/// within the decade below it. Returns +inf when no grid point passes.
template <typename Scalar>
Scalar lambda_min_search(std::span<const Pjm<Scalar>> trace, const ControllerConfig<Scalar>& cfg,
                         const std::optional<Matrix<Scalar>>& true_key_block = std::nullopt) {
  if (trace.empty()) throw std::invalid_argument("lambda_min_search: empty trace");
  constexpr int first_decade = -3;
  constexpr int last_decade = 6;

  for (int e = first_decade; e <= last_decade; ++e) {
    const Scalar decade = std::pow(Scalar(10), Scalar(e));
    if (!detail::meets_target(trace, cfg, decade, true_key_block)) continue;
    if (e == first_decade) return decade;
    const Scalar below = std::pow(Scalar(10), Scalar(e - 1));
    for (int mantissa = 11; mantissa < 100; ++mantissa) {
      const Scalar candidate = below * Scalar(mantissa) / Scalar(10);
      if (detail::meets_target(trace, cfg, candidate, true_key_block)) return candidate;
    }
    return decade;
  }
  return std::numeric_limits<Scalar>::infinity();
}

}  // namespace mfac
