#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mfac/plants.hpp"

namespace mfac {

/// Pure plant map: columns of the first argument are y(i), y(i-1), ...; of the
/// second u(i), u(i-1), ....
template <typename Scalar>
using PlantMap = std::function<Vector<Scalar>(const Matrix<Scalar>&, const Matrix<Scalar>&)>;

/// Argument point of a plant map.
template <typename Scalar>
struct PlantArgs {
  Matrix<Scalar> y;
  Matrix<Scalar> u;
};

/// Central-difference Jacobian blocks dC/dy(i-k), k < ly, and dC/du(i-j),
/// j < lu, at `point`, returned in PJM block order.
template <typename Scalar>
Pjm<Scalar> mean_value_jacobian_blocks(const PlantMap<Scalar>& plant_fn, const PlantArgs<Scalar>& point,
                                       const Dimensions& dims, Scalar h = Scalar(1e-5)) {
  if (!(h > 0)) throw std::invalid_argument("mean_value_jacobian_blocks: h must be > 0");
  detail::require(point.y.rows() == dims.m && point.u.rows() == dims.m && point.y.cols() >= dims.ly &&
                      point.u.cols() >= dims.lu,
                  "mean_value_jacobian_blocks: point narrower than pseudo orders");

  Pjm<Scalar> jac(dims);
  const auto difference = [&](bool output, Index slot, Index channel) {
    PlantArgs<Scalar> plus = point;
    PlantArgs<Scalar> minus = point;
    (output ? plus.y : plus.u)(channel, slot) += h;
    (output ? minus.y : minus.u)(channel, slot) -= h;
    Vector<Scalar> d = (plant_fn(plus.y, plus.u) - plant_fn(minus.y, minus.u)) / (2 * h);
    if (!d.allFinite()) throw NumericalError("mean_value_jacobian_blocks: non-finite plant value");
    return d;
  };
  for (Index k = 0; k < dims.ly; ++k) {
    for (Index q = 0; q < dims.m; ++q) jac.block(k).col(q) = difference(true, k, q);
  }
  for (Index j = 0; j < dims.lu; ++j) {
    for (Index q = 0; q < dims.m; ++q) jac.block(dims.ly + j).col(q) = difference(false, j, q);
  }
  return jac;
}

/// Gauss-Legendre nodes and weights on [0, 1] (Golub-Welsch).
template <typename Scalar>
std::pair<Vector<Scalar>, Vector<Scalar>> gauss_legendre_unit(Index n) {
  detail::require(n >= 1, "gauss_legendre_unit: need at least one node");
  Matrix<Scalar> jacobi = Matrix<Scalar>::Zero(n, n);
  for (Index k = 1; k < n; ++k) {
    const Scalar kk(k);
    const Scalar beta = kk / std::sqrt(4 * kk * kk - 1);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  const Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(jacobi);
  Vector<Scalar> nodes = (eig.eigenvalues().array() + 1) / 2;
  Vector<Scalar> weights = eig.eigenvectors().row(0).transpose().array().square();
  return {nodes, weights};
}

/// Jacobian blocks averaged along the straight segment from `from` to `to`.
///
/// For a smooth map C(to) - C(from) equals this average times the argument
/// difference, which is the vector form of the mean value step.
template <typename Scalar>
Pjm<Scalar> segment_mean_jacobian_blocks(const PlantMap<Scalar>& plant_fn, const PlantArgs<Scalar>& from,
                                         const PlantArgs<Scalar>& to, const Dimensions& dims,
                                         Scalar h = Scalar(1e-5), Index nodes = 16) {
  const auto [t, w] = gauss_legendre_unit<Scalar>(nodes);
  Pjm<Scalar> mean(dims);
  for (Index q = 0; q < nodes; ++q) {
    const PlantArgs<Scalar> at{from.y + t(q) * (to.y - from.y), from.u + t(q) * (to.u - from.u)};
    mean.flat() += w(q) * mean_value_jacobian_blocks(plant_fn, at, dims, h).flat();
  }
  return mean;
}

/// Minimal Frobenius-norm eta with eta dL = psi: eta = psi dL^T / |dL|^2.
template <typename Scalar, typename Derived>
Matrix<Scalar> solve_eta_min_norm(const Eigen::MatrixBase<Derived>& psi, const DeltaRegressor<Scalar>& dl) {
  const Scalar energy = dl.squared_norm();
  if (energy == Scalar(0)) throw std::invalid_argument("solve_eta_min_norm: regressor increment is zero");
  return psi * dl.entries.transpose() / energy;
}

/// Recorded plant run: y[t+1] is the response to u[t]; samples before t = 0
/// are zero.
template <typename Scalar>
struct PlantTrajectory {
  std::vector<Vector<Scalar>> y;
  std::vector<Vector<Scalar>> u;
};

/// Runs `plant` from zero history through `inputs`.
template <typename Scalar>
PlantTrajectory<Scalar> record_open_loop(Plant<Scalar>& plant, std::span<const Vector<Scalar>> inputs) {
  const std::vector<Vector<Scalar>> y0{Vector<Scalar>::Zero(plant.channels())};
  plant.reset(y0, {});
  PlantTrajectory<Scalar> traj;
  traj.y.push_back(y0.front());
  for (const auto& u : inputs) {
    traj.u.push_back(u);
    traj.y.push_back(plant.step(u));
  }
  return traj;
}

namespace detail {

template <typename Scalar>
PlantArgs<Scalar> args_at(const PlantTrajectory<Scalar>& traj, Index t, Index y_width, Index u_width) {
  const Index m = traj.y.front().size();
  PlantArgs<Scalar> args{Matrix<Scalar>::Zero(m, y_width), Matrix<Scalar>::Zero(m, u_width)};
  for (Index s = 0; s < y_width && t - s >= 0; ++s) args.y.col(s) = traj.y[static_cast<std::size_t>(t - s)];
  for (Index s = 0; s < u_width && t - s >= 0; ++s) args.u.col(s) = traj.u[static_cast<std::size_t>(t - s)];
  return args;
}

}  // namespace detail

/// Checks dy(t+1) = Phi(t) dL(t) along `traj`, with Phi(t) the segment-mean
/// Jacobian of the leading ly output and lu input slots plus the minimal-norm
/// eta absorbing the change of the remaining slots. Returns the largest
/// residual norm over steps with nonzero dL(t).
template <typename Scalar>
Scalar ffdl_residual_check(const Plant<Scalar>& plant, const PlantTrajectory<Scalar>& traj,
                           const Dimensions& dims, Scalar h = Scalar(1e-5)) {
  detail::require(plant.channels() == dims.m, "ffdl_residual_check: channel count mismatch");
  detail::require(traj.y.size() == traj.u.size() + 1, "ffdl_residual_check: y must have one more sample than u");
  const Index y_width = std::max(plant.output_depth(), dims.ly);
  const Index u_width = std::max(plant.input_depth(), dims.lu);
  const PlantMap<Scalar> fn = [&plant](const Matrix<Scalar>& y, const Matrix<Scalar>& u) {
    return plant.evaluate(y.leftCols(plant.output_depth()), u.leftCols(plant.input_depth()));
  };

  Scalar worst(0);
  bool checked = false;
  const auto steps = static_cast<Index>(traj.u.size());
  for (Index t = 1; t < steps; ++t) {
    const auto now = detail::args_at(traj, t, y_width, u_width);
    const auto prev = detail::args_at(traj, t - 1, y_width, u_width);

    // Leading slots from the previous step, trailing slots from the current one.
    PlantArgs<Scalar> mixed = now;
    mixed.y.leftCols(dims.ly) = prev.y.leftCols(dims.ly);
    mixed.u.leftCols(dims.lu) = prev.u.leftCols(dims.lu);

    Vector<Scalar> dl(dims.regressor_size());
    for (Index k = 0; k < dims.ly; ++k) dl.segment(k * dims.m, dims.m) = now.y.col(k) - prev.y.col(k);
    for (Index j = 0; j < dims.lu; ++j) dl.segment((dims.ly + j) * dims.m, dims.m) = now.u.col(j) - prev.u.col(j);
    const DeltaRegressor<Scalar> delta(dl);
    if (delta.squared_norm() == Scalar(0)) continue;

    const Vector<Scalar> psi = fn(mixed.y, mixed.u) - fn(prev.y, prev.u);
    Pjm<Scalar> phi = segment_mean_jacobian_blocks(fn, mixed, now, dims, h);
    phi.flat() += solve_eta_min_norm(psi, delta);

    const Vector<Scalar> dy = traj.y[static_cast<std::size_t>(t + 1)] - traj.y[static_cast<std::size_t>(t)];
    worst = std::max(worst, (dy - phi.flat() * delta.entries).norm());
    checked = true;
  }
  if (!checked) throw std::invalid_argument("ffdl_residual_check: every regressor increment is zero");
  return worst;
}

}  // namespace mfac
