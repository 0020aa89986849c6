#pragma once

#include <algorithm>
#include <deque>
#include <utility>

#include "mfac/types.hpp"

namespace mfac {

/// Pseudo-Jacobian matrix of the full-form dynamic linearization.
///
/// Stored flat as an m x m(ly+lu) matrix. Block k (zero based) is the m x m
/// column slab starting at column k*m: blocks 0..ly-1 multiply the output
/// increments dy(i), ..., dy(i-ly+1); blocks ly..ly+lu-1 multiply the input
/// increments du(i), ..., du(i-lu+1). Block `ly` is the current-input gain.
template <typename Scalar>
class Pjm {
 public:
  using MatrixType = Matrix<Scalar>;

  Pjm() = default;
  explicit Pjm(const Dimensions& dims)
      : dims_(dims), flat_(MatrixType::Zero(dims.m, dims.regressor_size())) {}

  /// Builds from the flat m x m(ly+lu) layout. Throws on shape mismatch.
  Pjm(const Dimensions& dims, MatrixType flat) : dims_(dims), flat_(std::move(flat)) {
    detail::require(flat_.rows() == dims_.m && flat_.cols() == dims_.regressor_size(),
                    "Pjm: flat matrix must be m x m(ly+lu)");
  }

  const Dimensions& dims() const noexcept { return dims_; }
  const MatrixType& flat() const noexcept { return flat_; }
  MatrixType& flat() noexcept { return flat_; }

  auto block(Index k) const { return flat_.middleCols(k * dims_.m, dims_.m); }
  auto block(Index k) { return flat_.middleCols(k * dims_.m, dims_.m); }

  auto key_block() const { return block(dims_.key_block()); }
  auto key_block() { return block(dims_.key_block()); }

  /// Largest spectral norm over the blocks; compare against a caller bound.
  Scalar max_block_norm() const {
    Scalar worst(0);
    for (Index k = 0; k < dims_.block_count(); ++k) {
      worst = std::max(worst, MatrixType(block(k)).operatorNorm());
    }
    return worst;
  }

  bool bounded_by(Scalar a) const { return max_block_norm() <= a; }

  friend bool operator==(const Pjm& lhs, const Pjm& rhs) {
    return lhs.dims_ == rhs.dims_ && lhs.flat_ == rhs.flat_;
  }

 private:
  Dimensions dims_{};
  MatrixType flat_;
};

template <typename Scalar>
Matrix<Scalar> pjm_flatten(const Pjm<Scalar>& phi) {
  return phi.flat();
}

template <typename Scalar, typename Derived>
Pjm<Scalar> pjm_from_flat(const Eigen::MatrixBase<Derived>& flat, const Dimensions& dims) {
  return Pjm<Scalar>(dims, Matrix<Scalar>(flat));
}

/// Stacked increments [dy(i); ...; dy(i-ly+1); du(i); ...; du(i-lu+1)].
template <typename Scalar>
struct DeltaRegressor {
  Vector<Scalar> entries;

  DeltaRegressor() = default;
  explicit DeltaRegressor(Vector<Scalar> v) : entries(std::move(v)) {}
  static DeltaRegressor zero(const Dimensions& dims) {
    return DeltaRegressor(Vector<Scalar>::Zero(dims.regressor_size()));
  }

  Index size() const noexcept { return entries.size(); }
  auto segment(const Dimensions& dims, Index k) const { return entries.segment(k * dims.m, dims.m); }
  Scalar squared_norm() const { return entries.squaredNorm(); }
  Scalar norm() const { return entries.norm(); }
};

/// Recent absolute output and input samples.
///
/// Increments are derived on demand; a sample with no predecessor has a zero
/// increment. Output lag 0 refers to the newest output and input lag 0 to the
/// newest input, which need not share a time index.
template <typename Scalar>
class HistoryWindow {
 public:
  using VectorType = Vector<Scalar>;

  HistoryWindow() = default;
  HistoryWindow(Index m, Index output_capacity, Index input_capacity)
      : m_(m), y_cap_(output_capacity), u_cap_(input_capacity) {
    detail::require(m >= 1 && output_capacity >= 1 && input_capacity >= 1,
                    "HistoryWindow: sizes must be positive");
  }

  /// Capacity sufficient for both regressor assembly and the control law.
  static HistoryWindow for_dims(const Dimensions& dims) {
    return HistoryWindow(dims.m, dims.ly + 1, dims.lu + 1);
  }

  Index channels() const noexcept { return m_; }
  Index output_count() const noexcept { return static_cast<Index>(y_.size()); }
  Index input_count() const noexcept { return static_cast<Index>(u_.size()); }

  void push_output(const VectorType& y) { push(y_, y, y_cap_); }
  void push_input(const VectorType& u) { push(u_, u, u_cap_); }

  const VectorType& output(Index lag = 0) const { return at(y_, lag); }
  const VectorType& input(Index lag = 0) const { return at(u_, lag); }

  VectorType delta_output(Index lag) const { return delta(y_, lag); }
  VectorType delta_input(Index lag) const { return delta(u_, lag); }

 private:
  void push(std::deque<VectorType>& buf, const VectorType& v, Index cap) {
    detail::require(v.size() == m_, "HistoryWindow: sample size differs from channel count");
    buf.push_front(v);
    if (static_cast<Index>(buf.size()) > cap) buf.pop_back();
  }

  const VectorType& at(const std::deque<VectorType>& buf, Index lag) const {
    detail::require(lag >= 0 && lag < static_cast<Index>(buf.size()),
                    "HistoryWindow: lag beyond stored samples");
    return buf[static_cast<std::size_t>(lag)];
  }

  VectorType delta(const std::deque<VectorType>& buf, Index lag) const {
    const auto n = static_cast<Index>(buf.size());
    if (lag + 1 >= n) return VectorType::Zero(m_);
    return buf[static_cast<std::size_t>(lag)] - buf[static_cast<std::size_t>(lag + 1)];
  }

  Index m_ = 1;
  Index y_cap_ = 1;
  Index u_cap_ = 1;
  std::deque<VectorType> y_;
  std::deque<VectorType> u_;
};

/// Assembles dL(i), taking the newest output and newest input as time i.
template <typename Scalar>
DeltaRegressor<Scalar> assemble_delta_regressor(const HistoryWindow<Scalar>& hist,
                                                const Dimensions& dims) {
  detail::require(hist.channels() == dims.m, "assemble_delta_regressor: channel count mismatch");
  Vector<Scalar> dl(dims.regressor_size());
  for (Index k = 0; k < dims.ly; ++k) dl.segment(k * dims.m, dims.m) = hist.delta_output(k);
  for (Index j = 0; j < dims.lu; ++j) dl.segment((dims.ly + j) * dims.m, dims.m) = hist.delta_input(j);
  return DeltaRegressor<Scalar>(std::move(dl));
}

/// One-step prediction y(i+1) = y(i) + Phi dL(i).
template <typename Scalar, typename Derived>
Vector<Scalar> predict_one_step(const Pjm<Scalar>& phi, const DeltaRegressor<Scalar>& dl,
                                const Eigen::MatrixBase<Derived>& y_now) {
  detail::require(dl.size() == phi.dims().regressor_size() && y_now.size() == phi.dims().m,
                  "predict_one_step: dimension mismatch");
  return y_now + phi.flat() * dl.entries;
}

}  // namespace mfac
