#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "mfac/core.hpp"

namespace mfac {

/// Discrete-time MIMO plant y(i+1) = C(y(i), ..., u(i), ...).
///
/// Subclasses supply the pure map `evaluate`; the base class keeps the sample
/// history the map consumes. Samples older than the seeded history are zero.
template <typename Scalar>
class Plant {
 public:
  using VectorType = Vector<Scalar>;
  using MatrixType = Matrix<Scalar>;

  virtual ~Plant() = default;

  virtual Index channels() const = 0;
  /// Number of past outputs y(i), ..., y(i-ny+1) the map reads.
  virtual Index output_depth() const = 0;
  /// Number of past inputs u(i), ..., u(i-nu+1) the map reads.
  virtual Index input_depth() const = 0;

  /// Column s of `y_args` is y(i-s), column s of `u_args` is u(i-s).
  virtual VectorType evaluate(const MatrixType& y_args, const MatrixType& u_args) const = 0;

  virtual std::unique_ptr<Plant> clone() const = 0;

  /// Constant PJM of an exact full-form linearization, if the plant has one
  /// for these orders.
  virtual std::optional<Pjm<Scalar>> true_pjm(const Dimensions&) const { return std::nullopt; }

  /// Seeds the history. Both spans are oldest first; the last output is y(i)
  /// and the last input u(i-1) for the first call to `step`.
  void reset(std::span<const VectorType> y_init, std::span<const VectorType> u_init) {
    const Index m = channels();
    y_args_ = MatrixType::Zero(m, output_depth());
    u_args_ = MatrixType::Zero(m, input_depth());
    for (const auto& y : y_init) shift_in(y_args_, y);
    for (const auto& u : u_init) shift_in(u_args_, u);
  }

  /// Applies u(i) and returns y(i+1).
  VectorType step(const VectorType& u) {
    shift_in(u_args_, u);
    VectorType next = evaluate(y_args_, u_args_);
    shift_in(y_args_, next);
    return next;
  }

  const MatrixType& output_args() const noexcept { return y_args_; }
  const MatrixType& input_args() const noexcept { return u_args_; }

 private:
  void shift_in(MatrixType& args, const VectorType& v) const {
    detail::require(v.size() == channels(), "Plant: sample size differs from channel count");
    for (Index c = args.cols() - 1; c > 0; --c) args.col(c) = args.col(c - 1);
    args.col(0) = v;
  }

  MatrixType y_args_;
  MatrixType u_args_;
};

struct Benchmark10Options {
  /// Replace the second 1.4 u2(i) term of y2 by 1.4 u2(i-2).
  bool y2_typo_fix = false;
  /// Use y2^2 instead of y1^2 in the y2 denominator.
  bool y2_denominator_fix = false;
};

/// Two-channel nonlinear benchmark plant.
template <typename Scalar>
class Benchmark10 final : public Plant<Scalar> {
 public:
  using typename Plant<Scalar>::VectorType;
  using typename Plant<Scalar>::MatrixType;

  explicit Benchmark10(Benchmark10Options options = {}) : options_(options) {
    this->reset(initial_outputs(), initial_inputs());
  }

  /// Printed initial values y(1..3), oldest first.
  static std::vector<VectorType> initial_outputs() { return {vec(0, 0), vec(1, 1), vec(0, 0)}; }
  /// Printed initial values u(1..2), oldest first.
  static std::vector<VectorType> initial_inputs() { return {vec(1, 1), vec(1, 0)}; }

  Index channels() const override { return 2; }
  Index output_depth() const override { return 3; }
  Index input_depth() const override { return 3; }
  const Benchmark10Options& options() const noexcept { return options_; }

  VectorType evaluate(const MatrixType& y, const MatrixType& u) const override {
    using std::cos;
    using std::sin;
    const Scalar y1 = y(0, 0), y1p = y(0, 1), y1pp = y(0, 2);
    const Scalar y2 = y(1, 0), y2p = y(1, 1), y2pp = y(1, 2);
    const Scalar u1 = u(0, 0), u1p = u(0, 1), u1pp = u(0, 2);
    const Scalar u2 = u(1, 0), u2p = u(1, 1), u2pp = u(1, 2);

    const Scalar half_sum = Scalar(0.5) * (y1 + y1p);
    const Scalar out1 = (Scalar(2.5) * y1 * y1p + Scalar(0.09) * u1 * u1p) / (1 + y1 * y1 + y1p * y1p) +
                        Scalar(1.2) * u1 + Scalar(1.6) * u1pp + Scalar(0.09) * u1 * u2p +
                        Scalar(0.5) * u2 + Scalar(0.7) * sin(half_sum) * cos(half_sum);

    const Scalar denom = options_.y2_denominator_fix ? 1 + y2 * y2 + y2p * y2p + y2pp * y2pp
                                                     : 1 + y1 * y1 + y1p * y1p + y1pp * y1pp;
    const Scalar last = options_.y2_typo_fix ? u2pp : u2;
    const Scalar out2 = Scalar(5) * y2 * y2p / denom + u2 + Scalar(1.1) * u2p + Scalar(1.4) * last +
                        Scalar(0.5) * u1;
    return vec(out1, out2);
  }

  std::unique_ptr<Plant<Scalar>> clone() const override { return std::make_unique<Benchmark10>(*this); }

 private:
  static VectorType vec(Scalar a, Scalar b) {
    VectorType v(2);
    v << a, b;
    return v;
  }

  Benchmark10Options options_;
};

/// y(i+1) = sum_k A_k y(i-k+1) + sum_k B_k u(i-k+1).
template <typename Scalar>
class LtiPlant final : public Plant<Scalar> {
 public:
  using typename Plant<Scalar>::VectorType;
  using typename Plant<Scalar>::MatrixType;

  LtiPlant(std::vector<MatrixType> a, std::vector<MatrixType> b) : a_(std::move(a)), b_(std::move(b)) {
    detail::require(!b_.empty(), "LtiPlant: at least one input matrix is required");
    const Index m = b_.front().rows();
    for (const auto& mat : a_) detail::require(mat.rows() == m && mat.cols() == m, "LtiPlant: A blocks must be m x m");
    for (const auto& mat : b_) detail::require(mat.rows() == m && mat.cols() == m, "LtiPlant: B blocks must be m x m");
    const Eigen::FullPivLU<MatrixType> lu(b_.front());
    if (!lu.isInvertible()) throw std::invalid_argument("LtiPlant: leading input matrix must be nonsingular");
    const std::vector<VectorType> y{VectorType::Zero(m)};
    this->reset(y, {});
  }

  Index channels() const override { return b_.front().rows(); }
  Index output_depth() const override { return std::max<Index>(1, static_cast<Index>(a_.size())); }
  Index input_depth() const override { return static_cast<Index>(b_.size()); }

  const std::vector<MatrixType>& output_coefficients() const noexcept { return a_; }
  const std::vector<MatrixType>& input_coefficients() const noexcept { return b_; }

  VectorType evaluate(const MatrixType& y, const MatrixType& u) const override {
    VectorType next = VectorType::Zero(channels());
    for (std::size_t k = 0; k < a_.size(); ++k) next.noalias() += a_[k] * y.col(static_cast<Index>(k));
    for (std::size_t k = 0; k < b_.size(); ++k) next.noalias() += b_[k] * u.col(static_cast<Index>(k));
    return next;
  }

  /// Coefficients laid out as PJM blocks, zero padded; empty if the orders are
  /// too small to hold them.
  std::optional<Pjm<Scalar>> true_pjm(const Dimensions& dims) const override {
    if (dims.m != channels() || dims.ly < static_cast<Index>(a_.size()) ||
        dims.lu < static_cast<Index>(b_.size())) {
      return std::nullopt;
    }
    Pjm<Scalar> phi(dims);
    for (std::size_t k = 0; k < a_.size(); ++k) phi.block(static_cast<Index>(k)) = a_[k];
    for (std::size_t k = 0; k < b_.size(); ++k) phi.block(dims.ly + static_cast<Index>(k)) = b_[k];
    return phi;
  }

  std::unique_ptr<Plant<Scalar>> clone() const override { return std::make_unique<LtiPlant>(*this); }

 private:
  std::vector<MatrixType> a_;
  std::vector<MatrixType> b_;
};

/// Benchmark reference: the target for step i+1 is
/// (5 sin(pi i/50) + 2 cos(pi i/20), 2 sin(pi i/50) + 5 cos(pi i/20)).
template <typename Scalar = double>
Vector<Scalar> reference_signals(Index i) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar slow = std::sin(pi * Scalar(i) / Scalar(50));
  const Scalar fast = std::cos(pi * Scalar(i) / Scalar(20));
  Vector<Scalar> r(2);
  r << 5 * slow + 2 * fast, 2 * slow + 5 * fast;
  return r;
}

}  // namespace mfac
