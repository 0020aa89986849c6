#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mfac {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Raised when vector or matrix sizes disagree with the configured dimensions.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a closed loop leaves the divergence guard.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, Index step)
      : std::runtime_error(what), step_(step) {}
  Index step() const noexcept { return step_; }

 private:
  Index step_;
};

/// Raised when a numerical routine fails to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sizes of a square MIMO full-form dynamic linearization.
///
/// `m` is the channel count (inputs == outputs), `ly` and `lu` the output and
/// input pseudo orders. The regressor and every PJM row have `m * (ly + lu)`
/// entries.
struct Dimensions {
  Index m = 1;
  Index ly = 1;
  Index lu = 1;

  Dimensions() = default;
  Dimensions(Index m_, Index ly_, Index lu_) : m(m_), ly(ly_), lu(lu_) {
    if (m < 1 || ly < 1 || lu < 1) {
      throw DimensionError("Dimensions: m, ly and lu must all be >= 1");
    }
  }

  Index block_count() const noexcept { return ly + lu; }
  Index regressor_size() const noexcept { return m * (ly + lu); }
  /// Zero-based block index of the current-input gain block.
  Index key_block() const noexcept { return ly; }

  friend bool operator==(const Dimensions&, const Dimensions&) = default;
};

namespace detail {

inline void require(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}

}  // namespace detail

}  // namespace mfac
