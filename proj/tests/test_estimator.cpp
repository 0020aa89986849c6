#include <random>

#include <gtest/gtest.h>

#include "mfac/estimator.hpp"

using namespace mfac;
using Vec = Vector<double>;
using Mat = Matrix<double>;

namespace {

EstimatorConfig<double> config(const Dimensions& dims, double mu, double eta) {
  EstimatorConfig<double> cfg;
  cfg.mu = mu;
  cfg.eta = eta;
  cfg.phi_init = Pjm<double>(dims);
  cfg.phi_init.key_block().setIdentity();
  cfg.phi_init.key_block() *= 0.1;
  return cfg;
}

}  // namespace

TEST(UpdatePjm, HandEvaluation) {
  const Dimensions dims(1, 1, 1);
  const auto cfg = config(dims, 1, 1);
  const auto next = update_pjm(Pjm<double>(dims), Vec::Constant(1, 1.0), DeltaRegressor<double>(Vec::Ones(2)), cfg);
  EXPECT_NEAR(next.flat()(0, 0), 1.0 / 3, 1e-15);
  EXPECT_NEAR(next.flat()(0, 1), 1.0 / 3, 1e-15);
}

TEST(UpdatePjm, ZeroRegressorIsNoOp) {
  const Dimensions dims(2, 1, 3);
  const auto cfg = config(dims, 1, 0.5);
  const Pjm<double> prev(dims, Mat::Random(2, 8));
  EXPECT_EQ(update_pjm(prev, Vec::Ones(2), DeltaRegressor<double>::zero(dims), cfg), prev);
}

TEST(UpdatePjm, ExactFixedPointOnZeroInnovation) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> small(-4, 4);
  const Dimensions dims(2, 2, 2);
  const auto cfg = config(dims, 1, 0.5);
  for (int trial = 0; trial < 200; ++trial) {
    // Dyadic integers keep Phi dL exact so the innovation is exactly zero.
    Pjm<double> prev(dims);
    for (Index k = 0; k < prev.flat().size(); ++k) prev.flat()(k) = small(rng) / 4.0;
    DeltaRegressor<double> dl(Vec(dims.regressor_size()));
    for (Index k = 0; k < dl.size(); ++k) dl.entries(k) = small(rng);
    const Vec dy = prev.flat() * dl.entries;
    EXPECT_EQ(update_pjm(prev, dy, dl, cfg), prev);
  }
}

TEST(UpdatePjm, BoundedStep) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> pos(0.01, 10);
  for (int trial = 0; trial < 1000; ++trial) {
    const Dimensions dims(1 + trial % 3, 1 + trial % 2, 1 + trial % 4);
    auto cfg = config(dims, pos(rng), std::min(2.0, pos(rng) / 5));
    Pjm<double> prev(dims);
    for (Index k = 0; k < prev.flat().size(); ++k) prev.flat()(k) = normal(rng);
    DeltaRegressor<double> dl(Vec(dims.regressor_size()));
    for (Index k = 0; k < dl.size(); ++k) dl.entries(k) = normal(rng) * pos(rng);
    Vec dy(dims.m);
    for (Index k = 0; k < dy.size(); ++k) dy(k) = normal(rng);

    const double innovation = (dy - prev.flat() * dl.entries).norm();
    const double step = (update_pjm(prev, dy, dl, cfg).flat() - prev.flat()).norm();
    const double tight = cfg.eta * innovation * dl.norm() / (cfg.mu + dl.squared_norm());
    const double loose = cfg.eta * innovation / (2 * std::sqrt(cfg.mu));
    EXPECT_LE(step, tight * (1 + 1e-12));
    EXPECT_LE(tight, loose * (1 + 1e-12));
  }
}

TEST(UpdatePjm, RejectsMismatchedSizes) {
  const Dimensions dims(2, 1, 1);
  const auto cfg = config(dims, 1, 0.5);
  EXPECT_THROW(update_pjm(Pjm<double>(dims), Vec::Ones(3), DeltaRegressor<double>::zero(dims), cfg), DimensionError);
}

TEST(MaybeReset, DisabledIsIdentity) {
  const Dimensions dims(2, 1, 3);
  auto cfg = config(dims, 1, 0.5);
  cfg.reset_enabled = false;
  const Pjm<double> phi(dims);
  EXPECT_EQ(maybe_reset(phi, cfg, DeltaRegressor<double>::zero(dims)), phi);
}

TEST(MaybeReset, StalledRegressorRestoresInit) {
  const Dimensions dims(2, 1, 3);
  const auto cfg = config(dims, 1, 0.5);
  Pjm<double> phi(dims, Mat::Random(2, 8));
  phi.key_block() = Mat::Identity(2, 2);
  EXPECT_EQ(maybe_reset(phi, cfg, DeltaRegressor<double>::zero(dims)), cfg.phi_init);
}

TEST(MaybeReset, SignFlipRestoresInit) {
  const Dimensions dims(2, 1, 3);
  const auto cfg = config(dims, 1, 0.5);
  Pjm<double> phi = cfg.phi_init;
  phi.key_block() = -0.1 * Mat::Identity(2, 2);
  const DeltaRegressor<double> dl(Vec::Ones(8));
  EXPECT_EQ(maybe_reset(phi, cfg, dl), cfg.phi_init);
}

TEST(MaybeReset, CollapsedGainRestoresInit) {
  const Dimensions dims(2, 1, 1);
  const auto cfg = config(dims, 1, 0.5);
  Pjm<double> phi(dims);
  phi.key_block() = 1e-7 * Mat::Identity(2, 2);
  EXPECT_EQ(maybe_reset(phi, cfg, DeltaRegressor<double>(Vec::Ones(4))), cfg.phi_init);
}

TEST(MaybeReset, HealthyEstimateKept) {
  const Dimensions dims(2, 1, 1);
  const auto cfg = config(dims, 1, 0.5);
  Pjm<double> phi(dims, Mat::Random(2, 4));
  phi.key_block() = Mat{{0.4, 0.3}, {-0.2, 0.9}};
  EXPECT_EQ(maybe_reset(phi, cfg, DeltaRegressor<double>(Vec::Ones(4))), phi);
}

TEST(EstimatorConfig, Validation) {
  EstimatorConfig<double> cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.eta = 2.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.eta = 1;
  cfg.mu = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
