#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "sfd/attention.hpp"
#include "sfd/error.hpp"
#include "sfd/ops.hpp"

using namespace sfd;
using namespace sfd::attention;

namespace {

Tensor random_map(Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = n(rng);
  return Tensor::from(std::move(shape), std::move(v));
}

}  // namespace

TEST(SeGate, ZeroWeightsHalveTheInput) {
  const auto params = SEGateParams::zeros(8, 4);
  const auto x = random_map({2, 8, 3, 3}, 1);
  const auto y = se_gate(x, params);
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_DOUBLE_EQ(y.data()[i], 0.5 * x.data()[i]);
}

TEST(SeGate, WeightsInOpenUnitIntervalAndOutputIsWeightTimesInput) {
  Rng rng(2);
  const auto params = SEGateParams::make(8, 2, rng);
  const auto v = random_map({5, 8}, 3);
  const auto w = excitation(v, params);
  for (double g : w.data()) {
    EXPECT_GT(g, 0.0);
    EXPECT_LT(g, 1.0);
  }
  const auto y = se_gate(v, params);
  for (std::size_t i = 0; i < v.numel(); ++i) EXPECT_DOUBLE_EQ(y.data()[i], w.data()[i] * v.data()[i]);
}

TEST(SeGate, SymmetricChannelsGetIdenticalGates) {
  auto params = SEGateParams::zeros(4, 2);
  // Every channel feeds the bottleneck identically and receives the same expansion.
  for (auto& x : params.reduce.mutable_data()) x = 0.3;
  for (auto& x : params.expand.mutable_data()) x = -0.7;
  const auto x = Tensor::from({1, 4}, {1.0, 1.0, 1.0, 1.0});
  const auto w = excitation(x, params);
  for (std::size_t c = 1; c < 4; ++c) EXPECT_EQ(w.data()[c], w.data()[0]);
}

TEST(SeGate, RejectsBadShapes) {
  Rng rng(4);
  EXPECT_THROW(SEGateParams::make(6, 4, rng), ConfigError);
  const auto params = SEGateParams::make(8, 4, rng);
  EXPECT_THROW(se_gate(random_map({1, 6}, 5), params), InvalidInput);
}

TEST(FcaGate, DcSqueezeIsScaledAveragePool) {
  Rng rng(6);
  const auto params = FcaGateParams::make(8, 4, {{0, 0}}, rng);
  const auto x = random_map({3, 8, 5, 4}, 7);
  const auto squeeze = fca_squeeze(x, params);
  const auto gap = ops::global_avg_pool(x);
  const double factor = dc_squeeze_factor(5, 4);
  EXPECT_DOUBLE_EQ(factor, std::sqrt(20.0));
  for (std::size_t i = 0; i < gap.numel(); ++i) EXPECT_NEAR(squeeze.data()[i], factor * gap.data()[i], 1e-12);
}

TEST(FcaGate, DcGateEqualsSeGateWithRescaledReduction) {
  Rng rng(8);
  const auto se = SEGateParams::make(8, 4, rng);
  FcaGateParams fca{{{0, 0}}, se.clone()};
  const double factor = dc_squeeze_factor(3, 3);
  for (auto& v : fca.excitation.reduce.mutable_data()) v /= factor;
  const auto x = random_map({2, 8, 3, 3}, 9);
  const auto a = fca_gate(x, fca);
  const auto b = se_gate(x, se);
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_NEAR(a.data()[i], b.data()[i], 1e-12);
}

TEST(FcaGate, SinglePixelMapSqueezesToRawValue) {
  Rng rng(10);
  const auto params = FcaGateParams::make(4, 2, {{0, 0}}, rng);
  const auto x = random_map({2, 4, 1, 1}, 11);
  const auto s = fca_squeeze(x, params);
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_NEAR(s.data()[i], x.data()[i], 1e-15);
}

TEST(FcaGate, NonDcIndexMatchesDirectBasisProjection) {
  Rng rng(12);
  const auto params = FcaGateParams::make(4, 2, {{0, 1}}, rng);
  const auto x = random_map({1, 4, 4, 4}, 13);
  const auto s = fca_squeeze(x, params);
  for (std::size_t c = 0; c < 4; ++c) {
    double expected = 0.0;
    for (std::size_t m = 0; m < 4; ++m)
      for (std::size_t n = 0; n < 4; ++n) expected += x.data()[(c * 4 + m) * 4 + n] * oracle::dct_basis_2d(0, 1, m, n, 4, 4);
    EXPECT_NEAR(s.data()[c], expected, 1e-12);
  }
}

TEST(FcaGate, FrequencyGroupsAreContiguous) {
  Rng rng(14);
  const auto idx = lowest_frequency_indices(4, 2, 2);
  ASSERT_EQ(idx.size(), 4u);
  EXPECT_EQ(idx[0], (FrequencyIndex{0, 0}));
  EXPECT_EQ(idx[1], (FrequencyIndex{0, 1}));
  EXPECT_EQ(idx[2], (FrequencyIndex{1, 0}));
  EXPECT_EQ(idx[3], (FrequencyIndex{1, 1}));
  const auto params = FcaGateParams::make(8, 2, idx, rng);
  for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(params.group_of(c), c / 2);
  EXPECT_THROW(params.basis(1, 1), InvalidInput);
  EXPECT_THROW(lowest_frequency_indices(5, 2, 2), InvalidInput);
}

TEST(Afa, BranchesReduceToSeWithDcIndices) {
  Rng rng(15);
  const auto se = SEGateParams::make(8, 4, rng);
  FcaGateParams fca{{{0, 0}}, se.clone()};
  for (auto& v : fca.excitation.reduce.mutable_data()) v /= dc_squeeze_factor(2, 2);
  const auto x = random_map({3, 8, 2, 2}, 16);
  const auto out = afa_weight(x, se, fca);
  ASSERT_EQ(out.se_features.shape(), (Shape{3, 8}));
  ASSERT_EQ(out.fca_features.shape(), (Shape{3, 8}));
  for (std::size_t i = 0; i < out.se_features.numel(); ++i)
    EXPECT_NEAR(out.se_features.data()[i], out.fca_features.data()[i], 1e-12);

  const auto zero = afa_weight(Tensor::zeros({1, 8, 2, 2}), se, fca);
  for (double v : zero.se_features.data()) EXPECT_EQ(v, 0.0);
  for (double v : zero.fca_features.data()) EXPECT_EQ(v, 0.0);
}

TEST(Afa, GateParameterGradients) {
  Rng rng(17);
  auto pair = AttentionPair::make(4, 2, lowest_frequency_indices(2, 3, 3), rng);
  const auto x = random_map({2, 4, 3, 3}, 18);
  const auto r = check::check_gradients(pair.parameters(), [&] {
    const auto out = pair.forward(x);
    return ops::add(ops::sum(ops::square(out.se_features)), ops::sum(ops::abs(out.fca_features)));
  });
  EXPECT_LT(r.max_relative_error, 1e-3) << r.worst;
}
