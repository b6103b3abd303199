#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "gradcheck.hpp"
#include "sfd/continual.hpp"
#include "sfd/error.hpp"
#include "sfd/ops.hpp"

using namespace sfd;
using namespace sfd::continual;

namespace {

Tensor random_rows(std::size_t b, std::size_t d, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  std::vector<double> v(b * d);
  for (auto& x : v) x = n(rng);
  return Tensor::from({b, d}, std::move(v));
}

ImportanceMap importance(ImportanceKind kind, const NamedTensors& like, double value) {
  ImportanceMap m{kind, {}};
  for (const auto& [name, t] : like) m.values.emplace_back(name, Tensor::full(t.shape(), value));
  return m;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST(Method, ParsesBothSpellings) {
  EXPECT_EQ(parse_method("E-EWC"), Method::EWC);
  EXPECT_EQ(parse_method("E_SFDNet"), Method::E_SFDNet);
  EXPECT_EQ(parse_method("E-SFDNet"), Method::E_SFDNet);
  EXPECT_EQ(parse_method("SFDNet"), Method::SFDNet);
  EXPECT_EQ(parse_method("FT"), Method::FT);
  EXPECT_FALSE(parse_method("iCaRL").has_value());
  for (auto m : {Method::FT, Method::LWF, Method::EWC, Method::MAS, Method::SDC, Method::SFDNet, Method::E_SFDNet})
    EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_TRUE(uses_sfdnet(Method::E_SFDNet));
  EXPECT_FALSE(uses_sfdnet(Method::SDC));
}

TEST(TotalLoss, SumAndNonFinite) {
  EXPECT_EQ(total_loss(0.0, 0.0), 0.0);
  EXPECT_EQ(total_loss(1.5, 0.5), 2.0);
  EXPECT_EQ(total_loss(Tensor::scalar(1.5), Tensor::scalar(0.5)).item(), 2.0);
  EXPECT_THROW(total_loss(std::numeric_limits<double>::infinity(), 0.0), NumericError);
  EXPECT_THROW(total_loss(Tensor::scalar(std::nan("")), Tensor::scalar(0.0)), NumericError);
}

TEST(Lwf, Examples) {
  const auto z = random_rows(3, 4, 1);
  EXPECT_EQ(lwf_loss(z, z).item(), 0.0);
  EXPECT_DOUBLE_EQ(lwf_loss(Tensor::from({1, 2}, {3.0, 4.0}), Tensor::zeros({1, 2})).item(), 5.0);
  EXPECT_GE(lwf_loss(z, random_rows(3, 4, 2)).item(), 0.0);
  EXPECT_THROW(lwf_loss(z, random_rows(2, 4, 3)), InvalidInput);
}

TEST(Ewc, Examples) {
  const NamedTensors cur{{"w", Tensor::from({1}, {5.0})}};
  const NamedTensors prev{{"w", Tensor::from({1}, {2.0})}};
  EXPECT_DOUBLE_EQ(ewc_loss(cur, prev, importance(ImportanceKind::fisher, cur, 2.0)).item(), 9.0);
  EXPECT_DOUBLE_EQ(ewc_loss(cur, prev, importance(ImportanceKind::fisher, cur, 4.0)).item(), 18.0);
  EXPECT_EQ(ewc_loss(cur, cur, importance(ImportanceKind::fisher, cur, 2.0)).item(), 0.0);
  EXPECT_THROW(ewc_loss(cur, prev, importance(ImportanceKind::mas, cur, 2.0)), InvalidInput);
  const NamedTensors wide{{"w", Tensor::from({2}, {5.0, 1.0})}};
  EXPECT_THROW(ewc_loss(wide, prev, importance(ImportanceKind::fisher, prev, 1.0)), InvalidInput);
}

TEST(Mas, Examples) {
  const NamedTensors cur{{"w", Tensor::from({1}, {1.0})}};
  const NamedTensors prev{{"w", Tensor::from({1}, {2.0})}};
  EXPECT_DOUBLE_EQ(mas_loss(cur, prev, importance(ImportanceKind::mas, cur, 4.0)).item(), 2.0);
  EXPECT_EQ(mas_loss(cur, cur, importance(ImportanceKind::mas, cur, 4.0)).item(), 0.0);
  EXPECT_THROW(mas_loss(cur, prev, importance(ImportanceKind::fisher, cur, 4.0)), InvalidInput);
}

TEST(Importance, FisherOfQuadratic) {
  const auto theta = Tensor::from({1}, {2.0}, true);
  const NamedTensors params{{"theta", theta}};
  const auto f = estimate_fisher(params, 3, [&](std::size_t) { return ops::scale(ops::sum(ops::square(theta)), 0.5); });
  EXPECT_EQ(f.kind, ImportanceKind::fisher);
  EXPECT_DOUBLE_EQ(f.values[0].second.data()[0], 4.0);
  EXPECT_THROW(estimate_fisher(params, 0, [&](std::size_t) { return ops::sum(theta); }), InvalidInput);
}

TEST(Importance, FisherVanishesAtMinimum) {
  const auto theta = Tensor::from({2}, {0.0, 0.0}, true);
  const NamedTensors params{{"theta", theta}};
  const auto f = estimate_fisher(params, 2, [&](std::size_t) { return ops::sum(ops::square(theta)); });
  for (double v : f.values[0].second.data()) EXPECT_EQ(v, 0.0);
}

TEST(Importance, MasOfLinearOutput) {
  const auto theta = Tensor::from({1}, {1.0}, true);
  const NamedTensors params{{"theta", theta}};
  const auto m = mas_importance(params, 1, [&](std::size_t) { return ops::scale(theta, 2.0); });
  EXPECT_EQ(m.kind, ImportanceKind::mas);
  EXPECT_DOUBLE_EQ(m.values[0].second.data()[0], 8.0);
  const auto constant = mas_importance(params, 2, [&](std::size_t) { return Tensor::from({1}, {3.0}); });
  for (double v : constant.values[0].second.data()) EXPECT_EQ(v, 0.0);
}

TEST(Importance, EntriesNonNegativeAndAccumulate) {
  auto w = random_rows(3, 2, 4);
  w.set_requires_grad(true);
  const NamedTensors params{{"w", w}};
  const auto x = random_rows(5, 3, 5);
  auto f = estimate_fisher(params, 5, [&](std::size_t i) {
    const std::size_t row[] = {i};
    return ops::sum(ops::matmul(ops::gather_rows(x, row), w));
  });
  auto m = mas_importance(params, 5, [&](std::size_t i) {
    const std::size_t row[] = {i};
    return ops::matmul(ops::gather_rows(x, row), w);
  });
  for (double v : f.values[0].second.data()) EXPECT_GE(v, 0.0);
  for (double v : m.values[0].second.data()) EXPECT_GE(v, 0.0);
  const double before = f.values[0].second.data()[0];
  f.accumulate(f);
  EXPECT_DOUBLE_EQ(f.values[0].second.data()[0], 2.0 * before);
  EXPECT_THROW(f.accumulate(m), InvalidInput);
}

TEST(TripletLoss, Examples) {
  const auto a = Tensor::from({1, 1}, {0.0});
  EXPECT_EQ(triplet_loss(a, Tensor::from({1, 1}, {1.0}), Tensor::from({1, 1}, {-1.0}), 0.0).item(), 0.0);
  EXPECT_EQ(triplet_loss(a, Tensor::from({1, 1}, {1.0}), Tensor::from({1, 1}, {3.0}), 1.0).item(), 0.0);
  EXPECT_DOUBLE_EQ(triplet_loss(a, Tensor::from({1, 1}, {2.0}), Tensor::from({1, 1}, {-1.0}), 0.5).item(), 1.5);
  EXPECT_THROW(triplet_loss(a, Tensor::zeros({1, 2}), a, 0.5), InvalidInput);
}

TEST(Combined, WeightedSumForRegularizedMethods) {
  MethodConfig m{Method::LWF, 0.5};
  EXPECT_DOUBLE_EQ(combined_loss(1.0, 2.0, m), 2.0);
  m.gamma = 0.0;
  EXPECT_DOUBLE_EQ(combined_loss(1.0, 2.0, m), 1.0);
  m.gamma = 3.0;
  EXPECT_DOUBLE_EQ(combined_loss(1.0, 2.0, m), 7.0);
  EXPECT_THROW(combined_loss(1.0, 2.0, MethodConfig{Method::FT}), ConfigError);
  EXPECT_THROW(combined_loss(1.0, 2.0, MethodConfig{Method::SFDNet}), ConfigError);
  EXPECT_THROW((MethodConfig{Method::EWC, -1.0}).validate(), ConfigError);
}

TEST(Sdc, Examples) {
  translation::PrototypeMemory memory;
  memory.set(0, vec({0.0, 0.0}), 0);
  memory.set(1, vec({5.0, 5.0}), 0);
  Eigen::MatrixXd before(3, 2);
  before << 0.1, 0.0, 1.0, 1.0, 4.0, 5.0;

  const auto same = sdc_drift_compensation(memory, before, before, 0.3);
  for (const auto& [id, e] : memory.entries()) EXPECT_LT((same.at(id).prototype - e.prototype).norm(), 1e-15);

  Eigen::MatrixXd shifted = before;
  shifted.rowwise() += Eigen::RowVector2d(0.5, -0.25);
  const auto uniform = sdc_drift_compensation(memory, before, shifted, 0.3);
  for (const auto& [id, e] : memory.entries())
    EXPECT_LT((uniform.at(id).prototype - e.prototype - vec({0.5, -0.25})).norm(), 1e-12);

  Eigen::MatrixXd one_before(1, 2), one_after(1, 2);
  one_before << 0.0, 0.0;
  one_after << 1.0, 2.0;
  translation::PrototypeMemory single;
  single.set(3, vec({0.0, 0.0}), 0);
  EXPECT_EQ(sdc_drift_compensation(single, one_before, one_after, 0.3).at(3).prototype, vec({1.0, 2.0}));
  EXPECT_THROW(sdc_drift_compensation(single, Eigen::MatrixXd(0, 2), Eigen::MatrixXd(0, 2), 0.3), InvalidInput);
}

TEST(Sdc, NearbyFeatureDominates) {
  translation::PrototypeMemory memory;
  memory.set(0, vec({0.0, 0.0}), 0);
  Eigen::MatrixXd before(2, 2), after(2, 2);
  before << 0.0, 0.0, 10.0, 10.0;
  after << 1.0, 0.0, 10.0, 50.0;
  const auto p = sdc_drift_compensation(memory, before, after, 0.3).at(0).prototype;
  EXPECT_NEAR(p(0), 1.0, 1e-12);
  EXPECT_NEAR(p(1), 0.0, 1e-12);
}

TEST(RegularizerGradients, MatchFiniteDifferences) {
  const auto z_cur = random_rows(4, 3, 6), z_prev = random_rows(4, 3, 7);
  const NamedTensors zc{{"z", z_cur}};
  auto lwf = check::check_gradients(zc, [&] { return lwf_loss(z_cur, z_prev); });
  EXPECT_LT(lwf.max_relative_error, 1e-3) << lwf.worst;

  const auto w = random_rows(3, 3, 8), b = random_rows(1, 5, 9);
  const NamedTensors params{{"w", w}, {"b", b}};
  const auto prev = clone_all(params);
  auto fisher = importance(ImportanceKind::fisher, params, 0.0);
  auto omega = importance(ImportanceKind::mas, params, 0.0);
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (auto* m : {&fisher, &omega})
    for (auto& [name, t] : m->values)
      for (auto& v : t.mutable_data()) v = u(rng);
  for (const auto& [name, t] : params)
    for (auto& v : Tensor(t).mutable_data()) v += u(rng) - 1.0;
  auto ewc = check::check_gradients(params, [&] { return ewc_loss(params, prev, fisher); });
  EXPECT_LT(ewc.max_relative_error, 1e-3) << ewc.worst;
  auto mas = check::check_gradients(params, [&] { return mas_loss(params, prev, omega); });
  EXPECT_LT(mas.max_relative_error, 1e-3) << mas.worst;
}

TEST(TripletGradients, MatchFiniteDifferences) {
  const auto a = random_rows(6, 4, 11), p = random_rows(6, 4, 12), n = random_rows(6, 4, 13);
  const NamedTensors params{{"a", a}, {"p", p}, {"n", n}};
  // Margin large enough that every triplet is active, away from the hinge.
  auto r = check::check_gradients(params, [&] { return triplet_loss(a, p, n, 10.0); });
  EXPECT_LT(r.max_relative_error, 1e-3) << r.worst;
}
