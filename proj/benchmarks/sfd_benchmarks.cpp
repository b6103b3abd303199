#include <benchmark/benchmark.h>

#include <random>

#include "sfd/attention.hpp"
#include "sfd/backbone.hpp"
#include "sfd/freq.hpp"
#include "sfd/translation.hpp"

using namespace sfd;

static Eigen::MatrixXd random_plane(std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

static Tensor random_tensor(Shape shape) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  std::size_t count = 1;
  for (auto d : shape) count *= d;
  std::vector<double> v(count);
  for (auto& x : v) x = n(rng);
  return Tensor::from(std::move(shape), std::move(v));
}

static void BM_DctSeparable(benchmark::State& state) {
  const freq::ImagePlane plane(random_plane(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(freq::dct2_forward(plane));
}
BENCHMARK(BM_DctSeparable)->Arg(8)->Arg(16)->Arg(32);

static void BM_DctDirect(benchmark::State& state) {
  const freq::ImagePlane plane(random_plane(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(freq::dct2_forward_direct(plane));
}
BENCHMARK(BM_DctDirect)->Arg(8)->Arg(16)->Arg(32);

static void BM_ReconstructTriplet(benchmark::State& state) {
  const freq::ImagePlane plane(random_plane(32));
  for (auto _ : state) benchmark::DoNotOptimize(freq::reconstruct_triplet(plane, 8));
}
BENCHMARK(BM_ReconstructTriplet);

static void BM_BackboneForward(benchmark::State& state) {
  BackboneConfig config;
  const Backbone backbone(config, 3);
  const auto images = random_tensor({static_cast<std::size_t>(state.range(0)), 3, 32, 32});
  for (auto _ : state) benchmark::DoNotOptimize(backbone.forward(images).pooled);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BackboneForward)->Arg(1)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_FcaGate(benchmark::State& state) {
  Rng rng(4);
  const auto params = attention::FcaGateParams::make(128, 4, attention::lowest_frequency_indices(4, 2, 2), rng);
  const auto x = random_tensor({32, 128, 2, 2});
  for (auto _ : state) benchmark::DoNotOptimize(attention::fca_gate(x, params));
}
BENCHMARK(BM_FcaGate);

static void BM_NcmClassify(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  translation::PrototypeMemory memory;
  for (int c = 0; c < state.range(0); ++c) {
    Eigen::VectorXd p(256);
    for (Eigen::Index d = 0; d < p.size(); ++d) p(d) = n(rng);
    memory.set(c, p, 0);
  }
  Eigen::MatrixXd queries(64, 256);
  for (Eigen::Index i = 0; i < queries.size(); ++i) queries.data()[i] = n(rng);
  for (auto _ : state) benchmark::DoNotOptimize(translation::ncm_classify(queries, memory));
  state.SetItemsProcessed(state.iterations() * queries.rows());
}
BENCHMARK(BM_NcmClassify)->Arg(10)->Arg(100);

BENCHMARK_MAIN();
