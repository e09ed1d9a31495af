#include <benchmark/benchmark.h>

#include <random>

#include "pdl/meta.hpp"
#include "pdl/model.hpp"
#include "pdl/ops.hpp"
#include "pdl/optimizer.hpp"
#include "pdl/style.hpp"

namespace {

using namespace pdl;

Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return Tensor::from(std::move(shape), std::move(v));
}

void BM_Conv2dForwardBackward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  const Tensor x = random_tensor({21, c, 32, 32}, rng), b = random_tensor({c}, rng);
  Tensor w = random_tensor({c, c, 3, 3}, rng);
  w.set_requires_grad(true);
  for (auto _ : state) {
    Tape tape;
    TapeScope scope(tape);
    tape.backward(ops::sum(ops::conv2d(x, w, b, 1, 1)));
    benchmark::DoNotOptimize(w.grad().data());
  }
}
BENCHMARK(BM_Conv2dForwardBackward)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

Batch random_batch(const ArchitectureConfig& arch, std::size_t n, std::mt19937_64& rng) {
  Batch b;
  b.images = random_tensor({n, 6, arch.image_size, arch.image_size}, rng);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<double>(i % 2);
  b.labels = Tensor::from({n}, y);
  b.depth = Tensor::zeros({n, 1, arch.depth_size, arch.depth_size});
  return b;
}

void BM_MetaStep(benchmark::State& state) {
  const Model model{ArchitectureConfig{}};
  ModelParams params = model.init_params(3);
  std::mt19937_64 rng(3);
  EpisodeBatch ep;
  for (int i = 0; i < 2; ++i) ep.meta_train.push_back(random_batch(model.arch, 7, rng));
  ep.meta_test = random_batch(model.arch, 7, rng);
  meta::Hyperparams hp;
  Adam adam(hp.beta);
  for (auto _ : state) benchmark::DoNotOptimize(meta::meta_step(model, params, ep, hp, adam).total);
}
BENCHMARK(BM_MetaStep)->Unit(benchmark::kMillisecond);

void BM_FitClusters(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  style::DataMatrix data(n, 32);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < 32; ++k) data(i, k) = g(rng) + static_cast<double>(i % 3) * 4.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(style::fit_clusters(data, 3, style::ClusterMethod::KMeans, 7).inertia);
  }
}
BENCHMARK(BM_FitClusters)->Arg(600)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
