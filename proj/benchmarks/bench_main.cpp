#include <benchmark/benchmark.h>

#include "anatprior/autodiff/ops.hpp"
#include "anatprior/inference/inference.hpp"
#include "anatprior/prior/prior_model.hpp"
#include "anatprior/segmenter/segmenter.hpp"

namespace {

using namespace anatprior;

Grid noise(Shape shape, Rng& rng) {
  Grid g(std::move(shape));
  for (double& v : g.values()) v = standard_normal(rng);
  return g;
}

void BM_Conv2dForward(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  const auto ch = static_cast<std::size_t>(state.range(1));
  Rng rng(1);
  const Grid x = noise({size, size, ch}, rng);
  const Grid w = noise({3, 3, ch, 32}, rng);
  for (auto _ : state) {
    ad::Tape t;
    benchmark::DoNotOptimize(ad::conv2d(t.constant(x), t.constant(w), 2).value().data());
  }
}
BENCHMARK(BM_Conv2dForward)->Args({32, 4})->Args({16, 32})->Args({8, 32});

void BM_Conv2dBackward(benchmark::State& state) {
  Rng rng(2);
  const Grid x = noise({32, 32, 4}, rng);
  ad::Parameter w(noise({3, 3, 4, 32}, rng));
  for (auto _ : state) {
    ad::Tape t;
    t.backward(ad::sum(ad::conv2d(t.constant(x), t.parameter(w), 2)));
    w.zero_grad();
  }
}
BENCHMARK(BM_Conv2dBackward);

void BM_TransposeConv2d(benchmark::State& state) {
  Rng rng(3);
  const Grid x = noise({16, 16, 32}, rng);
  const Grid w = noise({3, 3, 32, 32}, rng);
  for (auto _ : state) {
    ad::Tape t;
    benchmark::DoNotOptimize(ad::transpose_conv2d(t.constant(x), t.constant(w), 2).value().data());
  }
}
BENCHMARK(BM_TransposeConv2d);

SegmenterModel desk_segmenter() {
  Rng rng(4);
  const ArchitectureConfig arch;
  const PriorModel prior =
      make_prior_model(arch, 1e-7, uniform_location_prior(arch.height, arch.width, arch.channels), rng);
  return make_segmenter(prior, std::vector<double>(arch.channels, 0.05), rng);
}

void BM_MapSegment(benchmark::State& state) {
  const SegmenterModel m = desk_segmenter();
  Rng rng(5);
  const Image x(noise({32, 32}, rng));
  for (auto _ : state) benchmark::DoNotOptimize(map_segment(x, m).labels().data());
}
BENCHMARK(BM_MapSegment)->Unit(benchmark::kMillisecond);

void BM_UnsupervisedStep(benchmark::State& state) {
  SegmenterModel m = desk_segmenter();
  Rng rng(6);
  const Image x(noise({32, 32}, rng));
  const Grid eta({m.image_arch.latent_dim}, 0.1);
  for (auto _ : state) {
    ad::Tape t;
    t.backward(unsupervised_objective(t, x, m, eta).total);
  }
}
BENCHMARK(BM_UnsupervisedStep)->Unit(benchmark::kMillisecond);

void BM_Uncertainty50(benchmark::State& state) {
  const SegmenterModel m = desk_segmenter();
  Rng rng(7);
  const Image x(noise({32, 32}, rng));
  for (auto _ : state) benchmark::DoNotOptimize(uncertainty_map(x, m, 50, rng).entropy.data());
}
BENCHMARK(BM_Uncertainty50)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
