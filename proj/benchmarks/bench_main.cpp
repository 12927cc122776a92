#include <benchmark/benchmark.h>

#include "roughop/gaussian.hpp"
#include "roughop/malliavin.hpp"

using namespace roughop;

namespace {

GramContext context(std::size_t n) {
  return GramContext(CovarianceModel::fractional(HurstParameter(0.25)), TimeGrid::uniform(n, 1.0));
}

void BM_SampleCholesky(benchmark::State& state) {
  const auto ctx = context(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sample_ensemble(ctx, 4096, 1, SamplingOptions{1, 0}));
  state.SetItemsProcessed(state.iterations() * 4096);
}
BENCHMARK(BM_SampleCholesky)->Arg(32)->Arg(128)->Arg(512);

void BM_SampleCirculant(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto model = CovarianceModel::fractional(HurstParameter(0.25));
  const auto grid = TimeGrid::uniform(n, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(sample_ensemble_circulant(model, grid, 4096, 1, SamplingOptions{1, 0}));
  state.SetItemsProcessed(state.iterations() * 4096);
}
BENCHMARK(BM_SampleCirculant)->Arg(32)->Arg(128)->Arg(512);

void BM_GramContext(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(context(n));
}
BENCHMARK(BM_GramContext)->Arg(32)->Arg(128)->Arg(512);

void BM_ProjectAdapted(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto ctx = context(n);
  const CMElement h(Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(n), -1.0, 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(project_adapted(ctx, h, AdaptedIndex(n / 2)));
}
BENCHMARK(BM_ProjectAdapted)->Arg(32)->Arg(128)->Arg(512);

void BM_DivergenceAffine(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto ctx = context(n);
  const auto e = sample_ensemble(ctx, 64, 2);
  const Eigen::Index d = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd slope = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index j = 1; j < d; ++j) slope(j, j - 1) = 0.5;
  const auto u = VectorField::affine(ctx, increment_directions(n), Eigen::VectorXd::Ones(d), slope);
  std::size_t r = 0;
  for (auto _ : state) benchmark::DoNotOptimize(divergence(u, e.path(r++ % 64)));
}
BENCHMARK(BM_DivergenceAffine)->Arg(32)->Arg(128);

void BM_ClarkBuild(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto ctx = context(n);
  const auto f = make_functional("quadratic", ctx.grid());
  for (auto _ : state) benchmark::DoNotOptimize(clark_integrand(ctx, f));
}
BENCHMARK(BM_ClarkBuild)->Arg(32)->Arg(128);

void BM_ClarkDivergence(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto ctx = context(n);
  const auto u = clark_integrand(ctx, make_functional("two_time", ctx.grid()));
  const auto e = sample_ensemble(ctx, 64, 3);
  std::size_t r = 0;
  for (auto _ : state) benchmark::DoNotOptimize(divergence(u, e.path(r++ % 64)));
}
BENCHMARK(BM_ClarkDivergence)->Arg(32)->Arg(64);

}  // namespace
BENCHMARK_MAIN();
