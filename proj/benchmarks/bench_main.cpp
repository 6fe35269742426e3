#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "crashdyn/density.hpp"
#include "crashdyn/km_estimate.hpp"
#include "crashdyn/sde_sim.hpp"
#include "crashdyn/synth.hpp"

using namespace crashdyn;

static void BM_JointDensity(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 0.1);
  std::vector<std::pair<double, double>> pairs(static_cast<std::size_t>(state.range(0)));
  for (auto& p : pairs) p = {z(rng), z(rng)};
  const BinningSpec b{-0.35, 0.35, 24};
  for (auto _ : state) benchmark::DoNotOptimize(joint(pairs, b));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_JointDensity)->Arg(1000)->Arg(100000);

static void BM_EstimateCoefficients(benchmark::State& state) {
  OuSpec s;
  s.n_assets = static_cast<std::size_t>(state.range(0));
  const auto ensemble = generate_ou(s);
  const BinningSpec b{-0.35, 0.35, 24};
  for (auto _ : state) benchmark::DoNotOptimize(estimate_coefficients(ensemble, b));
}
BENCHMARK(BM_EstimateCoefficients)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_Trajectory(benchmark::State& state) {
  SimConfig c;
  const auto p = reference_potential_params();
  const auto d = reference_diffusion_params();
  std::uint64_t k = 0;
  for (auto _ : state) {
    Rng rng = make_substream(7, k++);
    benchmark::DoNotOptimize(simulate_trajectory(p, d, c, rng));
  }
}
BENCHMARK(BM_Trajectory)->Unit(benchmark::kMicrosecond);

static void BM_FitIndex(benchmark::State& state) {
  const auto truth = reference_params(SurfaceModel::index);
  std::vector<double> ts;
  for (int t = 1; t <= 25; ++t) ts.push_back(t);
  const std::vector<double> xs{0.0};
  const auto data = sample_surface(SurfaceModel::index, truth, product_grid(xs, ts), 0.005, 3);
  auto init = truth;
  for (auto& v : init) v *= 1.2;
  for (auto _ : state) benchmark::DoNotOptimize(fit(SurfaceModel::index, data, init));
}
BENCHMARK(BM_FitIndex)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
