#include <gradwave/density.hpp>
#include <gradwave/projector.hpp>
#include <gradwave/reparam.hpp>
#include <gradwave/trajectories.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace gradwave;

namespace {

const KinematicLimits kLimits = limits_from_hardware(HardwareSpec{}, NormMode::RIV);

// TSP tour at full speed, roughly 4 * cities samples.
DiscreteCurve tour(Index cities) {
  TspSpec ts{city_density_for_target(radial_density(1.0, 6.0, 64))};
  ts.n_cities = cities;
  ts.start_at_origin = true;
  return gen_tsp_trajectory(ts, 0.004, kLimits.alpha).curve;
}

Matrix cloud(Index m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Matrix p(m, 2);
  for (Index i = 0; i < m; ++i) p.row(i) << nd(rng), nd(rng);
  return p;
}

}  // namespace

static void BM_Project(benchmark::State& state) {
  const DiscreteCurve c = tour(state.range(0));
  AffineConstraintSet a(c.size(), 2, c.dt());
  a.add_point_constraint(0, c.points().row(0).transpose());
  for (auto _ : state) benchmark::DoNotOptimize(project_curve(c, kLimits, a).distance);
  state.counters["n"] = static_cast<double>(c.size());
}
BENCHMARK(BM_Project)->Arg(100)->Arg(400)->Arg(1600)->Unit(benchmark::kMillisecond);

static void BM_ProjectFixedIterations(benchmark::State& state) {
  const DiscreteCurve c = tour(state.range(0));
  ProjectionSettings s;
  s.n_it = 200;
  s.stop_when_converged = false;
  s.polish = false;
  for (auto _ : state) benchmark::DoNotOptimize(project_curve(c, kLimits, s).distance);
  state.counters["n"] = static_cast<double>(c.size());
  state.SetItemsProcessed(state.iterations() * s.n_it);
}
BENCHMARK(BM_ProjectFixedIterations)->Arg(400)->Arg(1600)->Unit(benchmark::kMillisecond);

static void BM_Reparam(benchmark::State& state) {
  const DiscreteCurve c = tour(state.range(0));
  const SupportPath path = build_support(c.points());
  for (auto _ : state) benchmark::DoNotOptimize(time_optimal_reparam(path, kLimits, 0.004).duration);
}
BENCHMARK(BM_Reparam)->Arg(400)->Arg(1600)->Unit(benchmark::kMillisecond);

static void BM_Tsp(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(tour(state.range(0)).size());
}
BENCHMARK(BM_Tsp)->Arg(300)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_ExactW2(benchmark::State& state) {
  const Matrix a = cloud(state.range(0), 1), b = cloud(state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(wasserstein2_exact(a, b));
}
BENCHMARK(BM_ExactW2)->Arg(64)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

static void BM_SlicedW2(benchmark::State& state) {
  const Matrix a = cloud(state.range(0), 1), b = cloud(state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(wasserstein2_sliced(a, b, 64, 1));
}
BENCHMARK(BM_SlicedW2)->Arg(1024)->Arg(16384)->Unit(benchmark::kMillisecond);

static void BM_Histogram(benchmark::State& state) {
  const Matrix p = cloud(state.range(0), 3);
  const DensityGrid grid{6.0, 64};
  for (auto _ : state) benchmark::DoNotOptimize(empirical_histogram(p, grid).total);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Histogram)->Arg(100000);
BENCHMARK_MAIN();
