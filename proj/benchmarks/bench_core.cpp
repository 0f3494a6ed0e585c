#include <benchmark/benchmark.h>

#include <random>

#include "macpp/diagnostics.hpp"
#include "macpp/inference.hpp"
#include "macpp/kernel.hpp"
#include "macpp/likelihood.hpp"
#include "macpp/simulate.hpp"

using namespace macpp;

namespace {

std::vector<Point> uniform_points(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> out(n);
  for (auto& p : out) p = {u(rng), u(rng)};
  return out;
}

const Window& hexagon() {
  static const Window w = ConvexPolygon({{0.5, 0}, {1, 0.3}, {1, 0.7}, {0.5, 1}, {0, 0.7}, {0, 0.3}});
  return w;
}

void BM_MassRect(benchmark::State& state) {
  const Rectangle r(0, 1, 0, 1);
  double h = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mass_rect({0.03, 0.7}, h, r).value);
    h = h < 0.2 ? h * 1.001 : 0.01;
  }
}
BENCHMARK(BM_MassRect);

void BM_MassMcPolygon(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(mass_mc({0.1, 0.4}, 0.05, hexagon(), n, ++seed).value);
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_MassMcPolygon)->Arg(1000)->Arg(10000);

void BM_PolygonEvaluator(benchmark::State& state) {
  const auto centres = uniform_points(150, 1);
  std::vector<Point> inside;
  for (Point p : centres)
    if (contains(hexagon(), p)) inside.push_back(p);
  const WindowMassEvaluator ev(hexagon(), inside, kDefaultMassSamples, 3);
  std::vector<double> out(inside.size());
  const double h = static_cast<double>(state.range(0)) / 1000.0;
  for (auto _ : state) benchmark::DoNotOptimize(ev.masses(h, out));
}
BENCHMARK(BM_PolygonEvaluator)->Arg(10)->Arg(100);

void BM_KernelSumTotal(benchmark::State& state) {
  const auto parents = uniform_points(150, 2);
  const auto kids = uniform_points(600, 3);
  const KernelSumTable t(kids, parents);
  const double h = static_cast<double>(state.range(0)) / 1000.0;
  for (auto _ : state) benchmark::DoNotOptimize(t.total(h));
}
BENCHMARK(BM_KernelSumTotal)->Arg(10)->Arg(100);

void BM_McmcScenario(benchmark::State& state) {
  const Scenario s = scenario(static_cast<int>(state.range(0)));
  const MultitypePattern p = simulate_pattern(s.graph(), s.params(), s.window(), 11);
  McmcConfig cfg;
  cfg.n_iterations = 500;
  cfg.n_burnin = 100;
  for (auto _ : state) benchmark::DoNotOptimize(run_chain(p, s.graph(), PriorSpec{}, cfg).num_draws());
  state.SetItemsProcessed(state.iterations() * 500);
}
BENCHMARK(BM_McmcScenario)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_RipleyK(benchmark::State& state) {
  const auto pts = uniform_points(static_cast<std::size_t>(state.range(0)), 4);
  std::vector<double> r(100);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = 0.0025 * static_cast<double>(k + 1);
  const Window u = Window::unit_square();
  for (auto _ : state) benchmark::DoNotOptimize(ripley_k(pts, u, r));
}
BENCHMARK(BM_RipleyK)->Arg(200)->Arg(1000);

void BM_ThomasMinContrast(benchmark::State& state) {
  const Scenario s = scenario(3);
  const MultitypePattern p = simulate_pattern(s.graph(), s.params(), s.window(), 5);
  for (auto _ : state) benchmark::DoNotOptimize(thomas_min_contrast(p.locations(1), s.window()).kappa);
}
BENCHMARK(BM_ThomasMinContrast)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
