#include <benchmark/benchmark.h>

#include <cmath>

#include "tcmerton/fixed_point.hpp"
#include "tcmerton/montecarlo.hpp"
#include "tcmerton/pde.hpp"
#include "tcmerton/pipeline.hpp"

using namespace tcm;

namespace {

const MarketModel kMarket(0.03, 0.09, 0.2, 1.0);

Problem hyperbolic_mixed() {
  return Problem(kMarket, DiscountModel::hyperbolic(1.0, 2.0, 1.0),
                 UtilityModel::mixed_power(0.5, 0.3, -1.0));
}

void BM_BackwardSolve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Grid g(1.0, n, -6.0, 6.0, n);
  const auto drift = [](double, double y) { return 0.1 * std::tanh(y); };
  const auto terminal = [](double y) { return std::exp(-y); };
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_backward(g, 0.045, drift, nullptr, nullptr, terminal));
}
BENCHMARK(BM_BackwardSolve)->Arg(101)->Arg(201)->Arg(401)->Unit(benchmark::kMillisecond);

void BM_ApplyF(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Problem p = hyperbolic_mixed();
  const Grid g(1.0, n, -6.0, 6.0, n);
  const ScalarField2D phi(g);
  for (auto _ : state) benchmark::DoNotOptimize(apply_F(p, phi));
}
BENCHMARK(BM_ApplyF)->Arg(101)->Arg(201)->Unit(benchmark::kMillisecond);

void BM_SimulatePaths(benchmark::State& state) {
  const Problem p = hyperbolic_mixed();
  static const Solution sol = solve(p, Grid(1.0, 201, -6.0, 6.0, 201));
  McOptions mc;
  mc.n_paths = static_cast<std::size_t>(state.range(0));
  mc.dt = 1e-3;
  const auto slice = sol.interp.slice(0.0);
  const double y0 = sol.interp.invert(slice, 1.0);
  for (auto _ : state) {
    auto ens = simulate_Y(p, sol.rho.phi, 0.0, y0, mc);
    simulate_wealth(p, sol.interp, 1.0, ens);
    benchmark::DoNotOptimize(ens.x.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 1000);
}
BENCHMARK(BM_SimulatePaths)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
