#include <benchmark/benchmark.h>

#include <cmath>

#include "nmpdee/coefficients.hpp"
#include "nmpdee/ldg.hpp"
#include "nmpdee/noise.hpp"
#include "nmpdee/sde_mc.hpp"

using namespace nmpdee;

namespace {

LdgProblem double_well(std::size_t cells, std::size_t degree) {
  const auto m = SdeModel::pure_gwn(StateField::polynomial({0, 1, 0, -1}), StateField::constant(1.0), 0.0);
  return LdgProblem{build_pdee(m), build_mesh(-3.0, 3.0, cells), degree};
}

void BM_LdgRhs(benchmark::State& state) {
  const LdgSolver solver(double_well(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1))));
  const DGField p = project([](double x) { return std::exp(-x * x); }, solver.problem().mesh, solver.problem().degree);
  for (auto _ : state) benchmark::DoNotOptimize(solver.rhs(p, 0.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LdgRhs)->Args({120, 1})->Args({120, 2})->Args({480, 2});

void BM_LdgStepTimeDependent(benchmark::State& state) {
  const auto m = SdeModel::linear(TimeField::constant(-0.5), TimeField::constant(0.0), TimeField::constant(0.25),
                                  HurstParameter(0.8), 2.0);
  const LdgSolver solver(LdgProblem{build_pdee(m), build_mesh(0.0, 6.0, 60), 2});
  DGField p = project([](double x) { return std::exp(-(x - 2) * (x - 2)); }, solver.problem().mesh, 2);
  double t = 0.1;
  for (auto _ : state) {
    solver.step(p, t, 1e-4);
    t += 1e-4;
  }
}
BENCHMARK(BM_LdgStepTimeDependent);

void BM_FbmPath(benchmark::State& state) {
  const NoiseSpec spec{HurstParameter(0.8), 0.004, static_cast<std::size_t>(state.range(0)), 1, 1};
  const PathGenerator gen(spec, NoiseKind::FBM);
  std::vector<double> out(spec.n_steps);
  std::size_t i = 0;
  for (auto _ : state) {
    gen.fill(i++, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FbmPath)->Arg(125)->Arg(250)->Arg(1250);

void BM_CHatQuadrature(benchmark::State& state) {
  const auto c = TimeField::custom([](double t) { return 0.25 * std::pow(t, 0.8); });
  for (auto _ : state) benchmark::DoNotOptimize(c_hat_quadrature(1.0, c, HurstParameter(0.8)));
}
BENCHMARK(BM_CHatQuadrature);

void BM_CHatClosedForm(benchmark::State& state) {
  const auto c = TimeField::power_law(0.25, 0.8);
  for (auto _ : state) benchmark::DoNotOptimize(c_hat(1.0, c, HurstParameter(0.8)));
}
BENCHMARK(BM_CHatClosedForm);

void BM_HeunPaths(benchmark::State& state) {
  const double d = 0.5;
  auto cubic = [d](double k) { return StateField::polynomial({0.0, k, 0.0, -k * d}); };
  const auto m = SdeModel::nonlinear_commutative(cubic(-1.0), cubic(0.5), cubic(0.5), HurstParameter(0.8), 0.4);
  const std::vector<double> rec{0.5};
  for (auto _ : state) benchmark::DoNotOptimize(simulate(m, McOptions{0.004, 1000, 1, 1}, rec));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_HeunPaths)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
