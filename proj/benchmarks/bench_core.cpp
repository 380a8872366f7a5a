#include <benchmark/benchmark.h>

#include "bdcalc/green.hpp"
#include "bdcalc/halfline.hpp"
#include "bdcalc/model.hpp"
#include "bdcalc/resolvent.hpp"

using namespace bdcalc;

namespace {

HalfLineFunction test_function(const BasisPtr& b) {
  return project_function(
      b, [](double t) { return CVec::Constant(1, t * std::exp(-t)); }, 1);
}

void BM_BasisConstruction(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto b = make_basis(n);
    benchmark::DoNotOptimize(b->nodes().sum());
  }
}
BENCHMARK(BM_BasisConstruction)->Arg(64)->Arg(128)->Arg(256);

void BM_Dilation(benchmark::State& state) {
  const auto b = make_basis(static_cast<int>(state.range(0)));
  const auto u = test_function(b);
  for (auto _ : state) {
    auto v = dilation(u, 1.7);
    benchmark::DoNotOptimize(v.coeffs(0, 0));
  }
}
BENCHMARK(BM_Dilation)->Arg(64)->Arg(128);

void BM_OpPlus(benchmark::State& state) {
  const auto b = make_basis(128);
  const auto u = test_function(b);
  RVec xi(1);
  xi << 0.8;
  ParamPoint pt(RVec(), xi, 0.6);
  for (auto _ : state) {
    auto v = op_plus_order_reduction(-1, pt, u);
    benchmark::DoNotOptimize(v.coeffs(0, 0));
  }
}
BENCHMARK(BM_OpPlus);

void BM_BoundarySolve(benchmark::State& state) {
  const auto b = make_basis(static_cast<int>(state.range(0)));
  auto model = LaplaceTypeModel::standard(2, 1, M_PI);
  auto bc = ProjectionBC::dirichlet();
  const auto f = test_function(b);
  RVec xi(1);
  xi << 0.6;
  for (auto _ : state) {
    auto r = boundary_symbol_solve(model, bc, xi, 0.8, f, CVec::Zero(1));
    benchmark::DoNotOptimize(r.residual);
  }
}
BENCHMARK(BM_BoundarySolve)->Arg(64)->Arg(128);

void BM_TraceDensity(benchmark::State& state) {
  auto model = LaplaceTypeModel::standard(2, 1, M_PI);
  auto bc = ProjectionBC::dirichlet();
  for (auto _ : state) {
    auto r = trace_density(model, bc, 8.0);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(BM_TraceDensity);

}  // namespace

BENCHMARK_MAIN();
