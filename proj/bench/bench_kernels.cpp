#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <random>

#include "fvdeg/kernels.hpp"
#include "fvdeg/scheme.hpp"

using namespace fvdeg;

namespace {

struct Fixture {
  Mesh mesh;
  Model model;
  NumericalFlux flux;
  std::vector<double> u, u_prev, out;

  explicit Fixture(Mesh m)
      : mesh(std::move(m)), model(make_model(builtin_model("fig1c"))), flux(FluxKind::Godunov, model) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < mesh.num_cells(); ++k) {
      u.push_back(unit(rng));
      u_prev.push_back(unit(rng));
    }
    out.resize(u.size());
  }
};

Fixture& fixture_1d(int n) {
  static std::map<int, std::unique_ptr<Fixture>> cache;
  auto& f = cache[n];
  if (!f) f = std::make_unique<Fixture>(build_interval_mesh(0.0, 1.0, n));
  return *f;
}

Fixture& fixture_2d(int n) {
  static std::map<int, std::unique_ptr<Fixture>> cache;
  auto& f = cache[n];
  if (!f) f = std::make_unique<Fixture>(build_rectangle_mesh(1.0, 1.0, n, n));
  return *f;
}

template <Backend B>
void residual_1d(benchmark::State& state) {
  auto& f = fixture_1d(static_cast<int>(state.range(0)));
  const BalanceOperator op{f.mesh, f.model, f.flux};
  for (auto _ : state) {
    kernels::residual(B, op, f.u, f.u_prev, 1e-3, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <Backend B>
void residual_2d(benchmark::State& state) {
  auto& f = fixture_2d(static_cast<int>(state.range(0)));
  const BalanceOperator op{f.mesh, f.model, f.flux};
  for (auto _ : state) {
    kernels::residual(B, op, f.u, f.u_prev, 1e-3, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
  state.SetItemsProcessed(state.iterations() * f.mesh.num_cells());
}

template <Backend B>
void jacobian_fluxes_2d(benchmark::State& state) {
  auto& f = fixture_2d(static_cast<int>(state.range(0)));
  const BalanceOperator op{f.mesh, f.model, f.flux};
  InterfaceFluxes fl;
  for (auto _ : state) {
    kernels::interface_fluxes(B, op, f.u, fl, true);
    benchmark::DoNotOptimize(fl.value.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.mesh.interfaces().size()));
}

template <Backend B>
void implicit_run_1d(benchmark::State& state) {
  auto model = std::make_shared<const Model>(make_model(builtin_model("fig1c")));
  auto mesh = std::make_shared<const Mesh>(build_interval_mesh(0.0, 1.0, static_cast<int>(state.range(0))));
  SolverConfig cfg;
  cfg.backend = B;
  for (auto _ : state) {
    auto sol = run_evolution(model, mesh, 0.01, FluxKind::Godunov, cfg, TimeMode::Implicit);
    benchmark::DoNotOptimize(sol.steps.back().data());
  }
}

}  // namespace

BENCHMARK(residual_1d<Backend::Serial>)->RangeMultiplier(4)->Range(1 << 10, 1 << 18);
BENCHMARK(residual_1d<Backend::OpenMP>)->RangeMultiplier(4)->Range(1 << 10, 1 << 18);
BENCHMARK(residual_2d<Backend::Serial>)->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(residual_2d<Backend::OpenMP>)->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(jacobian_fluxes_2d<Backend::Serial>)->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(jacobian_fluxes_2d<Backend::OpenMP>)->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(implicit_run_1d<Backend::Serial>)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(implicit_run_1d<Backend::OpenMP>)->Arg(400)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
