#include <cmath>
#include <random>

#include "doctest.h"
#include "fvdeg/errors.hpp"
#include "fvdeg/stationary.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace fvdeg;

namespace {

std::vector<double> random_source(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> g(static_cast<std::size_t>(n));
  for (auto& v : g) v = unit(rng);
  return g;
}

}  // namespace

TEST_CASE("resolvent is the implicit step of size one") {
  std::mt19937_64 rng(1);
  const auto mesh = support::interval(40);
  for (const char* name : {"fig1a", "fig1c", "heat-like"}) {
    const auto model = support::builtin(name);
    for (FluxKind kind : {FluxKind::Godunov, FluxKind::EngquistOsher, FluxKind::Rusanov}) {
      const auto g = random_source(40, rng);
      const auto u = stationary_solve({model, mesh, g, kind}, {});
      const auto v = implicit_step(g, 1.0, *model, *mesh, NumericalFlux(kind, *model), {});
      CHECK(support::max_diff(u, v) <= 1e-14);
    }
  }
}

TEST_CASE("constant sources at the ends of the invariant region") {
  const auto mesh = support::interval(25);
  for (const char* name : {"fig1a", "fig1c"}) {
    const auto model = support::builtin(name);
    for (double c : {0.0, 1.0}) {
      const std::vector<double> g(25, c);
      const auto u = stationary_solve({model, mesh, g, FluxKind::Godunov}, {});
      CHECK(support::max_diff(u, g) <= 1e-14);
    }
  }
}

TEST_CASE("two-cell resolvent against a bisection oracle") {
  const auto model = support::builtin("fig1a");
  const auto mesh = support::interval(2);
  const auto u = stationary_solve({model, mesh, {0.8, 0.2}, FluxKind::Godunov}, {});
  const oracle::Fn godunov = [](double a) {
    const double b = 1.0 - a;
    const auto f = [](double s) { return s * (1.0 - s); };
    if (a <= b) return std::min(f(a), f(b));
    return (b <= 0.5 && 0.5 <= a) ? 0.25 : std::max(f(a), f(b));
  };
  const double u1 = oracle::bisect([&](double a) { return 0.5 * (a - 0.8) + godunov(a); }, 0.0, 1.0);
  CHECK(std::abs(u[0] - u1) <= 1e-9);
  CHECK(std::abs(0.5 * (u[0] + u[1]) - 0.5) <= 1e-15);
}

TEST_CASE("resolvent invariant region and monotonicity") {
  std::mt19937_64 rng(2);
  const auto mesh = support::interval(50);
  for (const char* name : {"fig1a", "fig1c"}) {
    const auto model = support::builtin(name);
    for (FluxKind kind : {FluxKind::Godunov, FluxKind::EngquistOsher, FluxKind::Rusanov}) {
      for (int i = 0; i < 4; ++i) {
        const auto g = random_source(50, rng);
        auto h = g;
        for (auto& v : h) v = std::min(1.0, v + 0.2 * std::abs(std::sin(17.0 * v)));
        const auto report = resolvent_contraction_probe({model, mesh, g, kind}, h, {});
        CHECK(report.sources_ordered);
        CHECK_FALSE(report.contraction_violated);
        CHECK_FALSE(report.order_violated);
        CHECK(report.order_violation <= 1e-10);
        const auto u = stationary_solve({model, mesh, g, kind}, {});
        for (double v : u) CHECK((v >= -1e-10 && v <= 1.0 + 1e-10));
      }
    }
  }
}

TEST_CASE("contraction probe reports") {
  const auto model = support::builtin("fig1a");
  const auto mesh = support::interval(20);
  const std::vector<double> g(20, 0.4);
  const auto same = resolvent_contraction_probe({model, mesh, g, FluxKind::Godunov}, g, {});
  CHECK(same.solution_l1 == 0.0);
  CHECK(same.source_l1 == 0.0);
  CHECK(same.excess == 0.0);
  CHECK(same.budget == doctest::Approx(2e-10));

  const std::vector<double> zero(20, 0.0), one(20, 1.0);
  const auto ends = resolvent_contraction_probe({model, mesh, zero, FluxKind::Godunov}, one, {});
  CHECK(ends.solution_l1 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ends.excess == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(ends.sources_ordered);

  std::mt19937_64 rng(3);
  const auto a = random_source(20, rng), b = random_source(20, rng);
  const auto mixed = resolvent_contraction_probe({model, mesh, a, FluxKind::Godunov}, b, {});
  CHECK(mixed.solution_l1 <= mixed.source_l1 + mixed.budget);
  CHECK_THROWS_AS(resolvent_contraction_probe({model, mesh, a, FluxKind::Godunov}, std::vector<double>(3), {}),
                  Error);
}

TEST_CASE("source cell averages") {
  auto s = builtin_model("fig1c");
  s.g = "0.5 + 0.3*cos(pi*x)";
  const Model model = make_model(s);
  const auto g = source_cell_averages(model, *support::interval(2));
  CHECK(g[0] == doctest::Approx(0.5 + 0.3 * 2.0 / 3.141592653589793).epsilon(1e-4));
  CHECK(g[0] + g[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Crandall-Liggett march") {
  const auto model = support::builtin("fig1a");
  const auto mesh = support::interval(50);
  const auto u0 = init_cell_averages(*model, *mesh);
  const NumericalFlux flux(FluxKind::Godunov, *model);
  const auto one = crandall_liggett_march(*model, *mesh, u0, 1, 0.5, FluxKind::Godunov, {});
  CHECK(support::max_diff(one, implicit_step(u0, 0.5, *model, *mesh, flux, {})) == 0.0);

  const std::vector<double> zero(50, 0.0);
  CHECK(support::max_diff(crandall_liggett_march(*model, *mesh, zero, 7, 0.5, FluxKind::Godunov, {}), zero) == 0.0);

  const auto u32 = crandall_liggett_march(*model, *mesh, u0, 32, 0.5, FluxKind::Godunov, {});
  const auto u64 = crandall_liggett_march(*model, *mesh, u0, 64, 0.5, FluxKind::Godunov, {});
  const auto u128 = crandall_liggett_march(*model, *mesh, u0, 128, 0.5, FluxKind::Godunov, {});
  const double coarse = support::l1(*mesh, u32, u64), fine = support::l1(*mesh, u64, u128);
  CHECK(coarse >= 1.5 * fine);

  const auto via_run = run_evolution(model, mesh, 0.5 / 64, FluxKind::Godunov, {}, TimeMode::Implicit);
  CHECK(support::max_diff(via_run.steps.back(), u64) == 0.0);
  CHECK_THROWS_AS(crandall_liggett_march(*model, *mesh, u0, 0, 0.5, FluxKind::Godunov, {}), Error);
}

TEST_CASE("outermost interface flux vanishes at rate h") {
  auto s = builtin_model("fig1c");
  s.g = "0.5 + 0.45*cos(pi*x)";
  const auto model = std::make_shared<const Model>(make_model(s));
  std::vector<double> h, edge;
  for (int n : {25, 50, 100, 200}) {
    const auto mesh = support::interval(n);
    const auto g = source_cell_averages(*model, *mesh);
    const auto u = stationary_solve({model, mesh, g, FluxKind::Godunov}, {});
    const auto phi = interface_total_flux(*model, *mesh, FluxKind::Godunov, u);
    h.push_back(mesh->h());
    edge.push_back(std::max(std::abs(phi.front()), std::abs(phi.back())));
  }
  // edge / h settles at first order; extrapolate its limit from the two coarse meshes
  const double C = 2.0 * edge[1] / h[1] - edge[0] / h[0];
  CHECK(C > 0.0);
  CHECK(edge[2] <= C * h[2]);
  CHECK(edge[3] <= C * h[3]);
  CHECK(edge[3] < edge[1]);
}
