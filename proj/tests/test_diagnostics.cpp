#include <cmath>
#include <random>

#include "doctest.h"
#include "fvdeg/diagnostics.hpp"
#include "fvdeg/errors.hpp"
#include "support.hpp"

using namespace fvdeg;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::Io;
}

DiscreteSolution implicit_run(const std::string& name, int n, double dt, double T = -1.0,
                              FluxKind kind = FluxKind::Godunov) {
  return run_evolution(support::builtin(name, T), support::interval(n), dt, kind, {}, TimeMode::Implicit);
}

std::shared_ptr<const Model> model_with(const std::string& name, const std::string& u0, double T,
                                        Point direction = {1.0, 0.0}) {
  auto s = builtin_model(name);
  s.u0 = u0;
  s.T = T;
  s.direction = direction;
  return std::make_shared<const Model>(make_model(s));
}

}  // namespace

TEST_CASE("test functions") {
  const auto mesh = support::interval(10);
  const auto family = test_function_family(*mesh, 0.5);
  REQUIRE(family.size() == 48);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int touching_boundary = 0;
  for (const auto& xi : family) {
    CHECK(xi.t_center + xi.t_radius <= 0.5 + 1e-15);
    CHECK(xi.value(0.5, {unit(rng), 0.0}) == 0.0);
    if (xi.x_center[0] - xi.x_radius[0] < 0.0 || xi.x_center[0] + xi.x_radius[0] > 1.0) ++touching_boundary;
    for (int i = 0; i < 10; ++i) {
      const double t = 0.5 * unit(rng), x = unit(rng), h = 1e-6;
      CHECK(xi.value(t, {x, 0.0}) >= 0.0);
      CHECK(xi.dt(t, {x, 0.0}) ==
            doctest::Approx((xi.value(t + h, {x, 0.0}) - xi.value(t - h, {x, 0.0})) / (2 * h)).epsilon(1e-5).scale(1e-6));
      CHECK(xi.grad(t, {x, 0.0})[0] ==
            doctest::Approx((xi.value(t, {x + h, 0.0}) - xi.value(t, {x - h, 0.0})) / (2 * h)).epsilon(1e-5).scale(1e-6));
    }
  }
  CHECK(touching_boundary >= 16);

  const auto sq = test_function_family(build_rectangle_mesh(2.0, 1.0, 4, 4), 1.0);
  const auto& xi = sq[5];
  const Point x{0.7, 0.4};
  const double h = 1e-6;
  CHECK(xi.grad(0.3, x)[1] ==
        doctest::Approx((xi.value(0.3, {0.7, 0.4 + h}) - xi.value(0.3, {0.7, 0.4 - h})) / (2 * h)).epsilon(1e-5).scale(1e-6));
  CHECK(kind_of([&] { test_function_family(*mesh, 0.0); }) == ErrorKind::Parameter);
}

TEST_CASE("k grid includes the degeneracy threshold") {
  const auto ks = entropy_k_grid(*support::builtin("fig1c"), 21);
  CHECK(ks.front() == 0.0);
  CHECK(ks.back() == 1.0);
  CHECK(std::count_if(ks.begin(), ks.end(), [](double k) { return std::abs(k - 0.6) < 1e-9; }) == 1);
  const auto kinked = entropy_k_grid(*support::custom("0", "pos(u-0.33) + pos(u-0.71)", "0", 0.33), 11);
  CHECK(std::any_of(kinked.begin(), kinked.end(), [](double k) { return std::abs(k - 0.71) < 1e-9; }));
  CHECK(std::any_of(kinked.begin(), kinked.end(), [](double k) { return std::abs(k - 0.33) < 1e-9; }));
  CHECK(std::is_sorted(kinked.begin(), kinked.end()));
  CHECK(kind_of([] { entropy_k_grid(*support::builtin("fig1a"), 1); }) == ErrorKind::Parameter);
}

TEST_CASE("entropy residuals of the zero solution") {
  const auto model = model_with("fig1a", "0", 0.2);
  // for u = 0 every term cancels except 2 f(k) times the time integral of xi on the right end
  auto exact = [&](double k, const TestFunction& xi) {
    static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                 0.9061798459386640};
    static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                                 0.2369268850561891};
    double sum = 0.0;
    constexpr int kPanels = 400;
    for (int p = 0; p < kPanels; ++p)
      for (int q = 0; q < 5; ++q) {
        const double t = 0.2 * (p + 0.5 * (1.0 + gx[q])) / kPanels;
        sum += 0.5 * gw[q] * 0.2 / kPanels * xi.value(t, {1.0, 0.0});
      }
    return 2.0 * model->f(k) * sum;
  };
  std::vector<double> err;
  for (int n : {40, 80}) {
    const auto sol = run_evolution(model, support::interval(n), 0.8 / n, FluxKind::Godunov, {}, TimeMode::Implicit);
    const auto rep = entropy_sweep(sol, 11, 48);
    CHECK(rep.min_discrete_residual >= -1e-12);
    CHECK(rep.entries.size() == 11 * 48);
    const auto family = test_function_family(*sol.mesh, 0.2);
    double worst = 0.0;
    for (const auto& e : rep.entries) worst = std::max(worst, std::abs(e.residual - exact(e.k, family[e.xi])));
    err.push_back(worst);
  }
  CAPTURE(err[0]);
  CAPTURE(err[1]);
  CHECK(err[1] <= err[0] / 3.0);
  const auto sol = run_evolution(model, support::interval(40), 0.02, FluxKind::Godunov, {}, TimeMode::Implicit);
  CHECK(kind_of([&] { entropy_residual(sol, 1.5, test_function_family(*sol.mesh, 0.2)[0]); }) == ErrorKind::Domain);
}

TEST_CASE("discrete entropy residual is nonnegative and vanishes at the ends") {
  const auto sol = implicit_run("fig1a", 100, 2e-3);
  const auto rep = entropy_sweep(sol, 21, 48);
  CHECK(rep.min_discrete_residual >= -1e-9);
  for (const auto& e : rep.entries)
    if (e.k == 0.0 || e.k == 1.0) CHECK(std::abs(e.discrete_residual) <= 1e-9);
  const auto defect = cell_entropy_defect(sol, entropy_k_grid(*sol.model, 21));
  CHECK(defect.max_defect <= 1e-8);
}

TEST_CASE("entropy residual at an interior level improves under refinement") {
  const auto coarse = implicit_run("fig1a", 50, 4e-3);
  const auto fine = implicit_run("fig1a", 200, 1e-3);
  const auto xi_c = test_function_family(*coarse.mesh, coarse.T);
  const auto xi_f = test_function_family(*fine.mesh, fine.T);
  double nu_c = 0.0, nu_f = 0.0;
  for (int j = 0; j < 24; ++j) {  // spatially interior placements
    nu_c = std::max(nu_c, -entropy_residual(coarse, 0.5, xi_c[j]));
    nu_f = std::max(nu_f, -entropy_residual(fine, 0.5, xi_f[j]));
  }
  CHECK(nu_f * 1.5 <= std::max(nu_c, 1e-300));
}

TEST_CASE("sweep does not degrade under refinement for degenerate diffusion") {
  const auto coarse = implicit_run("fig1c", 50, 4e-3);
  const auto fine = implicit_run("fig1c", 100, 2e-3);
  const auto rc = entropy_sweep(coarse, 21, 48);
  const auto rf = entropy_sweep(fine, 21, 48);
  CHECK(rf.min_residual >= rc.min_residual - 1e-8);
  CHECK(rf.mesh_h == doctest::Approx(0.01));
  CHECK(rf.dt == 2e-3);
}

TEST_CASE("mass drift") {
  auto sol = implicit_run("fig1c", 60, 1e-2, 0.3);
  for (double d : mass_drift(sol)) CHECK(std::abs(d) <= 1e-12);
  const auto model = support::builtin("fig1a", 0.3);
  const auto mesh = support::interval(60);
  const double dt = cfl_limit(*model, *mesh, NumericalFlux(FluxKind::Rusanov, *model), {});
  const auto ex = run_evolution(model, mesh, dt, FluxKind::Rusanov, {}, TimeMode::Explicit);
  for (double d : mass_drift(ex)) CHECK(std::abs(d) <= 1e-12);

  sol.steps[7][31] += 1e-3;
  const auto drift = mass_drift(sol);
  CHECK(drift[7] == doctest::Approx(1e-3 / 60.0).epsilon(1e-6));
  CHECK(std::abs(drift[6]) <= 1e-12);
  const auto defect = cell_entropy_defect(sol, entropy_k_grid(*sol.model, 21));
  CHECK(defect.max_defect > 1e-3);
  CHECK((defect.step == 7 || defect.step == 8));
  CHECK(std::abs(defect.cell - 31) <= 1);
}

TEST_CASE("functionals vanish where they should") {
  const auto constant = run_evolution(model_with("fig1c", "1", 0.2), support::interval(30), 0.02,
                                      FluxKind::Godunov, {}, TimeMode::Implicit);
  CHECK(weak_bv_functional(constant) == doctest::Approx(0.0).scale(1e-15));
  CHECK(discrete_l2h1_functional(constant) == 0.0);
  const auto heat = implicit_run("heat-like", 30, 1e-3, 0.05);
  CHECK(weak_bv_functional(heat) == 0.0);
  CHECK(discrete_l2h1_functional(heat) > 0.0);
  const auto hyper = implicit_run("fig1a", 30, 1e-2, 0.2);
  CHECK(discrete_l2h1_functional(hyper) == 0.0);
  CHECK(weak_bv_functional(hyper) > 0.0);
}

TEST_CASE("weak BV and L2(H1) functionals along ladders") {
  std::vector<double> q, e;
  for (int j = 0; j < 3; ++j) {
    const int n = 50 << j;
    const double dt = 4e-3 / (1 << j);
    const auto a = implicit_run("fig1a", n, dt);
    q.push_back(weak_bv_functional(a) * std::sqrt(a.mesh->h()));
    e.push_back(discrete_l2h1_functional(implicit_run("fig1c", n, dt)));
  }
  for (int j = 1; j < 3; ++j) {
    CAPTURE(j);
    CHECK(q[j] <= 1.2 * q[j - 1]);
    CHECK(e[j] <= 1.2 * e[j - 1]);
    CHECK(e[j] >= e[j - 1] / 1.2);
  }
}

TEST_CASE("diagnostics are unchanged when the cell order is mirrored") {
  const std::string u0 = "0.9*ind(x, 0.15, 0.4) + 0.3*ind(x, 0.55, 0.9)";
  const std::string mirrored = "0.9*ind(1-x, 0.15, 0.4) + 0.3*ind(1-x, 0.55, 0.9)";
  const auto mesh = support::interval(64);
  const auto a = run_evolution(model_with("fig1c", u0, 0.3), mesh, 0.01, FluxKind::Godunov, {}, TimeMode::Implicit);
  const auto b = run_evolution(model_with("fig1c", mirrored, 0.3, {-1.0, 0.0}), mesh, 0.01, FluxKind::Godunov, {},
                               TimeMode::Implicit);
  for (int n = 0; n <= a.num_steps(); ++n)
    for (int k = 0; k < 64; ++k) REQUIRE(a.steps[n][k] == doctest::Approx(b.steps[n][63 - k]).epsilon(1e-9));
  CHECK(weak_bv_functional(a) == doctest::Approx(weak_bv_functional(b)).epsilon(1e-9));
  CHECK(discrete_l2h1_functional(a) == doctest::Approx(discrete_l2h1_functional(b)).epsilon(1e-9));
  CHECK(lp_norm(a, 1.0) == doctest::Approx(lp_norm(b, 1.0)).epsilon(1e-12));
  CHECK(lp_norm(a, 2.0) == doctest::Approx(lp_norm(b, 2.0)).epsilon(1e-12));
  const auto da = mass_drift(a), db = mass_drift(b);
  for (std::size_t n = 0; n < da.size(); ++n) CHECK(std::abs(da[n] - db[n]) <= 1e-13);
  const auto ra = entropy_sweep(a, 11, 48), rb = entropy_sweep(b, 11, 48);
  CHECK(std::abs(ra.min_discrete_residual - rb.min_discrete_residual) <= 1e-11);
}

TEST_CASE("Cauchy differences") {
  const auto sol = implicit_run("fig1a", 40, 1e-2, 0.2);
  CHECK(cauchy_difference(sol, sol, 1.0) == 0.0);
  CHECK(oscillation_proxy(sol, sol) == 0.0);
  const auto fine = implicit_run("fig1a", 80, 5e-3, 0.2);
  const double inj = cauchy_difference(sol, fine, 1.0, Comparison::Injection);
  const double res = cauchy_difference(sol, fine, 1.0, Comparison::Restriction);
  CHECK(inj > 0.0);
  CHECK(res > 0.0);
  CHECK(res <= inj + 1e-15);
  CHECK(cauchy_difference(sol, fine, 2.0) > 0.0);
  CHECK(kind_of([&] { cauchy_difference(sol, fine, 0.5); }) == ErrorKind::Parameter);
  CHECK(kind_of([&] { cauchy_difference(sol, implicit_run("fig1a", 60, 5e-3, 0.2), 1.0); }) == ErrorKind::Parameter);
  CHECK(kind_of([&] { cauchy_difference(sol, implicit_run("fig1a", 80, 3e-3, 0.2), 1.0); }) == ErrorKind::Parameter);
  CHECK(lp_norm(sol, 1.0) == doctest::Approx(0.24 * 0.2).epsilon(1e-9));
}

TEST_CASE("refinement study tables") {
  const auto model = support::builtin("fig1a", 0.2);
  const auto m = support::interval(40);
  const auto same = refinement_study(model, FluxKind::Godunov, {{m, 0.01}, {m, 0.01}}, 1.0, {});
  CHECK(same.rows[0].difference == 0.0);
  CHECK(std::isnan(same.rows[1].difference));
  CHECK(kind_of([&] { refinement_study(model, FluxKind::Godunov, {{m, 0.01}}, 1.0, {}); }) == ErrorKind::Parameter);
  CHECK(kind_of([&] {
          refinement_study(model, FluxKind::Godunov, {{m, 0.01}, {support::interval(50), 0.005}}, 1.0, {});
        }) == ErrorKind::Parameter);
  CHECK(kind_of([&] {
          refinement_study(model, FluxKind::Godunov, {{m, 0.01}, {support::interval(80), 0.004}}, 1.0, {});
        }) == ErrorKind::Parameter);

  const auto ladder = interval_ladder(0.0, 1.0, 50, 4, 4e-3);
  REQUIRE(ladder.size() == 4);
  CHECK(ladder[3].mesh->num_cells() == 400);
  CHECK(ladder[3].dt == doctest::Approx(5e-4));
  CHECK(interval_ladder(0.0, 1.0, 10, 3, 1e-2, 2)[2].dt == doctest::Approx(1e-2 / 16));
  CHECK(kind_of([] { interval_ladder(0.0, 1.0, 10, 3, 1e-2, 3); }) == ErrorKind::Parameter);

  const auto table = refinement_study(support::builtin("fig1a"), FluxKind::Godunov, ladder, 1.0, {});
  CHECK(table.strictly_decreasing());
  CHECK(table.rows[1].ratio == doctest::Approx(table.rows[0].difference / table.rows[1].difference));
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + 1 < table.solutions.size(); ++j) {
    const double osc = oscillation_proxy(table.solutions[j], table.solutions[j + 1]);
    CHECK(osc < prev);
    prev = osc;
  }
}

TEST_CASE("heat ladder converges at second order under restriction") {
  const auto model = support::builtin("heat-cosine", 0.1);
  const auto table = refinement_study(model, FluxKind::Godunov, interval_ladder(0.0, 1.0, 10, 4, 4e-3, 2), 1.0, {},
                                      TimeMode::Implicit, Comparison::Restriction);
  for (int j = 1; j <= 2; ++j) {
    CAPTURE(j);
    CHECK(table.rows[j].ratio == doctest::Approx(4.0).epsilon(0.15));
  }
}

TEST_CASE("boundary layer probe") {
  auto explicit_ladder = [](const std::string& name) {
    std::vector<DiscreteSolution> ladder;
    const auto model = support::builtin(name, 0.5);
    // the limit scales with h here, so quartering the finest step count keeps every level stable and nested
    const double finest = cfl_limit(*model, *support::interval(200), NumericalFlux(FluxKind::Godunov, *model), {});
    const int steps = 4 * static_cast<int>(std::ceil(0.5 / (4.0 * finest)));
    for (int n : {50, 100, 200}) {
      const int level_steps = steps * n / 200;
      ladder.push_back(run_evolution(model, support::interval(n), 0.5 / level_steps, FluxKind::Godunov, {},
                                     TimeMode::Explicit));
    }
    return ladder;
  };
  const auto a = boundary_layer_probe(explicit_ladder("fig1a"));
  for (const auto& row : a.rows) CHECK(row.boundary_cell_max <= 1.0 + 1e-9);
  REQUIRE(a.rows.size() == 3);
  CHECK(std::isnan(a.rows[2].interior_difference));
  CHECK(a.rows[0].interior_l1 > 0.0);
  CHECK(kind_of([&] { boundary_layer_probe({}, 0.5, 0.5); }) == ErrorKind::Parameter);

  BoundaryLayerReport synthetic;
  synthetic.rows = {{0.1, 1.0, 0.0, 0.0, 0.3}, {0.05, 2.0, 0.0, 0.0, 0.2}, {0.025, 4.0, 0.0, 0.0, NAN}};
  CHECK(synthetic.boundary_max_increasing());
  CHECK(synthetic.interior_cauchy_decreasing());
  synthetic.rows[1].boundary_cell_max = 0.5;
  CHECK_FALSE(synthetic.boundary_max_increasing());
}
