#include <cmath>
#include <random>

#include "doctest.h"
#include "fvdeg/errors.hpp"
#include "fvdeg/model.hpp"
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

ModelSpec spec(const std::string& f, const std::string& phi, double u_c = 0.0) {
  ModelSpec s;
  s.f = f;
  s.phi = phi;
  s.u_c = u_c;
  return s;
}

}  // namespace

TEST_CASE("expression arithmetic and precedence") {
  CHECK(Expression::parse("1 + 2*3")(0.0) == 7.0);
  CHECK(Expression::parse("-2^2")(0.0) == -4.0);
  CHECK(Expression::parse("2^3^2")(0.0) == 512.0);
  CHECK(Expression::parse("(1 - u)/4")(0.2) == doctest::Approx(0.2));
  CHECK(Expression::parse("u*(1-u)")(0.3) == doctest::Approx(0.21).epsilon(1e-15));
  CHECK(Expression::parse("cos(pi*x)").at(1.0) == doctest::Approx(-1.0));
  CHECK(Expression::parse("max(u, 0.5) + min(u, 0.5) + abs(-u)")(0.2) == doctest::Approx(0.9));
  CHECK(Expression::parse("exp(log(3)) + sqrt(16) + sin(0)")(0.0) == doctest::Approx(7.0));
  CHECK(Expression::parse("x + 10*y").eval({0.0, 1.0, 2.0}) == 21.0);
}

TEST_CASE("indicator and positive part") {
  const auto ind = Expression::parse("0.8*ind(x, 0.3, 0.6)");
  CHECK(ind.at(0.29) == 0.0);
  CHECK(ind.at(0.3) == doctest::Approx(0.8));
  CHECK(ind.at(0.6) == doctest::Approx(0.8));
  CHECK(ind.at(0.61) == 0.0);
  const auto pos = Expression::parse("pos(u-0.6)");
  CHECK(pos(0.5) == 0.0);
  CHECK(pos(0.9) == doctest::Approx(0.3));
}

TEST_CASE("symbolic derivatives against central differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  for (const char* src : {"u*(1-u)", "u^2/2", "exp(u)*sin(3*u)", "sqrt(1+u^2)/(2+u)", "log(1+u)^3", "cos(u)^2"}) {
    const auto e = Expression::parse(src);
    const auto de = e.derivative();
    for (int i = 0; i < 20; ++i) {
      const double u = unit(rng), h = 1e-6;
      CHECK(de(u) == doctest::Approx((e(u + h) - e(u - h)) / (2 * h)).epsilon(1e-7));
    }
  }
}

TEST_CASE("derivative at a kink is the right derivative") {
  CHECK(Expression::parse("pos(u-0.6)").derivative()(0.6) == 1.0);
  CHECK(Expression::parse("abs(u)").derivative()(0.0) == 1.0);
  CHECK(Expression::parse("max(u, 0.5)").derivative()(0.5) == 1.0);
  CHECK(Expression::parse("min(u, 0.5)").derivative()(0.5) == 0.0);
}

TEST_CASE("dependence and constants") {
  CHECK(Expression::parse("2*pi").is_constant());
  CHECK(Expression::parse("x*y").depends_on(Var::Y));
  CHECK_FALSE(Expression::parse("x*y").depends_on(Var::U));
  CHECK(Expression::constant(3.5)(0.0) == 3.5);
  CHECK(Expression()(0.7) == 0.0);
}

TEST_CASE("expression parse errors") {
  for (const char* bad : {"", "1 +", "u*(1-u", "foo(u)", "z + 1", "max(u)", "1 2", "ind(x, 1)"})
    CHECK(kind_of([&] { Expression::parse(bad); }) == ErrorKind::Parse);
}

TEST_CASE("logistic flux without diffusion satisfies H1") {
  const Model m = make_model(spec("u*(1-u)", "0", 1.0));
  CHECK(m.h1_satisfied);
  CHECK(validate(m).h1_satisfied);
}

TEST_CASE("Burgers flux violates H1 and is only flagged") {
  const Model m = make_model(spec("u^2/2", "0", 1.0));
  CHECK_FALSE(m.h1_satisfied);
  const auto r = validate(m);
  CHECK_FALSE(r.h1_satisfied);
  CHECK(r.phi_monotone);
}

TEST_CASE("degenerate diffusion above a threshold") {
  const Model m = make_model(spec("u*(1-u)", "pos(u-0.6)", 0.6));
  const auto r = validate(m);
  CHECK(r.phi_monotone);
  CHECK(r.phi_flat_below_uc);
  CHECK(r.phi_strict_above_uc);
  CHECK(r.h1_satisfied);
  CHECK(m.lipschitz_phi == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(m.lipschitz_f == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("flatness below u_c is reported") {
  const auto r = validate(make_model(spec("0", "u", 0.5)));
  CHECK_FALSE(r.phi_flat_below_uc);
  CHECK(r.phi_strict_above_uc);
}

TEST_CASE("model validation errors") {
  CHECK(kind_of([] { make_model(spec("0", "1-u")); }) == ErrorKind::InvalidModel);
  CHECK(kind_of([] { make_model(spec("x*u", "0")); }) == ErrorKind::InvalidModel);
  CHECK(kind_of([] {
          auto s = spec("0", "u");
          s.u0 = "1.5";
          make_model(s);
        }) == ErrorKind::InvalidData);
  CHECK(kind_of([] {
          auto s = spec("0", "u");
          s.u0 = "u";
          make_model(s);
        }) == ErrorKind::InvalidModel);
  CHECK(kind_of([] {
          auto s = spec("0", "u");
          s.u_max = 0.0;
          make_model(s);
        }) == ErrorKind::InvalidModel);
  CHECK(kind_of([] { make_model(spec("0", "u", 2.0)); }) == ErrorKind::InvalidModel);
  CHECK(kind_of([] { builtin_model("fig9"); }) == ErrorKind::Parameter);
}

TEST_CASE("builtin catalog") {
  const auto a = make_model(builtin_model("fig1a"));
  CHECK(a.f(0.3) == doctest::Approx(0.21));
  CHECK(a.phi(0.9) == 0.0);
  CHECK(a.h1_satisfied);
  CHECK(a.u_c == a.u_max);

  const auto b = make_model(builtin_model("fig1b"));
  CHECK(b.f(1.0) == doctest::Approx(0.5));
  CHECK_FALSE(b.h1_satisfied);

  const auto c = make_model(builtin_model("fig1c"));
  CHECK(c.phi(0.6) == 0.0);
  CHECK(c.phi(0.8) == doctest::Approx(0.2));
  CHECK(c.u_c == 0.6);

  const auto heat = make_model(builtin_model("heat-like"));
  CHECK(heat.f(0.7) == 0.0);
  CHECK(heat.phi(0.7) == doctest::Approx(0.7));
  CHECK(heat.u_c == 0.0);
}

TEST_CASE("Lipschitz estimates bound sampled difference quotients") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& [f, phi] : std::vector<std::pair<std::string, std::string>>{
           {"u*(1-u)", "pos(u-0.6)"}, {"u^2/2", "u^3"}, {"sin(5*u)", "u + u^2"}}) {
    const Model m = make_model(spec(f, phi));
    for (int i = 0; i < 10000; ++i) {
      const double s = unit(rng), t = unit(rng);
      CHECK(std::abs(m.f(s) - m.f(t)) <= m.lipschitz_f * std::abs(s - t) + 1e-12);
      CHECK(std::abs(m.phi(s) - m.phi(t)) <= m.lipschitz_phi * std::abs(s - t) + 1e-12);
    }
  }
}

TEST_CASE("declared constants take precedence") {
  auto s = spec("u*(1-u)", "0");
  s.lipschitz_f = 3.0;
  s.lipschitz_phi = 0.25;
  const Model m = make_model(s);
  CHECK(m.lipschitz_f == 3.0);
  CHECK(m.lipschitz_phi == 0.25);
}
