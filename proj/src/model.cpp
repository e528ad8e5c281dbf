#include "fvdeg/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fvdeg/errors.hpp"

namespace fvdeg {

namespace {

constexpr int kSamples = 10000;
constexpr double kZeroTol = 1e-14;

Expression parse_in(const std::string& src, const char* field, bool allow_u, bool allow_x) {
  Expression e = Expression::parse(src);
  if (!allow_u && e.depends_on(Var::U))
    throw Error(ErrorKind::InvalidModel, std::string(field) + " must not depend on u");
  if (!allow_x && (e.depends_on(Var::X) || e.depends_on(Var::Y)))
    throw Error(ErrorKind::InvalidModel, std::string(field) + " must not depend on x or y");
  return e;
}

}  // namespace

double estimate_lipschitz(const Expression& e, const Expression& de, double lo, double hi, int samples) {
  double L = 0.0;
  double prev = e(lo);
  for (int i = 0; i <= samples; ++i) {
    const double s = lo + (hi - lo) * static_cast<double>(i) / samples;
    L = std::max(L, std::abs(de(s)));
    if (i > 0) {
      const double v = e(s);
      L = std::max(L, std::abs(v - prev) / ((hi - lo) / samples));
      prev = v;
    }
  }
  return L;
}

Model make_model(const ModelSpec& spec) {
  if (!(spec.u_max > 0.0)) throw Error(ErrorKind::InvalidModel, "u_max must be positive");
  if (!(spec.u_c >= 0.0 && spec.u_c <= spec.u_max))
    throw Error(ErrorKind::InvalidModel, "u_c must lie in [0, u_max]");
  if (!(spec.T >= 0.0)) throw Error(ErrorKind::InvalidModel, "T must be nonnegative");

  Model m;
  m.spec = spec;
  m.f = parse_in(spec.f, "f", true, false);
  m.phi = parse_in(spec.phi, "phi", true, false);
  m.u0 = parse_in(spec.u0, "u0", false, true);
  m.g = parse_in(spec.g, "g", false, true);
  m.df = m.f.derivative(Var::U);
  m.dphi = m.phi.derivative(Var::U);
  m.u_c = spec.u_c;
  m.u_max = spec.u_max;
  m.T = spec.T;
  m.flux_ceiling = spec.flux_ceiling.value_or(spec.u_max);
  if (m.flux_ceiling < m.u_max) throw Error(ErrorKind::InvalidModel, "flux_ceiling must be at least u_max");
  const double dn = std::hypot(spec.direction[0], spec.direction[1]);
  if (!(dn > 0.0)) throw Error(ErrorKind::InvalidModel, "convection direction must be nonzero");
  m.direction = spec.direction;
  m.lipschitz_f = spec.lipschitz_f ? *spec.lipschitz_f : estimate_lipschitz(m.f, m.df, 0.0, m.u_max, kSamples);
  m.lipschitz_phi =
      spec.lipschitz_phi ? *spec.lipschitz_phi : estimate_lipschitz(m.phi, m.dphi, 0.0, m.u_max, kSamples);
  m.h1_satisfied = std::abs(m.f(0.0)) <= kZeroTol && std::abs(m.f(m.u_max)) <= kZeroTol;
  validate(m);
  return m;
}

ValidationReport validate(const Model& model, const Mesh* mesh) {
  ValidationReport r;
  const double umax = model.u_max;
  double prev = model.phi(0.0);
  for (int i = 1; i <= kSamples; ++i) {
    const double s = umax * static_cast<double>(i) / kSamples;
    const double v = model.phi(s);
    if (v < prev - kZeroTol) r.phi_monotone = false;
    if (s <= model.u_c && std::abs(v) > kZeroTol) r.phi_flat_below_uc = false;
    if (s > model.u_c && !(v > prev)) r.phi_strict_above_uc = false;
    prev = v;
  }
  if (std::abs(model.phi(0.0)) > kZeroTol) r.phi_flat_below_uc = false;
  if (!r.phi_monotone) throw Error(ErrorKind::InvalidModel, "phi is decreasing somewhere on [0, u_max]");
  if (!r.phi_flat_below_uc)
    r.notes.push_back("phi does not vanish on [0, u_c]");
  if (!r.phi_strict_above_uc && model.u_c < umax)
    r.notes.push_back("phi is not strictly increasing on [u_c, u_max]");

  r.h1_satisfied = model.h1_satisfied;
  if (!r.h1_satisfied) r.notes.push_back("f(0) = f(u_max) = 0 fails; no invariant region is guaranteed");

  // u0 on a sample grid (cell subsamples when a mesh is given)
  r.u0_min = std::numeric_limits<double>::infinity();
  r.u0_max = -std::numeric_limits<double>::infinity();
  auto probe = [&](double x, double y) {
    const double v = model.u0.at(x, y);
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidData, "u0 is not finite at x=" + std::to_string(x));
    r.u0_min = std::min(r.u0_min, v);
    r.u0_max = std::max(r.u0_max, v);
  };
  if (mesh != nullptr && mesh->dim() == 2) {
    const auto hi = mesh->upper();
    for (int j = 0; j <= 200; ++j)
      for (int i = 0; i <= 200; ++i) probe(hi[0] * i / 200.0, hi[1] * j / 200.0);
  } else {
    const double a = mesh ? mesh->lower()[0] : 0.0;
    const double b = mesh ? mesh->upper()[0] : 1.0;
    for (int i = 0; i <= kSamples; ++i) probe(a + (b - a) * (i + 0.5) / (kSamples + 1), 0.0);
  }
  if (r.u0_min < -1e-12 || r.u0_max > umax + 1e-12)
    throw Error(ErrorKind::InvalidData, "u0 takes values outside [0, u_max]");
  return r;
}

const std::map<std::string, ModelSpec>& builtin_models() {
  static const std::map<std::string, ModelSpec> catalog = [] {
    std::map<std::string, ModelSpec> c;
    ModelSpec a;
    a.name = "fig1a";
    a.f = "u*(1-u)";
    a.phi = "0";
    a.u0 = kDefaultInitialDatum;
    a.u_c = 1.0;
    a.u_max = 1.0;
    a.T = 0.5;
    c[a.name] = a;

    ModelSpec b = a;
    b.name = "fig1b";
    b.f = "u^2/2";
    // mass reaching the outflow boundary piles up in the last cell; the flux
    // must stay evaluable far above u_max
    b.flux_ceiling = 1000.0;
    b.T = 2.0;
    c[b.name] = b;

    ModelSpec cc = a;
    cc.name = "fig1c";
    cc.phi = "pos(u-0.6)";
    cc.u_c = 0.6;
    c[cc.name] = cc;

    ModelSpec heat;
    heat.name = "heat-like";
    heat.f = "0";
    heat.phi = "u";
    heat.u0 = kDefaultInitialDatum;
    heat.u_c = 0.0;
    heat.u_max = 1.0;
    heat.T = 0.1;
    c[heat.name] = heat;

    ModelSpec cosine = heat;
    cosine.name = "heat-cosine";
    cosine.u0 = "0.5 + 0.4*cos(pi*x)";
    c[cosine.name] = cosine;
    return c;
  }();
  return catalog;
}

ModelSpec builtin_model(const std::string& name) {
  const auto& c = builtin_models();
  auto it = c.find(name);
  if (it == c.end()) throw Error(ErrorKind::Parameter, "unknown builtin model '" + name + "'");
  return it->second;
}

}  // namespace fvdeg
