#include "fvdeg/config.hpp"

#include <cmath>
#include <functional>
#include <set>

#include "fvdeg/errors.hpp"

namespace fvdeg {

namespace {

using Json = nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& field, const std::string& msg) {
  throw Error(ErrorKind::Parse, origin + ": " + field + ": " + msg);
}

class Section {
 public:
  Section(const Json& doc, std::string origin, std::string name, std::set<std::string> allowed)
      : origin_(std::move(origin)), name_(std::move(name)) {
    if (!doc.contains(name_)) return;
    node_ = &doc.at(name_);
    if (!node_->is_object()) fail(origin_, name_, "expected an object");
    for (const auto& [key, value] : node_->items())
      if (!allowed.count(key)) fail(origin_, name_ + "." + key, "unknown key");
  }

  bool has(const std::string& key) const { return node_ && node_->contains(key) && !node_->at(key).is_null(); }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_->at(key);
    if (!v.is_number()) fail(origin_, field(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(origin_, field(key), "expected a finite number");
    return d;
  }

  int integer(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_->at(key);
    if (!v.is_number_integer()) fail(origin_, field(key), "expected an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_->at(key);
    if (!v.is_boolean()) fail(origin_, field(key), "expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_->at(key);
    if (!v.is_string()) fail(origin_, field(key), "expected a string");
    return v.get<std::string>();
  }

  template <class T, class F>
  T parsed(const std::string& key, T fallback, F parse) const {
    if (!has(key)) return fallback;
    try {
      return parse(text(key, ""));
    } catch (const Error& e) {
      fail(origin_, field(key), e.what());
    }
  }

  const Json& raw(const std::string& key) const { return node_->at(key); }
  std::string field(const std::string& key) const { return name_ + "." + key; }

 private:
  std::string origin_, name_;
  const Json* node_ = nullptr;
};

std::string line_context(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

Backend parse_backend(std::string_view s) {
  if (s == "serial") return Backend::Serial;
  if (s == "openmp") return Backend::OpenMP;
  throw Error(ErrorKind::Parameter, "unknown backend '" + std::string(s) + "' (serial | openmp)");
}

Comparison parse_comparison(std::string_view s) {
  if (s == "injection") return Comparison::Injection;
  if (s == "restriction") return Comparison::Restriction;
  throw Error(ErrorKind::Parameter, "unknown comparison '" + std::string(s) + "' (injection | restriction)");
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::Parse, origin + ": " + line_context(text, e.byte == 0 ? 0 : e.byte - 1) +
                                      ": malformed JSON (" + e.what() + ")");
  }
  if (!doc.is_object()) throw Error(ErrorKind::Parse, origin + ": top level must be an object");
  for (const auto& [key, value] : doc.items())
    if (key != "model" && key != "mesh" && key != "scheme" && key != "output" && key != "diagnostics")
      fail(origin, key, "unknown section");

  RunConfig c;
  const Section model(doc, origin, "model",
                      {"builtin", "name", "f", "phi", "u0", "g", "u_c", "u_max", "T", "lipschitz_f",
                       "lipschitz_phi", "flux_ceiling", "direction"});
  if (model.has("builtin")) {
    c.builtin = model.text("builtin", "");
    c.model = model.parsed<ModelSpec>("builtin", {}, [](const std::string& s) { return builtin_model(s); });
  }
  auto& m = c.model;
  m.name = model.text("name", c.builtin.value_or(m.name));
  m.f = model.text("f", m.f);
  m.phi = model.text("phi", m.phi);
  m.u0 = model.text("u0", m.u0);
  m.g = model.text("g", m.g);
  m.u_c = model.number("u_c", m.u_c);
  m.u_max = model.number("u_max", m.u_max);
  m.T = model.number("T", m.T);
  if (model.has("lipschitz_f")) m.lipschitz_f = model.number("lipschitz_f", 0.0);
  if (model.has("lipschitz_phi")) m.lipschitz_phi = model.number("lipschitz_phi", 0.0);
  if (model.has("flux_ceiling")) m.flux_ceiling = model.number("flux_ceiling", 0.0);
  if (model.has("direction")) {
    const auto& d = model.raw("direction");
    if (!d.is_array() || d.size() != 2 || !d[0].is_number() || !d[1].is_number())
      fail(origin, "model.direction", "expected [dx, dy]");
    m.direction = {d[0].get<double>(), d[1].get<double>()};
  }

  const Section mesh(doc, origin, "mesh", {"kind", "a", "b", "n", "grading", "lx", "ly", "nx", "ny"});
  auto& g = c.mesh;
  g.kind = mesh.text("kind", g.kind);
  if (g.kind != "interval" && g.kind != "rectangle") fail(origin, "mesh.kind", "expected interval or rectangle");
  g.a = mesh.number("a", g.a);
  g.b = mesh.number("b", g.b);
  g.n = mesh.integer("n", g.n);
  if (mesh.has("grading")) g.grading = mesh.text("grading", "");
  g.lx = mesh.number("lx", g.lx);
  g.ly = mesh.number("ly", g.ly);
  g.nx = mesh.integer("nx", g.nx);
  g.ny = mesh.integer("ny", g.ny);

  const Section scheme(doc, origin, "scheme",
                       {"mode", "dt", "cfl_safety", "flux", "nonlinear_tol", "max_iters", "strategy", "backend"});
  auto& s = c.scheme;
  s.mode = scheme.parsed("mode", s.mode, [](const std::string& v) { return parse_time_mode(v); });
  if (scheme.has("dt")) s.dt = scheme.number("dt", 0.0);
  s.flux = scheme.parsed("flux", s.flux, [](const std::string& v) { return parse_flux_kind(v); });
  s.solver.cfl_safety = scheme.number("cfl_safety", s.solver.cfl_safety);
  s.solver.nonlinear_tol = scheme.number("nonlinear_tol", s.solver.nonlinear_tol);
  s.solver.max_iters = scheme.integer("max_iters", s.solver.max_iters);
  s.solver.strategy = scheme.parsed("strategy", s.solver.strategy, [](const std::string& v) { return parse_strategy(v); });
  s.solver.backend = scheme.parsed("backend", s.solver.backend, [](const std::string& v) { return parse_backend(v); });

  const Section output(doc, origin, "output", {"directory", "emit_plots"});
  c.output.directory = output.text("directory", c.output.directory);
  c.output.emit_plots = output.boolean("emit_plots", c.output.emit_plots);

  const Section diag(doc, origin, "diagnostics",
                     {"k_grid", "xi_count", "nu_budget", "defect_budget", "levels", "dt_exponent", "norm",
                      "comparison", "trajectory", "second_source"});
  auto& d = c.diagnostics;
  d.k_grid = diag.integer("k_grid", d.k_grid);
  d.xi_count = diag.integer("xi_count", d.xi_count);
  d.nu_budget = diag.number("nu_budget", d.nu_budget);
  d.defect_budget = diag.number("defect_budget", d.defect_budget);
  d.levels = diag.integer("levels", d.levels);
  d.dt_exponent = diag.integer("dt_exponent", d.dt_exponent);
  d.norm = diag.number("norm", d.norm);
  d.comparison = diag.parsed("comparison", d.comparison, [](const std::string& v) { return parse_comparison(v); });
  if (diag.has("trajectory")) d.trajectory = diag.text("trajectory", "");
  if (diag.has("second_source")) d.second_source = diag.text("second_source", "");
  if (d.k_grid < 2) fail(origin, "diagnostics.k_grid", "must be at least 2");
  if (d.xi_count < 1) fail(origin, "diagnostics.xi_count", "must be at least 1");
  if (d.dt_exponent != 1 && d.dt_exponent != 2) fail(origin, "diagnostics.dt_exponent", "must be 1 or 2");
  if (!(d.norm >= 1.0)) fail(origin, "diagnostics.norm", "must be >= 1");
  if (!(d.nu_budget >= 0.0)) fail(origin, "diagnostics.nu_budget", "must be nonnegative");
  if (!(d.defect_budget >= 0.0)) fail(origin, "diagnostics.defect_budget", "must be nonnegative");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig c = parse_run_config(io::read_text(path), path.string());
  c.base_dir = path.parent_path();
  return c;
}

Mesh build_mesh(const MeshConfig& config) {
  if (config.kind == "rectangle") return build_rectangle_mesh(config.lx, config.ly, config.nx, config.ny);
  if (!config.grading) return build_interval_mesh(config.a, config.b, config.n);
  const Expression e = Expression::parse(*config.grading);
  if (e.depends_on(Var::U) || e.depends_on(Var::Y))
    throw Error(ErrorKind::InvalidMesh, "grading may only depend on x");
  const std::function<double(double)> map = [&e](double s) { return e.at(s, 0.0); };
  return build_interval_mesh(config.a, config.b, config.n, &map, *config.grading);
}

RunSetup resolve(const RunConfig& config) {
  config.scheme.solver.check();
  RunSetup s;
  s.config = config;
  auto model = std::make_shared<Model>(make_model(config.model));
  auto mesh = std::make_shared<const Mesh>(build_mesh(config.mesh));
  s.validation = validate(*model, mesh.get());
  s.model = model;
  s.mesh = mesh;
  const NumericalFlux flux(config.scheme.flux, *model);
  s.cfl_limit = cfl_limit(*model, *mesh, flux, config.scheme.solver);
  if (config.scheme.dt) {
    s.dt = *config.scheme.dt;
    if (!(s.dt > 0.0)) throw Error(ErrorKind::Parameter, "scheme.dt must be positive");
    if (config.scheme.mode == TimeMode::Explicit && s.dt > s.cfl_limit * (1.0 + 1e-12))
      throw Error(ErrorKind::Parameter, "scheme.dt = " + io::num(s.dt) + " exceeds the CFL limit " +
                                            io::num(s.cfl_limit) + " of the explicit scheme");
  } else {
    if (!std::isfinite(s.cfl_limit)) throw Error(ErrorKind::Parameter, "scheme.dt is required (no CFL limit)");
    // slack keeps an exact quotient from rounding up to one extra step
    s.dt = model->T / std::ceil(model->T / s.cfl_limit * (1.0 - 1e-12));
  }
  return s;
}

io::Json to_json(const RunSetup& setup) {
  const auto& c = setup.config;
  io::Json j;
  j["model"] = io::model_to_json(*setup.model);
  if (c.builtin) j["model"]["builtin"] = *c.builtin;
  j["mesh"] = io::mesh_to_json(*setup.mesh);
  const auto& sv = c.scheme.solver;
  j["scheme"] = {{"mode", to_string(c.scheme.mode)},
                 {"dt", setup.dt},
                 {"dt_source", c.scheme.dt ? "config" : "cfl"},
                 {"cfl_limit", setup.cfl_limit},
                 {"steps", steps_to_horizon(setup.model->T, setup.dt)},
                 {"cfl_safety", sv.cfl_safety},
                 {"flux", to_string(c.scheme.flux)},
                 {"nonlinear_tol", sv.nonlinear_tol},
                 {"max_iters", sv.max_iters},
                 {"strategy", to_string(sv.strategy)},
                 {"backend", sv.backend == Backend::Serial ? "serial" : "openmp"}};
  j["output"] = {{"directory", c.output.directory}, {"emit_plots", c.output.emit_plots}};
  const auto& d = c.diagnostics;
  j["diagnostics"] = {{"k_grid", d.k_grid},
                      {"xi_count", d.xi_count},
                      {"nu_budget", d.nu_budget},
                      {"defect_budget", d.defect_budget},
                      {"levels", d.levels},
                      {"dt_exponent", d.dt_exponent},
                      {"norm", d.norm},
                      {"comparison", d.comparison == Comparison::Injection ? "injection" : "restriction"},
                      {"trajectory", d.trajectory ? io::Json(*d.trajectory) : io::Json(nullptr)},
                      {"second_source", d.second_source ? io::Json(*d.second_source) : io::Json(nullptr)}};
  io::Json v;
  v["phi_monotone"] = setup.validation.phi_monotone;
  v["phi_flat_below_uc"] = setup.validation.phi_flat_below_uc;
  v["phi_strict_above_uc"] = setup.validation.phi_strict_above_uc;
  v["h1_satisfied"] = setup.validation.h1_satisfied;
  v["u0_min"] = setup.validation.u0_min;
  v["u0_max"] = setup.validation.u0_max;
  v["notes"] = setup.validation.notes;
  j["validation"] = v;
  return j;
}

}  // namespace fvdeg
