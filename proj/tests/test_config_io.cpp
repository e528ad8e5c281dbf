#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fvdeg/config.hpp"
#include "fvdeg/errors.hpp"
#include "fvdeg/io.hpp"
#include "support.hpp"

using namespace fvdeg;
namespace fs = std::filesystem;

namespace {

Error error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  FAIL("no error raised");
  return Error(ErrorKind::Io, "");
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fvdeg_test_config_io" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("empty document gives the defaults") {
  const RunConfig c = parse_run_config("{}");
  CHECK(c.mesh.kind == "interval");
  CHECK(c.mesh.n == 100);
  CHECK(c.scheme.mode == TimeMode::Implicit);
  CHECK(c.scheme.flux == FluxKind::Godunov);
  CHECK_FALSE(c.scheme.dt.has_value());
  CHECK(c.scheme.solver.nonlinear_tol == 1e-10);
  CHECK(c.scheme.solver.max_iters == 200);
  CHECK(c.output.directory == "out");
  CHECK(c.diagnostics.k_grid == 21);
}

TEST_CASE("builtin model with overrides") {
  const RunConfig c = parse_run_config(R"j({
    "model": {"builtin": "fig1c", "T": 0.25, "u0": "0.5"},
    "mesh": {"n": 64},
    "scheme": {"mode": "explicit", "flux": "rusanov", "cfl_safety": 0.4, "backend": "serial"},
    "diagnostics": {"comparison": "restriction", "levels": 3}
  })j");
  CHECK(c.builtin == std::optional<std::string>("fig1c"));
  CHECK(c.model.phi == "pos(u-0.6)");
  CHECK(c.model.T == 0.25);
  CHECK(c.model.u0 == "0.5");
  CHECK(c.mesh.n == 64);
  CHECK(c.scheme.mode == TimeMode::Explicit);
  CHECK(c.scheme.flux == FluxKind::Rusanov);
  CHECK(c.scheme.solver.cfl_safety == 0.4);
  CHECK(c.scheme.solver.backend == Backend::Serial);
  CHECK(c.diagnostics.comparison == Comparison::Restriction);
  CHECK(c.diagnostics.levels == 3);
}

TEST_CASE("unknown keys and sections are rejected") {
  auto e = error_of([] { parse_run_config(R"j({"model": {"builtin": "fig1a", "flux": "godunov"}})j", "cfg.json"); });
  CHECK(e.kind() == ErrorKind::Parse);
  CHECK(std::string(e.what()).find("model.flux") != std::string::npos);
  CHECK(std::string(e.what()).find("cfg.json") != std::string::npos);
  CHECK(error_of([] { parse_run_config(R"j({"solver": {}})j"); }).kind() == ErrorKind::Parse);
  CHECK(error_of([] { parse_run_config(R"j({"mesh": {"n": "many"}})j"); }).kind() == ErrorKind::Parse);
  CHECK(error_of([] { parse_run_config(R"j({"mesh": {"n": 10.5}})j"); }).kind() == ErrorKind::Parse);
  CHECK(error_of([] { parse_run_config(R"j({"mesh": {"kind": "sphere"}})j"); }).kind() == ErrorKind::Parse);
  CHECK(error_of([] { parse_run_config(R"j({"diagnostics": {"k_grid": 1}})j"); }).kind() == ErrorKind::Parse);
  CHECK(error_of([] { parse_run_config("[1, 2]"); }).kind() == ErrorKind::Parse);
}

TEST_CASE("malformed JSON reports the line") {
  const auto e = error_of([] { parse_run_config("{\n  \"mesh\": {\n    \"n\": 10,,\n  }\n}", "broken.json"); });
  CHECK(e.kind() == ErrorKind::Parse);
  CHECK(std::string(e.what()).find("broken.json") != std::string::npos);
  CHECK(std::string(e.what()).find("line 3") != std::string::npos);
}

TEST_CASE("resolve fills the time step from the CFL limit") {
  RunConfig c = parse_run_config(R"j({"model": {"builtin": "fig1a", "T": 0.5}, "mesh": {"n": 100},
                                      "scheme": {"mode": "explicit"}})j");
  const RunSetup s = resolve(c);
  CHECK(s.cfl_limit == doctest::Approx(0.00125).epsilon(1e-6));
  CHECK(s.dt <= s.cfl_limit * (1.0 + 1e-12));
  const double steps = 0.5 / s.dt;
  CHECK(steps == doctest::Approx(std::round(steps)).epsilon(1e-12));
  CHECK(steps == doctest::Approx(400.0));

  c.scheme.dt = 2.0 * s.cfl_limit;
  CHECK(error_of([&] { resolve(c); }).kind() == ErrorKind::Parameter);
  c.scheme.dt = -1.0;
  CHECK(error_of([&] { resolve(c); }).kind() == ErrorKind::Parameter);
}

TEST_CASE("manifest echoes resolved defaults") {
  const RunSetup s = resolve(parse_run_config(R"j({"model": {"builtin": "fig1c"}, "mesh": {"n": 20}})j"));
  const io::Json j = to_json(s);
  CHECK(j["model"]["phi"] == "pos(u-0.6)");
  CHECK(j["mesh"]["n"] == 20);
  CHECK(j["scheme"]["dt"].get<double>() == s.dt);
  CHECK(j["scheme"].contains("nonlinear_tol"));
  CHECK(j["scheme"].contains("max_iters"));
  CHECK(j["scheme"].contains("cfl_safety"));
  CHECK(j["diagnostics"].contains("nu_budget"));
}

TEST_CASE("mesh from configuration") {
  MeshConfig m;
  m.n = 3;
  m.grading = "x^2";
  const Mesh g = build_mesh(m);
  CHECK(g.description().nodes[1] == doctest::Approx(1.0 / 9.0));
  m.grading = "u";
  CHECK(error_of([&] { build_mesh(m); }).kind() == ErrorKind::InvalidMesh);
  m.grading = "1 - x";
  CHECK(error_of([&] { build_mesh(m); }).kind() == ErrorKind::InvalidMesh);
  MeshConfig r;
  r.kind = "rectangle";
  r.lx = 2.0;
  r.nx = 4;
  r.ny = 3;
  CHECK(build_mesh(r).num_cells() == 12);
}

TEST_CASE("numbers keep 17 significant digits") {
  CHECK(io::num(0.1) == "0.10000000000000001");
  CHECK(std::stod(io::num(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("trajectory round trip is bit-identical") {
  const auto dir = scratch("roundtrip");
  const auto model = support::builtin("fig1c", 0.1);
  const auto mesh = support::interval(33);
  const auto sol = run_evolution(model, mesh, 0.01, FluxKind::EngquistOsher, {}, TimeMode::Implicit);
  io::write_trajectory_csv(dir / "trajectory.csv", sol);
  const auto back = io::read_trajectory_csv(dir / "trajectory.csv", *mesh);
  REQUIRE(back.steps.size() == sol.steps.size());
  for (std::size_t n = 0; n < sol.steps.size(); ++n) {
    CHECK(back.times[n] == sol.time(static_cast<int>(n)));
    CHECK(back.steps[n] == sol.steps[n]);
  }
  std::ifstream in(dir / "trajectory.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,cell,x,u");
}

TEST_CASE("2D trajectory header") {
  const auto dir = scratch("traj2d");
  auto s = builtin_model("heat-like");
  s.T = 0.01;
  const auto model = std::make_shared<const Model>(make_model(s));
  const auto mesh = std::make_shared<const Mesh>(build_rectangle_mesh(1.0, 1.0, 3, 3));
  const auto sol = run_evolution(model, mesh, 0.005, FluxKind::Godunov, {}, TimeMode::Implicit);
  io::write_trajectory_csv(dir / "t.csv", sol);
  CHECK(io::read_text(dir / "t.csv").rfind("t,cell,x,y,u\n", 0) == 0);
  const auto back = io::read_trajectory_csv(dir / "t.csv", *mesh);
  CHECK(back.steps.back() == sol.steps.back());
}

TEST_CASE("malformed trajectories are located") {
  const auto dir = scratch("bad");
  const auto mesh = support::interval(2);
  io::write_text(dir / "a.csv", "t,cell,x,u\n0,0,0.25,0.5\n0,1,0.75,zero\n");
  auto e = error_of([&] { io::read_trajectory_csv(dir / "a.csv", *mesh); });
  CHECK(e.kind() == ErrorKind::Parse);
  CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  io::write_text(dir / "b.csv", "time,u\n");
  CHECK(error_of([&] { io::read_trajectory_csv(dir / "b.csv", *mesh); }).kind() == ErrorKind::Parse);
  io::write_text(dir / "c.csv", "t,cell,x,u\n0,0,0.25,0.5\n");
  CHECK(error_of([&] { io::read_trajectory_csv(dir / "c.csv", *mesh); }).kind() == ErrorKind::Parse);
  CHECK(error_of([&] { io::read_trajectory_csv(dir / "missing.csv", *mesh); }).kind() == ErrorKind::Io);
}

TEST_CASE("report writers") {
  const auto dir = scratch("reports");
  const auto sol = run_evolution(support::builtin("fig1a", 0.05), support::interval(10), 0.01, FluxKind::Godunov,
                                 {}, TimeMode::Implicit);
  io::write_mass_log_csv(dir / "mass.csv", sol);
  std::istringstream mass(io::read_text(dir / "mass.csv"));
  std::string line;
  std::getline(mass, line);
  CHECK(line == "step,t,mass,drift,min,max,iterations,residual");
  int rows = 0;
  while (std::getline(mass, line)) ++rows;
  CHECK(rows == 6);

  const auto rep = entropy_sweep(sol, 3, 2);
  io::write_entropy_csv(dir / "entropy.csv", rep);
  CHECK(io::read_text(dir / "entropy.csv").rfind("k,xi,residual,discrete_residual\n", 0) == 0);

  const auto script = io::profile_plot_script({"a.csv", "b.csv"}, "demo", "demo.png");
  CHECK(script.find("a.csv") != std::string::npos);
  CHECK(script.find("demo.png") != std::string::npos);
  CHECK(io::mesh_to_json(*sol.mesh)["n"] == 10);
  CHECK(io::model_to_json(*sol.model)["f"] == "u*(1-u)");
}
