#pragma once

// Run configuration: one JSON document with the sections
//   model       builtin?, name, f, phi, u0, g, u_c, u_max, T, lipschitz_f,
//               lipschitz_phi, flux_ceiling, direction
//   mesh        kind ("interval" | "rectangle"), a, b, n, grading | lx, ly, nx, ny
//   scheme      mode, dt, cfl_safety, flux, nonlinear_tol, max_iters, strategy, backend
//   output      directory, emit_plots
//   diagnostics k_grid, xi_count, nu_budget, defect_budget, levels, dt_exponent,
//               norm, comparison, trajectory, second_source
// Every section and key is optional; unknown keys are rejected. With
// model.builtin set, the named model is the base and other keys override it.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "fvdeg/diagnostics.hpp"
#include "fvdeg/io.hpp"

namespace fvdeg {

struct MeshConfig {
  std::string kind = "interval";
  double a = 0.0, b = 1.0;
  int n = 100;
  std::optional<std::string> grading;  // expression in x mapping [0, 1] onto [0, 1]
  double lx = 1.0, ly = 1.0;
  int nx = 20, ny = 20;
};

struct SchemeConfig {
  TimeMode mode = TimeMode::Implicit;
  std::optional<double> dt;  // default: the largest T / N not above the CFL limit
  FluxKind flux = FluxKind::Godunov;
  SolverConfig solver;
};

struct OutputConfig {
  std::string directory = "out";
  bool emit_plots = false;
};

struct DiagnosticsConfig {
  int k_grid = 21;
  int xi_count = 48;
  double nu_budget = 0.05;       // verify fails when the minimum residual is below -nu_budget
  double defect_budget = 1e-8;   // ... or a cell entropy inequality is violated by more
  int levels = 4;
  int dt_exponent = 1;           // dt ~ h (1) or h^2 (2) along a ladder
  double norm = 1.0;
  Comparison comparison = Comparison::Injection;
  std::optional<std::string> trajectory;     // verify an existing trajectory.csv
  std::optional<std::string> second_source;  // g for the resolvent contraction probe
};

struct RunConfig {
  std::optional<std::string> builtin;
  ModelSpec model;
  MeshConfig mesh;
  SchemeConfig scheme;
  OutputConfig output;
  DiagnosticsConfig diagnostics;
  std::filesystem::path base_dir;  // relative paths in the document resolve against this
};

/// Parses a configuration document; `origin` names it in error messages.
RunConfig parse_run_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

/// Built objects and resolved defaults for one configuration.
struct RunSetup {
  RunConfig config;
  std::shared_ptr<const Model> model;
  std::shared_ptr<const Mesh> mesh;
  ValidationReport validation;
  double dt = 0.0;
  double cfl_limit = 0.0;
};

/// Builds model and mesh, resolves dt, and rejects an explicit dt above the CFL limit.
RunSetup resolve(const RunConfig& config);

Mesh build_mesh(const MeshConfig& config);

/// The fully resolved configuration, as echoed in manifests.
io::Json to_json(const RunSetup& setup);

}  // namespace fvdeg
