#include "fvdeg/stationary.hpp"

#include <algorithm>
#include <cmath>

#include "fvdeg/errors.hpp"

namespace fvdeg {

std::vector<double> source_cell_averages(const Model& model, const Mesh& mesh) {
  std::vector<double> out(static_cast<std::size_t>(mesh.num_cells()));
  constexpr int kSub = 32;
  const auto& d = mesh.description();
  for (int k = 0; k < mesh.num_cells(); ++k) {
    double sum = 0.0;
    if (mesh.dim() == 1) {
      const double a = d.nodes[k], b = d.nodes[k + 1];
      for (int i = 0; i < kSub; ++i) sum += model.g.at(a + (b - a) * (i + 0.5) / kSub);
      sum /= kSub;
    } else {
      const double dx = d.lx / d.nx, dy = d.ly / d.ny;
      const auto c = mesh.cell(k).center;
      for (int j = 0; j < kSub; ++j)
        for (int i = 0; i < kSub; ++i)
          sum += model.g.at(c[0] - 0.5 * dx + dx * (i + 0.5) / kSub, c[1] - 0.5 * dy + dy * (j + 0.5) / kSub);
      sum /= kSub * kSub;
    }
    if (!std::isfinite(sum)) throw Error(ErrorKind::InvalidData, "source g is not finite in cell " + std::to_string(k));
    out[k] = sum;
  }
  return out;
}

std::vector<double> stationary_solve(const StationaryProblem& problem, const SolverConfig& cfg, StepStats* stats) {
  if (static_cast<int>(problem.g.size()) != problem.mesh->num_cells())
    throw Error(ErrorKind::InvalidData, "source vector size does not match the mesh");
  for (double v : problem.g)
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidData, "source vector is not finite");
  const NumericalFlux flux(problem.flux, *problem.model);
  ImplicitSolver solver(*problem.mesh, *problem.model, flux, cfg);
  return solver.step(problem.g, 1.0, stats);
}

ContractionReport resolvent_contraction_probe(const StationaryProblem& first, std::span<const double> other_source,
                                              const SolverConfig& cfg) {
  StationaryProblem second = first;
  second.g.assign(other_source.begin(), other_source.end());
  const auto u = stationary_solve(first, cfg);
  const auto v = stationary_solve(second, cfg);
  ContractionReport r;
  const auto cells = first.mesh->cells();
  bool le = true, ge = true;
  for (std::size_t k = 0; k < u.size(); ++k) {
    r.solution_l1 += cells[k].measure * std::abs(u[k] - v[k]);
    r.source_l1 += cells[k].measure * std::abs(first.g[k] - second.g[k]);
    le = le && first.g[k] <= second.g[k];
    ge = ge && first.g[k] >= second.g[k];
  }
  r.excess = r.solution_l1 - r.source_l1;
  r.budget = 2.0 * cfg.nonlinear_tol * first.mesh->domain_measure();
  r.contraction_violated = r.excess > r.budget;
  r.sources_ordered = le || ge;
  if (r.sources_ordered) {
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double d = le ? u[k] - v[k] : v[k] - u[k];
      r.order_violation = std::max(r.order_violation, d);
    }
    r.order_violated = r.order_violation > cfg.nonlinear_tol;
  }
  return r;
}

std::vector<double> crandall_liggett_march(const Model& model, const Mesh& mesh, std::span<const double> u0,
                                           int n_steps, double T, FluxKind flux_kind, const SolverConfig& cfg) {
  if (n_steps < 1) throw Error(ErrorKind::Parameter, "n_steps must be at least 1");
  if (!(T > 0.0)) throw Error(ErrorKind::Parameter, "T must be positive");
  const NumericalFlux flux(flux_kind, model);
  ImplicitSolver solver(mesh, model, flux, cfg);
  std::vector<double> u(u0.begin(), u0.end());
  const double dt = T / n_steps;
  for (int n = 0; n < n_steps; ++n) u = solver.step(u, dt);
  return u;
}

std::vector<double> interface_total_flux(const Model& model, const Mesh& mesh, FluxKind flux_kind,
                                         std::span<const double> u) {
  const NumericalFlux flux(flux_kind, model);
  InterfaceFluxes fl;
  kernels::serial::interface_fluxes({mesh, model, flux}, u, fl, false);
  return fl.value;
}

}  // namespace fvdeg
