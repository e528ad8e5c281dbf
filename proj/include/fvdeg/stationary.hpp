#pragma once

#include <memory>
#include <span>
#include <vector>

#include "fvdeg/scheme.hpp"

namespace fvdeg {

/// Discrete form of  u + div f(u) - lap phi(u) = g  with zero-flux boundaries:
///   m(K) u_K + sum_sigma Phi_sigma(u) = m(K) g_K.
struct StationaryProblem {
  std::shared_ptr<const Model> model;
  std::shared_ptr<const Mesh> mesh;
  std::vector<double> g;
  FluxKind flux = FluxKind::Godunov;
};

/// Cell averages of the model source g (same quadrature as for u0, no clamping).
std::vector<double> source_cell_averages(const Model& model, const Mesh& mesh);

/// The discrete resolvent g -> (Id + A)^{-1} g. Assembled and solved exactly as
/// one implicit step of size 1 from u_prev = g.
std::vector<double> stationary_solve(const StationaryProblem& problem, const SolverConfig& cfg,
                                     StepStats* stats = nullptr);

struct ContractionReport {
  double solution_l1 = 0.0;  // sum m(K) |u_K - v_K|
  double source_l1 = 0.0;    // sum m(K) |g_K - h_K|
  double excess = 0.0;       // solution_l1 - source_l1
  double budget = 0.0;       // 2 nonlinear_tol |Omega|
  bool contraction_violated = false;
  /// Largest (u_K - v_K)^+ where g <= h componentwise; 0 when the sources are not ordered.
  double order_violation = 0.0;
  bool sources_ordered = false;
  bool order_violated = false;
};

/// Solves for both sources and compares the L1 distances.
ContractionReport resolvent_contraction_probe(const StationaryProblem& first, std::span<const double> other_source,
                                              const SolverConfig& cfg);

/// n-fold composition of implicit steps of size T / n_steps (the
/// Crandall-Liggett exponential formula, discretized).
std::vector<double> crandall_liggett_march(const Model& model, const Mesh& mesh, std::span<const double> u0,
                                           int n_steps, double T, FluxKind flux, const SolverConfig& cfg);

/// Total flux Phi_sigma = F(u_K, u_L) - tau (phi(u_L) - phi(u_K)) on every inner interface.
std::vector<double> interface_total_flux(const Model& model, const Mesh& mesh, FluxKind flux,
                                         std::span<const double> u);

}  // namespace fvdeg
