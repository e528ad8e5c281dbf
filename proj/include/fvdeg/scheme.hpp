#pragma once

#include <memory>
#include <span>
#include <vector>

#include "fvdeg/kernels.hpp"
#include "fvdeg/mesh.hpp"
#include "fvdeg/model.hpp"
#include "fvdeg/numflux.hpp"

namespace fvdeg {

enum class Strategy { NewtonSemismooth, Picard };
enum class TimeMode { Implicit, Explicit };

Strategy parse_strategy(std::string_view name);  // "newton" | "picard"
TimeMode parse_time_mode(std::string_view name);  // "implicit" | "explicit"
const char* to_string(Strategy s);
const char* to_string(TimeMode m);

struct SolverConfig {
  double nonlinear_tol = 1e-10;  // max-norm of the cell-balance residual
  int max_iters = 200;
  Strategy strategy = Strategy::NewtonSemismooth;
  double cfl_safety = 0.5;
  Backend backend = Backend::OpenMP;

  void check() const;
};

struct StepStats {
  int iterations = 0;
  double residual = 0.0;
  double mass = 0.0;
  double min_value = 0.0;
  double max_value = 0.0;
};

/// Cell values u^n for n = 0..N on a fixed mesh with constant step dt.
/// The space-time reconstruction is u(t, x) = u_K^{n+1} for x in K and
/// t in (n dt, (n+1) dt]; t = 0 maps to u^0.
struct DiscreteSolution {
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const Model> model;
  FluxKind flux_kind = FluxKind::Godunov;
  TimeMode mode = TimeMode::Implicit;
  double dt = 0.0;
  double T = 0.0;
  std::vector<std::vector<double>> steps;
  std::vector<StepStats> stats;  // stats[n] describes steps[n]

  int num_steps() const { return static_cast<int>(steps.size()) - 1; }
  double time(int n) const { return n * dt; }
};

/// Cell averages of u0 by composite midpoint quadrature, 32 subsamples per
/// cell and direction.
std::vector<double> init_cell_averages(const Model& model, const Mesh& mesh);

/// Solves the implicit balance
///   m(K) (u_K - u_prev_K) / dt + sum_sigma Phi_sigma(u) = 0
/// by semismooth Newton. Undamped steps come first; when phi is not affine a
/// cell's update is taken in w = m(K)/dt u + (sum tau) phi(u) so that steps
/// across a kink of phi stay short. If those stall, backtracking Newton with
/// damped Picard sweeps on stagnation takes over from the best iterate. If
/// neither settles, the step is
/// reached through a sequence of growing substeps dt' -> dt, each one started
/// from the previous solution (max_iters then bounds each substep). Reuses its
/// sparsity analysis across calls.
class ImplicitSolver {
 public:
  ImplicitSolver(const Mesh& mesh, const Model& model, const NumericalFlux& flux, SolverConfig cfg);
  ~ImplicitSolver();
  ImplicitSolver(const ImplicitSolver&) = delete;
  ImplicitSolver& operator=(const ImplicitSolver&) = delete;

  std::vector<double> step(std::span<const double> u_prev, double dt, StepStats* stats = nullptr);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::vector<double> implicit_step(std::span<const double> u_prev, double dt, const Model& model, const Mesh& mesh,
                                  const NumericalFlux& flux, const SolverConfig& cfg, StepStats* stats = nullptr);

/// Forward Euler analogue; rejects dt above `cfl_limit`.
std::vector<double> explicit_step(std::span<const double> u_prev, double dt, const Model& model, const Mesh& mesh,
                                  const NumericalFlux& flux, const SolverConfig& cfg);

/// zeta * min_K m(K) / sum_{sigma in E_K} (2 L_F m(sigma) + 2 L_phi tau_sigma).
double cfl_limit(const Model& model, const Mesh& mesh, const NumericalFlux& flux, const SolverConfig& cfg);

/// Discrete gradient of a cell field, constant on the diamond of each inner
/// interface and directed along the K -> L normal.
struct DiamondGradient {
  std::vector<double> component;  // (phi_L - phi_K) / d_KL per interface
  std::vector<Point> vector;       // component * normal
};
DiamondGradient discrete_gradient(std::span<const double> cell_values, const Mesh& mesh);

/// Measure of the diamond of an interface: m(sigma) d_KL / dim.
inline double diamond_measure(const Mesh& mesh, const Interface& s) {
  return s.measure * s.distance / mesh.dim();
}

int steps_to_horizon(double T, double dt);

DiscreteSolution run_evolution(std::shared_ptr<const Model> model, std::shared_ptr<const Mesh> mesh, double dt,
                               FluxKind flux, const SolverConfig& cfg, TimeMode mode);
DiscreteSolution run_evolution(const Model& model, const Mesh& mesh, double dt, FluxKind flux,
                               const SolverConfig& cfg, TimeMode mode);
/// Same, starting from the given cell values instead of averages of u0.
DiscreteSolution run_evolution_from(std::shared_ptr<const Model> model, std::shared_ptr<const Mesh> mesh,
                                    std::vector<double> u_init, double dt, FluxKind flux, const SolverConfig& cfg,
                                    TimeMode mode);

/// Value of the piecewise-constant reconstruction at (t, x).
double reconstruct(const DiscreteSolution& solution, double t, const Point& x);
/// Index n such that the reconstruction at time t uses steps[n].
int step_index_at(const DiscreteSolution& solution, double t);

double total_mass(const Mesh& mesh, std::span<const double> u);

}  // namespace fvdeg
