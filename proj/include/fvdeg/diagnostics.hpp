#pragma once

#include <string>
#include <vector>

#include "fvdeg/scheme.hpp"

namespace fvdeg {

/// Nonnegative tensor-product bump xi(t, x) = theta(t) psi(x), with
/// theta(t) = b((t - tc) / tr), psi(x) = prod_i b((x_i - c_i) / r_i) and
/// b(s) = (1 - s^2)^3 on |s| < 1. Requires tc + tr <= T so that xi(T, .) = 0.
struct TestFunction {
  std::string id;
  double t_center = 0.0, t_radius = 1.0;
  Point x_center{}, x_radius{1.0, 1.0};
  int dim = 1;

  double value(double t, const Point& x) const;
  double dt(double t, const Point& x) const;
  Point grad(double t, const Point& x) const;
};

/// 12 spatial placements (some overlapping the boundary) times 4 temporal
/// placements (one touching t = 0, one ending at T).
std::vector<TestFunction> test_function_family(const Mesh& mesh, double T);

/// k values: `count` uniform points on [0, u_max] plus u_c and kinks of phi.
std::vector<double> entropy_k_grid(const Model& model, int count);

struct EntropyEntry {
  double k = 0.0;
  int xi = 0;
  double residual = 0.0;           // quadrature of the continuous entropy functional
  double discrete_residual = 0.0;  // pairing of the cell entropy inequalities with xi
};

struct EntropyReport {
  std::vector<EntropyEntry> entries;
  std::vector<std::string> xi_ids;
  double min_residual = 0.0;
  double min_discrete_residual = 0.0;
  int argmin = -1;           // entry index of min_residual
  int argmin_discrete = -1;  // entry index of min_discrete_residual
  double mesh_h = 0.0;
  double dt = 0.0;
};

/// R(k, xi) = int int { |u - k| xi_t + sign(u - k) [f(u) - f(k) - grad_O phi(u)] . grad xi }
///          + int int_{boundary} |f(k) . eta| xi + int |u0 - k| xi(0, .)
/// by midpoint quadrature per cell / diamond half / face and step; sign(0) = 0.
double entropy_residual(const DiscreteSolution& solution, double k, const TestFunction& xi);

/// Sum over steps and cells of xi(t_n, x_K) times the defect of the discrete
/// cell entropy inequality, rearranged by summation by parts into the same
/// shape as R(k, xi). Nonnegative up to solver residuals for monotone fluxes
/// (implicit scheme, or explicit under CFL), and exactly zero at k = 0 and
/// k = u_max when f(0) = f(u_max) = 0.
double discrete_entropy_residual(const DiscreteSolution& solution, double k, const TestFunction& xi);

struct CellEntropyDefect {
  double max_defect = 0.0;  // largest left-hand side minus right-hand side; <= 0 when all hold
  int step = -1;            // n + 1 of the offending update
  int cell = -1;
  double k = 0.0;
};

/// Checks the cell entropy inequalities of the scheme,
///   m(K) (|u^{n+1}_K - k| - |u^n_K - k|) / dt
///     + sum_sigma [G_sigma(k) - tau (|phi(u_L) - phi(k)| - |phi(u_K) - phi(k)|)] <= sum_{faces of K} m |f(k) d.eta|,
/// with G_sigma(k) = F(u_K v k, u_L v k) - F(u_K ^ k, u_L ^ k), for every step, cell and k in `ks`,
/// and locates the worst one.
CellEntropyDefect cell_entropy_defect(const DiscreteSolution& solution, const std::vector<double>& ks);

/// Evaluates both residuals on entropy_k_grid(k_grid) x the first `xi_count`
/// members of the test-function family. Parallel over k.
EntropyReport entropy_sweep(const DiscreteSolution& solution, int k_grid = 21, int xi_count = 48);

/// sum m(K) u^n_K - sum m(K) u^0_K for every n.
std::vector<double> mass_drift(const DiscreteSolution& solution);

/// Q = sum_n dt sum_sigma |F(u_K, u_L) - f(u_K)| + |F(u_K, u_L) - f(u_L)| (weighted by m(sigma)).
double weak_bv_functional(const DiscreteSolution& solution);

/// E = sum_n dt sum_sigma tau_sigma (phi(u_L) - phi(u_K))^2.
double discrete_l2h1_functional(const DiscreteSolution& solution);

enum class Comparison { Injection, Restriction };

/// ||u_coarse - u_fine||_{L^p(Q)}. Injection evaluates the coarse field on the
/// fine space-time grid; restriction averages the fine field onto the coarse one.
double cauchy_difference(const DiscreteSolution& coarse, const DiscreteSolution& fine, double p,
                         Comparison comparison = Comparison::Injection);
double lp_norm(const DiscreteSolution& solution, double p);

struct LadderLevel {
  std::shared_ptr<const Mesh> mesh;
  double dt = 0.0;
};

struct ConvergenceRow {
  int cells = 0;
  double h = 0.0;
  double dt = 0.0;
  double difference = 0.0;  // e_j = ||u_j - u_{j+1}||; NaN on the finest level
  double ratio = 0.0;       // e_{j-1} / e_j; NaN where undefined
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::vector<DiscreteSolution> solutions;
  bool strictly_decreasing() const;
};

/// Runs every level (concurrently) and tabulates consecutive Cauchy differences.
/// Levels must be nested in space and in time (integer dt ratios).
ConvergenceTable refinement_study(std::shared_ptr<const Model> model, FluxKind flux,
                                  const std::vector<LadderLevel>& levels, double p, const SolverConfig& cfg,
                                  TimeMode mode = TimeMode::Implicit, Comparison comparison = Comparison::Injection);

/// Levels for 1D uniform meshes of (a, b): n, 2n, 4n, ... cells with dt = dt0 / 2^j
/// (dt_exponent = 1, hyperbolic scaling) or dt0 / 4^j (dt_exponent = 2).
std::vector<LadderLevel> interval_ladder(double a, double b, int n0, int levels, double dt0, int dt_exponent = 1);

/// ||u_coarse - u_fine||_{L1(Q)} / ||u_fine||_{L1(Q)}.
double oscillation_proxy(const DiscreteSolution& coarse, const DiscreteSolution& fine);

struct BoundaryLayerRow {
  double h = 0.0;
  double boundary_cell_max = 0.0;   // max over steps of cells touching the boundary
  double interior_l1 = 0.0;         // ||u||_{L1((0,T) x subdomain)}
  double interior_max = 0.0;
  double interior_difference = 0.0; // to the next finer level over the subdomain; NaN on the finest
};

struct BoundaryLayerReport {
  std::vector<BoundaryLayerRow> rows;
  bool boundary_max_increasing() const;
  bool interior_cauchy_decreasing() const;
};

/// Ladder of 1D solutions ordered coarse to fine.
BoundaryLayerReport boundary_layer_probe(const std::vector<DiscreteSolution>& ladder, double sub_a = 0.1,
                                         double sub_b = 0.8);

}  // namespace fvdeg
