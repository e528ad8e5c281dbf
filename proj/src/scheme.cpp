#include "fvdeg/scheme.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "fvdeg/errors.hpp"

namespace fvdeg {

Strategy parse_strategy(std::string_view name) {
  if (name == "newton" || name == "newton_semismooth") return Strategy::NewtonSemismooth;
  if (name == "picard") return Strategy::Picard;
  throw Error(ErrorKind::Parameter, "unknown solver strategy '" + std::string(name) + "'");
}

TimeMode parse_time_mode(std::string_view name) {
  if (name == "implicit") return TimeMode::Implicit;
  if (name == "explicit") return TimeMode::Explicit;
  throw Error(ErrorKind::Parameter, "unknown time mode '" + std::string(name) + "'");
}

const char* to_string(Strategy s) { return s == Strategy::Picard ? "picard" : "newton_semismooth"; }
const char* to_string(TimeMode m) { return m == TimeMode::Explicit ? "explicit" : "implicit"; }

void SolverConfig::check() const {
  if (!(nonlinear_tol > 0.0)) throw Error(ErrorKind::Parameter, "nonlinear_tol must be positive");
  if (max_iters < 1) throw Error(ErrorKind::Parameter, "max_iters must be at least 1");
  if (!(cfl_safety > 0.0 && cfl_safety < 1.0)) throw Error(ErrorKind::Parameter, "cfl_safety must lie in (0, 1)");
}

double total_mass(const Mesh& mesh, std::span<const double> u) {
  double sum = 0.0;
  const auto cells = mesh.cells();
  for (std::size_t k = 0; k < u.size(); ++k) sum += cells[k].measure * u[k];
  return sum;
}

namespace {

StepStats summarize(const Mesh& mesh, std::span<const double> u) {
  StepStats s;
  s.mass = total_mass(mesh, u);
  s.min_value = *std::min_element(u.begin(), u.end());
  s.max_value = *std::max_element(u.begin(), u.end());
  return s;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

std::vector<double> init_cell_averages(const Model& model, const Mesh& mesh) {
  constexpr int kSub = 32;
  std::vector<double> u(static_cast<std::size_t>(mesh.num_cells()));
  const auto& desc = mesh.description();
  for (int k = 0; k < mesh.num_cells(); ++k) {
    double sum = 0.0;
    if (mesh.dim() == 1) {
      const double a = desc.nodes[k], b = desc.nodes[k + 1];
      for (int i = 0; i < kSub; ++i) sum += model.u0.at(a + (b - a) * (i + 0.5) / kSub);
      sum /= kSub;
    } else {
      const double dx = desc.lx / desc.nx, dy = desc.ly / desc.ny;
      const auto c = mesh.cell(k).center;
      for (int j = 0; j < kSub; ++j)
        for (int i = 0; i < kSub; ++i)
          sum += model.u0.at(c[0] - 0.5 * dx + dx * (i + 0.5) / kSub, c[1] - 0.5 * dy + dy * (j + 0.5) / kSub);
      sum /= kSub * kSub;
    }
    if (!std::isfinite(sum)) throw Error(ErrorKind::InvalidData, "u0 is not finite in cell " + std::to_string(k));
    if (sum < 0.0 || sum > model.u_max) {
      if (sum < -1e-12 || sum > model.u_max + 1e-12)
        throw Error(ErrorKind::InvalidData, "cell average of u0 outside [0, u_max] in cell " + std::to_string(k));
      sum = std::clamp(sum, 0.0, model.u_max);
    }
    u[k] = sum;
  }
  return u;
}

constexpr int kDirectBudget = 60;
constexpr int kMaxStages = 1000;
constexpr int kStallWindow = 5;

struct ImplicitSolver::Impl {
  const Mesh& mesh;
  const Model& model;
  const NumericalFlux& flux;
  SolverConfig cfg;
  BalanceOperator op;
  Eigen::SparseMatrix<double> jac;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  std::vector<int> diag_slot, owner_row_nb, nb_row_owner, nb_slot;  // positions in jac.valuePtr()
  std::vector<double> picard_diag;  // per-cell bound on dR_K/du_K minus m(K)/dt
  std::vector<double> tau_sum;      // per-cell sum of transmissivities

  Impl(const Mesh& m, const Model& md, const NumericalFlux& f, SolverConfig c)
      : mesh(m), model(md), flux(f), cfg(c), op{m, md, f} {
    const int n = mesh.num_cells();
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < n; ++k) trip.emplace_back(k, k, 1.0);
    for (const auto& s : mesh.interfaces()) {
      trip.emplace_back(s.owner, s.neighbor, 1.0);
      trip.emplace_back(s.neighbor, s.owner, 1.0);
    }
    jac.resize(n, n);
    jac.setFromTriplets(trip.begin(), trip.end());
    jac.makeCompressed();
    auto slot = [&](int r, int c) {
      for (Eigen::Index p = jac.outerIndexPtr()[c]; p < jac.outerIndexPtr()[c + 1]; ++p)
        if (jac.innerIndexPtr()[p] == r) return static_cast<int>(p);
      return -1;
    };
    diag_slot.resize(n);
    for (int k = 0; k < n; ++k) diag_slot[k] = slot(k, k);
    for (const auto& s : mesh.interfaces()) {
      owner_row_nb.push_back(slot(s.owner, s.neighbor));
      nb_row_owner.push_back(slot(s.neighbor, s.owner));
    }
    picard_diag.assign(n, 0.0);
    tau_sum.assign(n, 0.0);
    for (const auto& s : mesh.interfaces()) {
      tau_sum[s.owner] += s.transmissivity;
      tau_sum[s.neighbor] += s.transmissivity;
    }
    for (const auto& s : mesh.interfaces()) {
      const double bound = flux.lipschitz() * std::abs(kernels::convective_scale(model, s)) +
                           model.lipschitz_phi * s.transmissivity;
      picard_diag[s.owner] += bound;
      picard_diag[s.neighbor] += bound;
    }
  }

  void residual(std::span<const double> u, std::span<const double> u_prev, double dt, std::span<double> out) const {
    kernels::residual(cfg.backend, op, u, u_prev, dt, out);
  }

  // Newton direction: J delta = -R. Returns false if the factorization fails.
  bool newton_direction(std::span<const double> u, double dt, std::span<const double> r, std::vector<double>& delta) {
    InterfaceFluxes fl;
    kernels::interface_fluxes(cfg.backend, op, u, fl, true);
    double* val = jac.valuePtr();
    std::fill(val, val + jac.nonZeros(), 0.0);
    const auto cells = mesh.cells();
    for (int k = 0; k < mesh.num_cells(); ++k) val[diag_slot[k]] = cells[k].measure / dt;
    const auto faces = mesh.interfaces();
    for (std::size_t i = 0; i < faces.size(); ++i) {
      const auto& s = faces[i];
      val[diag_slot[s.owner]] += fl.d_owner[i];
      val[owner_row_nb[i]] += fl.d_neighbor[i];
      val[nb_row_owner[i]] -= fl.d_owner[i];
      val[diag_slot[s.neighbor]] -= fl.d_neighbor[i];
    }
    if (!analyzed) {
      lu.analyzePattern(jac);
      analyzed = true;
    }
    lu.factorize(jac);
    if (lu.info() != Eigen::Success) return false;
    Eigen::Map<const Eigen::VectorXd> rhs(r.data(), static_cast<Eigen::Index>(r.size()));
    Eigen::VectorXd d = lu.solve(-rhs);
    if (lu.info() != Eigen::Success || !d.allFinite()) return false;
    delta.assign(d.data(), d.data() + d.size());
    return true;
  }

  void picard_sweep(std::vector<double>& u, std::span<const double> u_prev, double dt, std::vector<double>& r) const {
    const auto cells = mesh.cells();
    residual(u, u_prev, dt, r);
    for (std::size_t k = 0; k < u.size(); ++k) u[k] -= r[k] / (cells[k].measure / dt + picard_diag[k]);
  }

  // Cell update taken in w = a u + b phi(u), a = m/dt, b = sum of tau: a step
  // that carries a flat cell across a kink of phi lands where the diffusion
  // takes over instead of far beyond it.
  double bent_update(int k, double u, double du, double a) const {
    if (du == 0.0) return u;
    const double b = tau_sum[k];
    const double ceiling = model.flux_ceiling;
    auto g = [&](double x) { return a * x + b * model.phi(x); };
    // one-sided slope in the direction of the step
    const double probe = du > 0.0 ? u : std::nextafter(u, -std::numeric_limits<double>::infinity());
    const double w = g(u) + (a + b * model.dphi(probe)) * du;
    double lo = 0.0, hi = ceiling;
    if (w <= g(lo)) return lo;
    if (w >= g(hi)) return hi;
    double x = std::clamp(u + du, lo, hi);
    for (int i = 0; i < 100; ++i) {
      const double r = g(x) - w;
      if (r == 0.0) return x;
      if (r > 0.0) hi = x;
      else lo = x;
      if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) break;
      double next = x - r / (a + b * model.dphi(x));
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      x = next;
    }
    return x;
  }

  // One plain Newton step from a converged iterate: column sums of the
  // Jacobian are m(K)/dt, so it zeroes the summed residual and with it the
  // mass defect that bent or clamped updates leave behind.
  void finish(std::vector<double>& u, std::span<const double> u_prev, double dt, std::vector<double>& r, double& rn,
              std::vector<double>& delta) {
    if (!newton_direction(u, dt, r, delta)) return;
    std::vector<double> trial(u.size()), r_trial(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
      trial[k] = u[k] + delta[k];
      if (!(trial[k] >= 0.0 && trial[k] <= model.flux_ceiling)) return;
    }
    residual(trial, u_prev, dt, r_trial);
    const double t = max_abs(r_trial);
    if (!(t <= cfg.nonlinear_tol)) return;
    u.swap(trial);
    r.swap(r_trial);
    rn = t;
  }

  // Undamped semismooth Newton. Free boundaries of a degenerate phi move about
  // one cell per step here, where a line search would stall on them. Gives up
  // after a run of steps that fail to lower the residual, leaving u at the best
  // iterate seen.
  bool full_step_run(std::vector<double>& u, std::span<const double> u_prev, double dt, int budget, int& it,
                     double& rn) {
    const std::size_t n = u.size();
    const auto cells = mesh.cells();
    const bool bent = model.dphi.depends_on(Var::U);
    std::vector<double> r(n), delta, best(u);
    residual(u, u_prev, dt, r);
    rn = max_abs(r);
    double prev = rn, best_rn = rn;
    int rising = 0;
    auto give_up = [&] {
      u.swap(best);
      rn = best_rn;
      return false;
    };
    for (int local = 0; local < budget; ++local) {
      ++it;
      if (!newton_direction(u, dt, r, delta)) return give_up();
      for (std::size_t k = 0; k < n; ++k)
        u[k] = bent ? bent_update(static_cast<int>(k), u[k], delta[k], cells[k].measure / dt)
                    : std::clamp(u[k] + delta[k], 0.0, model.flux_ceiling);
      residual(u, u_prev, dt, r);
      rn = max_abs(r);
      if (!std::isfinite(rn)) return give_up();
      if (rn <= cfg.nonlinear_tol) {
        finish(u, u_prev, dt, r, rn, delta);
        return true;
      }
      if (rn < best_rn) {
        best = u;
        best_rn = rn;
      }
      rising = rn < prev ? 0 : rising + 1;
      if (rising >= kStallWindow) return give_up();
      prev = rn;
    }
    return give_up();
  }

  // Damped semismooth Newton from u; false when the iteration budget runs out.
  bool newton_run(std::vector<double>& u, std::span<const double> u_prev, double dt, int budget, int& it,
                  double& rn) {
    const std::size_t n = u.size();
    std::vector<double> r(n), trial(n), r_trial(n), delta;
    residual(u, u_prev, dt, r);
    rn = max_abs(r);
    bool last_full_newton = u.size() == u_prev.size() &&
                            std::equal(u.begin(), u.end(), u_prev.begin());  // u_prev carries no damping error
    bool finishing = false;
    const auto cells = mesh.cells();
    const bool bent = model.dphi.depends_on(Var::U);  // affine phi: the plain update
    for (int local = 0;; ++local) {
      if (rn <= cfg.nonlinear_tol && (last_full_newton || cfg.strategy == Strategy::Picard)) return true;
      if (local >= budget) return rn <= cfg.nonlinear_tol;
      ++it;
      if (cfg.strategy == Strategy::Picard) {
        picard_sweep(u, u_prev, dt, r);
        residual(u, u_prev, dt, r);
        rn = max_abs(r);
        continue;
      }
      if (rn <= cfg.nonlinear_tol) finishing = true;  // converged after a damped step: one full step

      bool accepted = false;
      double alpha = 1.0;
      if (newton_direction(u, dt, r, delta)) {
        const double r2 = norm2(r);
        for (int ls = 0; ls < 40; ++ls) {
          for (std::size_t k = 0; k < n; ++k)
            trial[k] = bent ? bent_update(static_cast<int>(k), u[k], alpha * delta[k], cells[k].measure / dt)
                            : u[k] + alpha * delta[k];
          residual(trial, u_prev, dt, r_trial);
          const double t2 = norm2(r_trial);
          if (std::isfinite(t2) && (t2 <= (1.0 - 1e-4 * alpha) * r2 || (finishing && max_abs(r_trial) <= cfg.nonlinear_tol))) {
            accepted = true;
            break;
          }
          if (finishing) break;
          alpha *= 0.5;
        }
        if (accepted) {
          u.swap(trial);
          r.swap(r_trial);
          rn = max_abs(r);
          last_full_newton = alpha == 1.0;
        }
      }
      if (finishing) {
        if (!accepted) return true;  // keep the converged damped iterate
        finishing = false;
        continue;
      }
      if (!accepted) {
        // stagnation: a few monotone relaxation sweeps, then Newton again
        for (int s = 0; s < 10; ++s) picard_sweep(u, u_prev, dt, r);
        residual(u, u_prev, dt, r);
        rn = max_abs(r);
        last_full_newton = false;
      }
    }
  }

  // Full steps first, then the damped iteration from wherever they got to.
  bool attempt(std::vector<double>& u, std::span<const double> u_prev, double dt, int budget, int& it, double& rn) {
    if (full_step_run(u, u_prev, dt, budget, it, rn)) return true;
    return newton_run(u, u_prev, dt, std::min(budget, kDirectBudget), it, rn);
  }

  std::vector<double> solve(std::span<const double> u_prev, double dt, StepStats* stats) {
    if (!(dt > 0.0)) throw Error(ErrorKind::Parameter, "time step must be positive");
    std::vector<double> u(u_prev.begin(), u_prev.end());
    int it = 0;
    double rn = 0.0;
    const bool newton = cfg.strategy != Strategy::Picard;
    bool ok = newton ? attempt(u, u_prev, dt, cfg.max_iters, it, rn) : newton_run(u, u_prev, dt, cfg.max_iters, it, rn);

    if (!ok && newton) {
      // continuation in the step size: u_prev at dt' -> 0, the target system at dt' = dt
      std::vector<double> base(u_prev.begin(), u_prev.end()), trial;
      double reached = 0.0;
      double inc = dt / 64.0;
      int stages = 0;
      while (reached < dt) {
        if (inc < dt * 1e-8 || ++stages > kMaxStages) break;
        const double target = std::min(dt, reached + inc);
        trial = base;
        const bool last = target >= dt;
        if (attempt(trial, u_prev, target, last ? cfg.max_iters : cfg.max_iters / 4, it, rn)) {
          base.swap(trial);
          reached = target;
          inc *= 2.0;
        } else {
          inc *= 0.25;
        }
      }
      ok = reached >= dt;
      u.swap(base);
      if (!ok) {
        std::vector<double> r(u.size());
        residual(u, u_prev, dt, r);
        rn = max_abs(r);
      }
    }
    if (!ok)
      throw ConvergenceError("nonlinear solver did not converge in " + std::to_string(it) +
                                 " iterations (residual " + std::to_string(rn) + ")",
                             rn);
    if (stats) {
      *stats = summarize(mesh, u);
      stats->iterations = it;
      stats->residual = rn;
    }
    return u;
  }
};

ImplicitSolver::ImplicitSolver(const Mesh& mesh, const Model& model, const NumericalFlux& flux, SolverConfig cfg)
    : impl_(std::make_unique<Impl>(mesh, model, flux, cfg)) {
  cfg.check();
}

ImplicitSolver::~ImplicitSolver() = default;

std::vector<double> ImplicitSolver::step(std::span<const double> u_prev, double dt, StepStats* stats) {
  return impl_->solve(u_prev, dt, stats);
}

std::vector<double> implicit_step(std::span<const double> u_prev, double dt, const Model& model, const Mesh& mesh,
                                  const NumericalFlux& flux, const SolverConfig& cfg, StepStats* stats) {
  ImplicitSolver solver(mesh, model, flux, cfg);
  return solver.step(u_prev, dt, stats);
}

double cfl_limit(const Model& model, const Mesh& mesh, const NumericalFlux& flux, const SolverConfig& cfg) {
  const double LF = flux.lipschitz() * std::hypot(model.direction[0], model.direction[1]);
  const double Lphi = model.lipschitz_phi;
  double limit = std::numeric_limits<double>::infinity();
  for (int k = 0; k < mesh.num_cells(); ++k) {
    double denom = 0.0;
    for (const auto& ci : mesh.cell_interfaces(k)) {
      const auto& s = mesh.interfaces()[ci.interface];
      denom += 2.0 * LF * s.measure + 2.0 * Lphi * s.transmissivity;
    }
    if (denom > 0.0) limit = std::min(limit, mesh.cell(k).measure / denom);
  }
  return cfg.cfl_safety * limit;
}

std::vector<double> explicit_step(std::span<const double> u_prev, double dt, const Model& model, const Mesh& mesh,
                                  const NumericalFlux& flux, const SolverConfig& cfg) {
  if (!(dt > 0.0)) throw Error(ErrorKind::Parameter, "time step must be positive");
  const double limit = cfl_limit(model, mesh, flux, cfg);
  if (dt > limit * (1.0 + 1e-12))
    throw Error(ErrorKind::Parameter,
                "time step " + std::to_string(dt) + " exceeds the CFL limit " + std::to_string(limit));
  const BalanceOperator op{mesh, model, flux};
  std::vector<double> div(u_prev.size());
  kernels::flux_divergence(cfg.backend, op, u_prev, div);
  std::vector<double> u(u_prev.begin(), u_prev.end());
  const auto cells = mesh.cells();
  for (std::size_t k = 0; k < u.size(); ++k) u[k] -= dt / cells[k].measure * div[k];
  return u;
}

DiamondGradient discrete_gradient(std::span<const double> cell_values, const Mesh& mesh) {
  if (static_cast<int>(cell_values.size()) != mesh.num_cells())
    throw Error(ErrorKind::InvalidData, "discrete_gradient: expected one value per cell");
  DiamondGradient g;
  const auto faces = mesh.interfaces();
  g.component.resize(faces.size());
  g.vector.resize(faces.size());
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const auto& s = faces[i];
    const double c = (cell_values[s.neighbor] - cell_values[s.owner]) / s.distance;
    g.component[i] = c;
    g.vector[i] = {c * s.normal[0], c * s.normal[1]};
  }
  return g;
}

int steps_to_horizon(double T, double dt) {
  if (T <= 0.0) return 0;
  return static_cast<int>(std::ceil(T / dt - 1e-9));
}

DiscreteSolution run_evolution_from(std::shared_ptr<const Model> model, std::shared_ptr<const Mesh> mesh,
                                    std::vector<double> u_init, double dt, FluxKind flux_kind,
                                    const SolverConfig& cfg, TimeMode mode) {
  cfg.check();
  if (!(dt > 0.0)) throw Error(ErrorKind::Parameter, "time step must be positive");
  if (static_cast<int>(u_init.size()) != mesh->num_cells())
    throw Error(ErrorKind::InvalidData, "initial vector size does not match the mesh");
  const NumericalFlux flux(flux_kind, *model);
  if (mode == TimeMode::Explicit) {
    const double limit = cfl_limit(*model, *mesh, flux, cfg);
    if (dt > limit * (1.0 + 1e-12))
      throw Error(ErrorKind::Parameter,
                  "time step " + std::to_string(dt) + " exceeds the CFL limit " + std::to_string(limit));
  }
  DiscreteSolution sol;
  sol.mesh = mesh;
  sol.model = model;
  sol.flux_kind = flux_kind;
  sol.mode = mode;
  sol.dt = dt;
  sol.T = model->T;
  const int N = steps_to_horizon(model->T, dt);
  sol.steps.reserve(static_cast<std::size_t>(N) + 1);
  sol.stats.reserve(static_cast<std::size_t>(N) + 1);
  sol.stats.push_back(summarize(*mesh, u_init));
  sol.steps.push_back(std::move(u_init));

  std::unique_ptr<ImplicitSolver> solver;
  if (mode == TimeMode::Implicit) solver = std::make_unique<ImplicitSolver>(*mesh, *model, flux, cfg);
  for (int n = 0; n < N; ++n) {
    try {
      StepStats st;
      std::vector<double> next;
      if (mode == TimeMode::Implicit) {
        next = solver->step(sol.steps.back(), dt, &st);
      } else {
        next = explicit_step(sol.steps.back(), dt, *model, *mesh, flux, cfg);
        st = summarize(*mesh, next);
      }
      sol.steps.push_back(std::move(next));
      sol.stats.push_back(st);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(std::string(e.what()) + " at step " + std::to_string(n + 1), e.last_residual(), n + 1);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(e.what()) + " at step " + std::to_string(n + 1));
    }
  }
  return sol;
}

DiscreteSolution run_evolution(std::shared_ptr<const Model> model, std::shared_ptr<const Mesh> mesh, double dt,
                               FluxKind flux, const SolverConfig& cfg, TimeMode mode) {
  auto u0 = init_cell_averages(*model, *mesh);
  return run_evolution_from(std::move(model), std::move(mesh), std::move(u0), dt, flux, cfg, mode);
}

DiscreteSolution run_evolution(const Model& model, const Mesh& mesh, double dt, FluxKind flux,
                               const SolverConfig& cfg, TimeMode mode) {
  return run_evolution(std::make_shared<const Model>(model), std::make_shared<const Mesh>(mesh), dt, flux, cfg,
                       mode);
}

int step_index_at(const DiscreteSolution& solution, double t) {
  if (!(t >= 0.0) || t > solution.T * (1.0 + 1e-12) + 1e-300)
    throw Error(ErrorKind::Domain, "time " + std::to_string(t) + " outside [0, T]");
  if (t == 0.0) return 0;
  const double q = t / solution.dt;
  int n = static_cast<int>(std::ceil(q - 1e-10 * std::max(1.0, q)));
  return std::clamp(n, 1, solution.num_steps());
}

double reconstruct(const DiscreteSolution& solution, double t, const Point& x) {
  const int n = step_index_at(solution, t);
  const int k = solution.mesh->locate(x);
  return solution.steps[n][k];
}

}  // namespace fvdeg
