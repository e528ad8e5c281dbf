#include "fvdeg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>

#include "fvdeg/errors.hpp"

namespace fvdeg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double bump(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return q * q * q;
}

double bump_d(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return -6.0 * s * q * q;
}

double sgn(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

double theta(const TestFunction& xi, double t) { return bump((t - xi.t_center) / xi.t_radius); }
double theta_d(const TestFunction& xi, double t) { return bump_d((t - xi.t_center) / xi.t_radius) / xi.t_radius; }

double psi(const TestFunction& xi, const Point& x) {
  double v = 1.0;
  for (int i = 0; i < xi.dim; ++i) v *= bump((x[i] - xi.x_center[i]) / xi.x_radius[i]);
  return v;
}

Point psi_grad(const TestFunction& xi, const Point& x) {
  Point g{0.0, 0.0};
  for (int i = 0; i < xi.dim; ++i) {
    double v = bump_d((x[i] - xi.x_center[i]) / xi.x_radius[i]) / xi.x_radius[i];
    for (int j = 0; j < xi.dim; ++j)
      if (j != i) v *= bump((x[j] - xi.x_center[j]) / xi.x_radius[j]);
    g[i] = v;
  }
  return g;
}

double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1]; }

// Per-solution data shared by every (k, xi) pair.
struct Prepared {
  const DiscreteSolution& sol;
  const Mesh& mesh;
  const Model& model;
  NumericalFlux flux;
  int N;
  std::vector<double> t_lo, t_hi;  // step intervals clipped to (0, T]
  std::vector<std::vector<double>> fu, phiu, grad;
  std::vector<double> scale;

  explicit Prepared(const DiscreteSolution& s)
      : sol(s), mesh(*s.mesh), model(*s.model), flux(s.flux_kind, *s.model), N(s.num_steps()) {
    if (N < 0 || !s.mesh || !s.model) throw Error(ErrorKind::InvalidData, "empty solution");
    for (int n = 0; n < N; ++n) {
      t_lo.push_back(std::min(n * s.dt, s.T));
      t_hi.push_back(std::min((n + 1) * s.dt, s.T));
    }
    const auto faces = mesh.interfaces();
    fu.resize(static_cast<std::size_t>(N) + 1);
    phiu.resize(fu.size());
    grad.resize(fu.size());
    for (int n = 0; n <= N; ++n) {
      const auto& u = s.steps[n];
      if (static_cast<int>(u.size()) != mesh.num_cells())
        throw Error(ErrorKind::InvalidData, "step " + std::to_string(n) + " has the wrong number of cells");
      fu[n].resize(u.size());
      phiu[n].resize(u.size());
      for (std::size_t k = 0; k < u.size(); ++k) {
        fu[n][k] = model.f(u[k]);
        phiu[n][k] = model.phi(u[k]);
      }
      grad[n] = discrete_gradient(phiu[n], mesh).component;
    }
    for (const auto& f : faces) scale.push_back(kernels::convective_scale(model, f));
  }

  int flux_level(int n) const { return sol.mode == TimeMode::Implicit ? n + 1 : n; }

  // G_sigma = F_sigma(u_K v k, u_L v k) - F_sigma(u_K ^ k, u_L ^ k) per step and interface
  std::vector<double> entropy_fluxes(double k) const {
    const auto faces = mesh.interfaces();
    const std::size_t nf = faces.size();
    std::vector<double> G(static_cast<std::size_t>(N) * nf);
    for (int n = 0; n < N; ++n) {
      const auto& u = sol.steps[flux_level(n)];
      for (std::size_t i = 0; i < nf; ++i) {
        const double a = u[faces[i].owner], b = u[faces[i].neighbor];
        G[n * nf + i] = directional_flux(flux, scale[i], std::max(a, k), std::max(b, k)).value -
                        directional_flux(flux, scale[i], std::min(a, k), std::min(b, k)).value;
      }
    }
    return G;
  }
};

struct SpatialSamples {
  std::vector<double> psi_cell, dpsi_cell;  // psi and d . grad psi at centers
  std::vector<double> half_owner, half_nb;  // grad psi . n at half-diamond centroids
  std::vector<double> psi_face, psi_face_cell;
};

SpatialSamples sample_space(const Prepared& p, const TestFunction& xi) {
  SpatialSamples s;
  const auto cells = p.mesh.cells();
  for (const auto& c : cells) {
    s.psi_cell.push_back(psi(xi, c.center));
    s.dpsi_cell.push_back(dot(p.model.direction, psi_grad(xi, c.center)));
  }
  const double alpha = p.mesh.dim() == 1 ? 0.5 : 2.0 / 3.0;
  for (const auto& f : p.mesh.interfaces()) {
    auto centroid = [&](const Point& xk) {
      return Point{xk[0] + alpha * (f.center[0] - xk[0]), xk[1] + alpha * (f.center[1] - xk[1])};
    };
    s.half_owner.push_back(dot(psi_grad(xi, centroid(cells[f.owner].center)), f.normal));
    s.half_nb.push_back(dot(psi_grad(xi, centroid(cells[f.neighbor].center)), f.normal));
  }
  for (const auto& b : p.mesh.boundary_faces()) {
    s.psi_face.push_back(psi(xi, b.center));
    s.psi_face_cell.push_back(s.psi_cell[b.cell]);
  }
  return s;
}

struct StepSums {
  std::vector<double> storage;     // sum m |u^{n+1} - k| psi_K
  std::vector<double> continuous;  // flux, diffusion and boundary terms of R per unit time
  std::vector<double> discrete;    // interface and boundary terms of R_h per unit time
  double initial = 0.0;
};

StepSums step_sums(const Prepared& p, double k, const std::vector<double>& G, const SpatialSamples& s) {
  const auto cells = p.mesh.cells();
  const auto faces = p.mesh.interfaces();
  const auto bfaces = p.mesh.boundary_faces();
  const std::size_t nc = cells.size(), nf = faces.size();
  const double fk = p.model.f(k), phik = p.model.phi(k);
  double boundary = 0.0, boundary_cell = 0.0;
  for (std::size_t b = 0; b < bfaces.size(); ++b) {
    const double w = bfaces[b].measure * std::abs(fk * dot(p.model.direction, bfaces[b].normal));
    boundary += w * s.psi_face[b];
    boundary_cell += w * s.psi_face_cell[b];
  }
  StepSums r;
  r.storage.assign(static_cast<std::size_t>(p.N), 0.0);
  r.continuous.assign(r.storage.size(), 0.0);
  r.discrete.assign(r.storage.size(), 0.0);
  const auto& u0 = p.sol.steps[0];
  for (std::size_t K = 0; K < nc; ++K) r.initial += cells[K].measure * std::abs(u0[K] - k) * s.psi_cell[K];

  for (int n = 0; n < p.N; ++n) {
    const auto& u = p.sol.steps[n + 1];
    const auto& fu = p.fu[n + 1];
    const auto& g = p.grad[n + 1];
    double st = 0.0, cont = boundary;
    for (std::size_t K = 0; K < nc; ++K) {
      const double m = cells[K].measure;
      st += m * std::abs(u[K] - k) * s.psi_cell[K];
      cont += m * sgn(u[K] - k) * (fu[K] - fk) * s.dpsi_cell[K];
    }
    for (std::size_t i = 0; i < nf; ++i) {
      const auto& f = faces[i];
      const double half = 0.5 * f.measure * f.distance;
      cont -= half * g[i] * (sgn(u[f.owner] - k) * s.half_owner[i] + sgn(u[f.neighbor] - k) * s.half_nb[i]);
    }
    r.storage[n] = st;
    r.continuous[n] = cont;

    if (!G.empty()) {
      const int lv = p.flux_level(n);
      const auto& ph = p.phiu[lv];
      double disc = boundary_cell;
      for (std::size_t i = 0; i < nf; ++i) {
        const auto& f = faces[i];
        const double dpsi = s.psi_cell[f.neighbor] - s.psi_cell[f.owner];
        const double diff = f.transmissivity * (std::abs(ph[f.neighbor] - phik) - std::abs(ph[f.owner] - phik));
        disc += (G[n * nf + i] - diff) * dpsi;
      }
      r.discrete[n] = disc;
    }
  }
  return r;
}

double combine_continuous(const Prepared& p, const StepSums& s, const TestFunction& xi) {
  double R = theta(xi, 0.0) * s.initial;
  for (int n = 0; n < p.N; ++n) {
    const double len = p.t_hi[n] - p.t_lo[n];
    if (len <= 0.0) continue;
    const double mid = 0.5 * (p.t_lo[n] + p.t_hi[n]);
    R += len * (theta_d(xi, mid) * s.storage[n] + theta(xi, mid) * s.continuous[n]);
  }
  return R;
}

double combine_discrete(const Prepared& p, const StepSums& s, const TestFunction& xi) {
  const double dt = p.sol.dt;
  double R = theta(xi, 0.0) * s.initial;
  for (int n = 0; n < p.N; ++n) {
    const double th0 = theta(xi, n * dt), th1 = theta(xi, (n + 1) * dt);
    R += s.storage[n] * (th1 - th0) + dt * th0 * s.discrete[n];
  }
  return R;
}

void check_k(const Model& model, double k) {
  if (!(k >= 0.0 && k <= model.u_max))
    throw Error(ErrorKind::Domain, "entropy level k=" + std::to_string(k) + " outside [0, u_max]");
}

std::vector<double> phi_kinks(const Model& model) {
  constexpr int kSamples = 4096;
  std::vector<double> d(kSamples + 1), out;
  const double hi = model.u_max;
  for (int i = 0; i <= kSamples; ++i) d[i] = model.dphi(hi * i / kSamples);
  for (int i = 1; i + 2 <= kSamples; ++i) {
    const double jump = std::abs(d[i + 1] - d[i]);
    const double around = std::max(std::abs(d[i] - d[i - 1]), std::abs(d[i + 2] - d[i + 1]));
    if (jump <= 10.0 * around + 1e-9) continue;
    double lo = hi * i / kSamples, up = hi * (i + 1) / kSamples;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + up);
      const double v = model.dphi(mid);
      if (std::abs(v - d[i]) <= std::abs(v - d[i + 1])) lo = mid;
      else up = mid;
    }
    out.push_back(up);
  }
  return out;
}

// Fine-grid comparison shared by the Cauchy differences and the layer probe.
double lp_difference(const DiscreteSolution& coarse, const DiscreteSolution& fine, double p, Comparison cmp,
                     const std::function<bool(const Point&)>& in_region) {
  if (!(p >= 1.0)) throw Error(ErrorKind::Parameter, "L^p exponent must be >= 1");
  const auto map = injection_map(*coarse.mesh, *fine.mesh);
  const double q = coarse.dt / fine.dt;
  const int r = static_cast<int>(std::lround(q));
  if (r < 1 || std::abs(q - r) > 1e-9 * q)
    throw Error(ErrorKind::Parameter, "time steps are not nested (coarse dt must be an integer multiple of fine dt)");
  if (std::abs(coarse.T - fine.T) > 1e-12 * std::max(1.0, coarse.T))
    throw Error(ErrorKind::Parameter, "solutions have different horizons");
  const double T = fine.T;
  const auto fcells = fine.mesh->cells();
  const auto ccells = coarse.mesh->cells();
  double sum = 0.0;
  if (cmp == Comparison::Injection) {
    for (int n = 1; n <= fine.num_steps(); ++n) {
      const double len = std::min(n * fine.dt, T) - std::min((n - 1) * fine.dt, T);
      if (len <= 0.0) continue;
      const int nc = std::min((n + r - 1) / r, coarse.num_steps());
      const auto& uf = fine.steps[n];
      const auto& uc = coarse.steps[nc];
      double s = 0.0;
      for (std::size_t K = 0; K < uf.size(); ++K)
        if (!in_region || in_region(fcells[K].center))
          s += fcells[K].measure * std::pow(std::abs(uf[K] - uc[map[K]]), p);
      sum += len * s;
    }
  } else {
    const std::size_t ncc = ccells.size();
    std::vector<double> avg(ncc), weight(ncc);
    for (int nc = 1; nc <= coarse.num_steps(); ++nc) {
      std::fill(avg.begin(), avg.end(), 0.0);
      std::fill(weight.begin(), weight.end(), 0.0);
      for (int n = (nc - 1) * r + 1; n <= std::min(nc * r, fine.num_steps()); ++n) {
        const double len = std::min(n * fine.dt, T) - std::min((n - 1) * fine.dt, T);
        if (len <= 0.0) continue;
        for (std::size_t K = 0; K < fcells.size(); ++K) {
          avg[map[K]] += len * fcells[K].measure * fine.steps[n][K];
          weight[map[K]] += len * fcells[K].measure;
        }
      }
      const double len = std::min(nc * coarse.dt, T) - std::min((nc - 1) * coarse.dt, T);
      if (len <= 0.0) continue;
      for (std::size_t c = 0; c < ncc; ++c) {
        if (weight[c] <= 0.0 || (in_region && !in_region(ccells[c].center))) continue;
        sum += len * ccells[c].measure * std::pow(std::abs(avg[c] / weight[c] - coarse.steps[nc][c]), p);
      }
    }
  }
  return std::pow(sum, 1.0 / p);
}

}  // namespace

double TestFunction::value(double t, const Point& x) const {
  const TestFunction& self = *this;
  return theta(self, t) * psi(self, x);
}

double TestFunction::dt(double t, const Point& x) const { return theta_d(*this, t) * psi(*this, x); }

Point TestFunction::grad(double t, const Point& x) const {
  const double th = theta(*this, t);
  const Point g = psi_grad(*this, x);
  return {th * g[0], th * g[1]};
}

std::vector<TestFunction> test_function_family(const Mesh& mesh, double T) {
  if (!(T > 0.0)) throw Error(ErrorKind::Parameter, "horizon must be positive");
  // (center, radius) as fractions of the domain extent; the last six overlap the boundary
  static constexpr double kSpace[12][2] = {{0.25, 0.1}, {0.45, 0.15}, {0.5, 0.35},  {0.65, 0.1},
                                           {0.8, 0.12}, {0.35, 0.25}, {0.0, 0.15},  {0.05, 0.3},
                                           {1.0, 0.15}, {0.95, 0.3},  {0.5, 0.6},   {0.5, 1.0}};
  static constexpr double kTime[4][2] = {{0.0, 0.5}, {0.25, 0.25}, {0.5, 0.45}, {0.75, 0.25}};
  const Point lo = mesh.lower(), hi = mesh.upper();
  std::vector<TestFunction> out;
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 4; ++j) {
      TestFunction xi;
      xi.id = "s" + std::to_string(i) + "t" + std::to_string(j);
      xi.dim = mesh.dim();
      xi.t_center = kTime[j][0] * T;
      xi.t_radius = kTime[j][1] * T;
      const int iy = (7 * i) % 12;
      xi.x_center = {lo[0] + kSpace[i][0] * (hi[0] - lo[0]), lo[1] + kSpace[iy][0] * (hi[1] - lo[1])};
      xi.x_radius = {kSpace[i][1] * (hi[0] - lo[0]), mesh.dim() == 2 ? kSpace[iy][1] * (hi[1] - lo[1]) : 1.0};
      out.push_back(xi);
    }
  return out;
}

std::vector<double> entropy_k_grid(const Model& model, int count) {
  if (count < 2) throw Error(ErrorKind::Parameter, "k grid needs at least 2 points");
  std::vector<double> ks;
  for (int i = 0; i < count; ++i) ks.push_back(model.u_max * i / (count - 1));
  ks.back() = model.u_max;
  std::vector<double> extra = phi_kinks(model);
  extra.push_back(model.u_c);
  for (double e : extra) {
    if (!(e >= 0.0 && e <= model.u_max)) continue;
    if (std::none_of(ks.begin(), ks.end(), [&](double k) { return std::abs(k - e) <= 1e-9; })) ks.push_back(e);
  }
  std::sort(ks.begin(), ks.end());
  return ks;
}

double entropy_residual(const DiscreteSolution& solution, double k, const TestFunction& xi) {
  check_k(*solution.model, k);
  const Prepared p(solution);
  const auto s = step_sums(p, k, {}, sample_space(p, xi));
  return combine_continuous(p, s, xi);
}

double discrete_entropy_residual(const DiscreteSolution& solution, double k, const TestFunction& xi) {
  check_k(*solution.model, k);
  const Prepared p(solution);
  const auto s = step_sums(p, k, p.entropy_fluxes(k), sample_space(p, xi));
  return combine_discrete(p, s, xi);
}

EntropyReport entropy_sweep(const DiscreteSolution& solution, int k_grid, int xi_count) {
  const Prepared p(solution);
  const auto ks = entropy_k_grid(p.model, k_grid);
  auto family = test_function_family(p.mesh, solution.T);
  if (xi_count < 1) throw Error(ErrorKind::Parameter, "at least one test function is required");
  if (xi_count < static_cast<int>(family.size())) family.resize(static_cast<std::size_t>(xi_count));

  // the family shares spatial factors: sample each distinct box once
  std::vector<int> space_of(family.size());
  std::vector<SpatialSamples> spaces;
  std::vector<const TestFunction*> reps;
  for (std::size_t j = 0; j < family.size(); ++j) {
    int found = -1;
    for (std::size_t r = 0; r < reps.size(); ++r)
      if (reps[r]->x_center == family[j].x_center && reps[r]->x_radius == family[j].x_radius)
        found = static_cast<int>(r);
    if (found < 0) {
      found = static_cast<int>(reps.size());
      reps.push_back(&family[j]);
      spaces.push_back(sample_space(p, family[j]));
    }
    space_of[j] = found;
  }

  EntropyReport rep;
  rep.mesh_h = p.mesh.h();
  rep.dt = solution.dt;
  for (const auto& xi : family) rep.xi_ids.push_back(xi.id);
  const std::size_t nx = family.size();
  rep.entries.resize(ks.size() * nx);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int ik = 0; ik < static_cast<int>(ks.size()); ++ik) {
    try {
      const double k = ks[ik];
      const auto G = p.entropy_fluxes(k);
      std::vector<StepSums> sums;
      for (const auto& sp : spaces) sums.push_back(step_sums(p, k, G, sp));
      for (std::size_t j = 0; j < nx; ++j) {
        auto& e = rep.entries[ik * nx + j];
        e.k = k;
        e.xi = static_cast<int>(j);
        e.residual = combine_continuous(p, sums[space_of[j]], family[j]);
        e.discrete_residual = combine_discrete(p, sums[space_of[j]], family[j]);
      }
    } catch (...) {
#pragma omp critical(fvdeg_sweep_error)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  rep.min_residual = rep.min_discrete_residual = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rep.entries.size(); ++i) {
    if (rep.entries[i].residual < rep.min_residual) {
      rep.min_residual = rep.entries[i].residual;
      rep.argmin = static_cast<int>(i);
    }
    if (rep.entries[i].discrete_residual < rep.min_discrete_residual) {
      rep.min_discrete_residual = rep.entries[i].discrete_residual;
      rep.argmin_discrete = static_cast<int>(i);
    }
  }
  return rep;
}

CellEntropyDefect cell_entropy_defect(const DiscreteSolution& solution, const std::vector<double>& ks) {
  const Prepared p(solution);
  const auto cells = p.mesh.cells();
  const auto faces = p.mesh.interfaces();
  const std::size_t nc = cells.size(), nf = faces.size();
  std::vector<CellEntropyDefect> worst(ks.size());
  for (double k : ks) check_k(p.model, k);
#pragma omp parallel for schedule(dynamic)
  for (int ik = 0; ik < static_cast<int>(ks.size()); ++ik) {
    const double k = ks[ik];
    const double fk = p.model.f(k), phik = p.model.phi(k);
    const auto G = p.entropy_fluxes(k);
    std::vector<double> bound(nc, 0.0), lhs(nc);
    for (const auto& b : p.mesh.boundary_faces())
      bound[b.cell] += b.measure * std::abs(fk * dot(p.model.direction, b.normal));
    auto& w = worst[ik];
    w.max_defect = -std::numeric_limits<double>::infinity();
    w.k = k;
    for (int n = 0; n < p.N; ++n) {
      const auto& u0 = solution.steps[n];
      const auto& u1 = solution.steps[n + 1];
      const auto& ph = p.phiu[p.flux_level(n)];
      for (std::size_t K = 0; K < nc; ++K)
        lhs[K] = cells[K].measure * (std::abs(u1[K] - k) - std::abs(u0[K] - k)) / solution.dt - bound[K];
      for (std::size_t i = 0; i < nf; ++i) {
        const auto& f = faces[i];
        const double phi_flux = G[n * nf + i] -
                                f.transmissivity * (std::abs(ph[f.neighbor] - phik) - std::abs(ph[f.owner] - phik));
        lhs[f.owner] += phi_flux;
        lhs[f.neighbor] -= phi_flux;
      }
      for (std::size_t K = 0; K < nc; ++K)
        if (lhs[K] > w.max_defect) {
          w.max_defect = lhs[K];
          w.step = n + 1;
          w.cell = static_cast<int>(K);
        }
    }
  }
  CellEntropyDefect out;
  out.max_defect = -std::numeric_limits<double>::infinity();
  for (const auto& w : worst)
    if (w.max_defect > out.max_defect) out = w;
  return out;
}

std::vector<double> mass_drift(const DiscreteSolution& solution) {
  std::vector<double> out;
  const double m0 = total_mass(*solution.mesh, solution.steps.at(0));
  for (const auto& u : solution.steps) out.push_back(total_mass(*solution.mesh, u) - m0);
  return out;
}

double weak_bv_functional(const DiscreteSolution& solution) {
  const Prepared p(solution);
  const auto faces = p.mesh.interfaces();
  double Q = 0.0;
  for (int n = 0; n < p.N; ++n) {
    const double len = p.t_hi[n] - p.t_lo[n];
    const auto& u = solution.steps[n + 1];
    const auto& fu = p.fu[n + 1];
    double s = 0.0;
    for (std::size_t i = 0; i < faces.size(); ++i) {
      const auto& f = faces[i];
      const double F = directional_flux(p.flux, p.scale[i], u[f.owner], u[f.neighbor]).value;
      s += std::abs(F - p.scale[i] * fu[f.owner]) + std::abs(F - p.scale[i] * fu[f.neighbor]);
    }
    Q += len * s;
  }
  return Q;
}

double discrete_l2h1_functional(const DiscreteSolution& solution) {
  const Prepared p(solution);
  const auto faces = p.mesh.interfaces();
  double E = 0.0;
  for (int n = 0; n < p.N; ++n) {
    const double len = p.t_hi[n] - p.t_lo[n];
    const auto& ph = p.phiu[n + 1];
    double s = 0.0;
    for (const auto& f : faces) {
      const double d = ph[f.neighbor] - ph[f.owner];
      s += f.transmissivity * d * d;
    }
    E += len * s;
  }
  return E;
}

double cauchy_difference(const DiscreteSolution& coarse, const DiscreteSolution& fine, double p,
                         Comparison comparison) {
  return lp_difference(coarse, fine, p, comparison, {});
}

double lp_norm(const DiscreteSolution& solution, double p) {
  if (!(p >= 1.0)) throw Error(ErrorKind::Parameter, "L^p exponent must be >= 1");
  const auto cells = solution.mesh->cells();
  double sum = 0.0;
  for (int n = 1; n <= solution.num_steps(); ++n) {
    const double len = std::min(n * solution.dt, solution.T) - std::min((n - 1) * solution.dt, solution.T);
    double s = 0.0;
    for (std::size_t K = 0; K < cells.size(); ++K) s += cells[K].measure * std::pow(std::abs(solution.steps[n][K]), p);
    sum += len * s;
  }
  return std::pow(sum, 1.0 / p);
}

bool ConvergenceTable::strictly_decreasing() const {
  for (std::size_t j = 1; j + 1 < rows.size(); ++j)
    if (!(rows[j].difference < rows[j - 1].difference)) return false;
  return rows.size() >= 2;
}

std::vector<LadderLevel> interval_ladder(double a, double b, int n0, int levels, double dt0, int dt_exponent) {
  if (levels < 1) throw Error(ErrorKind::Parameter, "ladder needs at least one level");
  if (dt_exponent != 1 && dt_exponent != 2) throw Error(ErrorKind::Parameter, "dt exponent must be 1 or 2");
  std::vector<LadderLevel> out;
  double dt = dt0;
  for (int j = 0; j < levels; ++j) {
    out.push_back({std::make_shared<const Mesh>(build_interval_mesh(a, b, n0 << j)), dt});
    dt /= dt_exponent == 1 ? 2.0 : 4.0;
  }
  return out;
}

ConvergenceTable refinement_study(std::shared_ptr<const Model> model, FluxKind flux,
                                  const std::vector<LadderLevel>& levels, double p, const SolverConfig& cfg,
                                  TimeMode mode, Comparison comparison) {
  if (levels.size() < 2) throw Error(ErrorKind::Parameter, "a refinement study needs at least two levels");
  if (!(p >= 1.0)) throw Error(ErrorKind::Parameter, "L^p exponent must be >= 1");
  for (std::size_t j = 0; j + 1 < levels.size(); ++j) {
    injection_map(*levels[j].mesh, *levels[j + 1].mesh);
    const double q = levels[j].dt / levels[j + 1].dt;
    if (std::lround(q) < 1 || std::abs(q - std::lround(q)) > 1e-9 * q)
      throw Error(ErrorKind::Parameter, "time steps of consecutive levels are not nested");
  }
  ConvergenceTable table;
  table.solutions.resize(levels.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int j = static_cast<int>(levels.size()) - 1; j >= 0; --j) {
    try {
      table.solutions[j] = run_evolution(model, levels[j].mesh, levels[j].dt, flux, cfg, mode);
    } catch (...) {
#pragma omp critical(fvdeg_ladder_error)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  for (std::size_t j = 0; j < levels.size(); ++j) {
    ConvergenceRow row;
    row.cells = levels[j].mesh->num_cells();
    row.h = levels[j].mesh->h();
    row.dt = levels[j].dt;
    row.difference = j + 1 < levels.size()
                         ? cauchy_difference(table.solutions[j], table.solutions[j + 1], p, comparison)
                         : kNaN;
    row.ratio = j >= 1 && j + 1 < levels.size() ? table.rows[j - 1].difference / row.difference : kNaN;
    table.rows.push_back(row);
  }
  return table;
}

double oscillation_proxy(const DiscreteSolution& coarse, const DiscreteSolution& fine) {
  const double diff = cauchy_difference(coarse, fine, 1.0);
  const double norm = lp_norm(fine, 1.0);
  if (norm == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / norm;
}

bool BoundaryLayerReport::boundary_max_increasing() const {
  for (std::size_t j = 1; j < rows.size(); ++j)
    if (!(rows[j].boundary_cell_max > rows[j - 1].boundary_cell_max)) return false;
  return rows.size() >= 2;
}

bool BoundaryLayerReport::interior_cauchy_decreasing() const {
  for (std::size_t j = 1; j + 1 < rows.size(); ++j)
    if (!(rows[j].interior_difference < rows[j - 1].interior_difference)) return false;
  return rows.size() >= 3;
}

BoundaryLayerReport boundary_layer_probe(const std::vector<DiscreteSolution>& ladder, double sub_a, double sub_b) {
  if (!(sub_a < sub_b)) throw Error(ErrorKind::Parameter, "empty interior subdomain");
  auto inside = [=](const Point& x) { return x[0] >= sub_a && x[0] <= sub_b; };
  BoundaryLayerReport rep;
  for (std::size_t j = 0; j < ladder.size(); ++j) {
    const auto& s = ladder[j];
    const auto cells = s.mesh->cells();
    BoundaryLayerRow row;
    row.h = s.mesh->h();
    row.boundary_cell_max = -std::numeric_limits<double>::infinity();
    for (const auto& u : s.steps)
      for (const auto& b : s.mesh->boundary_faces()) row.boundary_cell_max = std::max(row.boundary_cell_max, u[b.cell]);
    for (int n = 1; n <= s.num_steps(); ++n) {
      const double len = std::min(n * s.dt, s.T) - std::min((n - 1) * s.dt, s.T);
      for (std::size_t K = 0; K < cells.size(); ++K) {
        if (!inside(cells[K].center)) continue;
        row.interior_l1 += len * cells[K].measure * std::abs(s.steps[n][K]);
        row.interior_max = std::max(row.interior_max, s.steps[n][K]);
      }
    }
    row.interior_difference =
        j + 1 < ladder.size() ? lp_difference(s, ladder[j + 1], 1.0, Comparison::Injection, inside) : kNaN;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace fvdeg
