#pragma once

// Cell-balance kernels shared by the implicit and explicit schemes.
//
// For an inner interface sigma = K|L the total flux leaving K is
//   Phi_sigma = F_sigma(u_K, u_L) - tau_sigma (phi(u_L) - phi(u_K)),
// and the balance of cell K is  sum_{sigma in E_K} (+/-) Phi_sigma.
// Boundary faces contribute nothing (zero-flux condition).
//
// `serial` is the reference implementation: a single scatter loop over
// interfaces. `omp` evaluates interface fluxes in parallel and gathers them
// per cell, so no two threads write the same entry.

#include <span>
#include <vector>

#include "fvdeg/mesh.hpp"
#include "fvdeg/model.hpp"
#include "fvdeg/numflux.hpp"

namespace fvdeg {

enum class Backend { Serial, OpenMP };

/// Read-only operator data for one (mesh, model, flux) triple.
struct BalanceOperator {
  const Mesh& mesh;
  const Model& model;
  const NumericalFlux& flux;
};

/// Interface flux values and their derivatives w.r.t. owner / neighbor states.
struct InterfaceFluxes {
  std::vector<double> value;
  std::vector<double> d_owner;
  std::vector<double> d_neighbor;
};

namespace kernels {

namespace serial {
void flux_divergence(const BalanceOperator& op, std::span<const double> u, std::span<double> out);
void residual(const BalanceOperator& op, std::span<const double> u, std::span<const double> u_prev, double dt,
              std::span<double> out);
void interface_fluxes(const BalanceOperator& op, std::span<const double> u, InterfaceFluxes& out,
                      bool with_derivatives);
}  // namespace serial

namespace omp {
void flux_divergence(const BalanceOperator& op, std::span<const double> u, std::span<double> out);
void residual(const BalanceOperator& op, std::span<const double> u, std::span<const double> u_prev, double dt,
              std::span<double> out);
void interface_fluxes(const BalanceOperator& op, std::span<const double> u, InterfaceFluxes& out,
                      bool with_derivatives);
}  // namespace omp

inline void flux_divergence(Backend b, const BalanceOperator& op, std::span<const double> u,
                            std::span<double> out) {
  b == Backend::Serial ? serial::flux_divergence(op, u, out) : omp::flux_divergence(op, u, out);
}

inline void residual(Backend b, const BalanceOperator& op, std::span<const double> u,
                     std::span<const double> u_prev, double dt, std::span<double> out) {
  b == Backend::Serial ? serial::residual(op, u, u_prev, dt, out) : omp::residual(op, u, u_prev, dt, out);
}

inline void interface_fluxes(Backend b, const BalanceOperator& op, std::span<const double> u, InterfaceFluxes& out,
                             bool with_derivatives) {
  b == Backend::Serial ? serial::interface_fluxes(op, u, out, with_derivatives)
                       : omp::interface_fluxes(op, u, out, with_derivatives);
}

/// Convective scale (d . n) m(sigma) of an interface.
inline double convective_scale(const Model& model, const Interface& s) {
  return (model.direction[0] * s.normal[0] + model.direction[1] * s.normal[1]) * s.measure;
}

}  // namespace kernels
}  // namespace fvdeg
