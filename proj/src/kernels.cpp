#include "fvdeg/kernels.hpp"

#include <cassert>

namespace fvdeg::kernels {

namespace {

inline FluxPartials total_flux(const BalanceOperator& op, const Interface& s, double uk, double ul, double phik,
                               double phil, double dphik, double dphil, bool with_derivatives) {
  const double scale = convective_scale(op.model, s);
  FluxPartials c{};
  if (scale != 0.0) {
    if (with_derivatives) {
      c = directional_flux(op.flux, scale, uk, ul);
    } else {
      c.value = scale >= 0.0 ? scale * op.flux.value(uk, ul) : scale * op.flux.value(ul, uk);
    }
  }
  const double tau = s.transmissivity;
  return {c.value - tau * (phil - phik), c.d_left + tau * dphik, c.d_right - tau * dphil};
}

}  // namespace

namespace serial {

void interface_fluxes(const BalanceOperator& op, std::span<const double> u, InterfaceFluxes& out,
                      bool with_derivatives) {
  const auto faces = op.mesh.interfaces();
  const std::size_t n = faces.size();
  out.value.resize(n);
  out.d_owner.resize(with_derivatives ? n : 0);
  out.d_neighbor.resize(with_derivatives ? n : 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = faces[i];
    const double uk = u[s.owner], ul = u[s.neighbor];
    const double dk = with_derivatives ? op.model.dphi(uk) : 0.0;
    const double dl = with_derivatives ? op.model.dphi(ul) : 0.0;
    const auto p = total_flux(op, s, uk, ul, op.model.phi(uk), op.model.phi(ul), dk, dl, with_derivatives);
    out.value[i] = p.value;
    if (with_derivatives) {
      out.d_owner[i] = p.d_left;
      out.d_neighbor[i] = p.d_right;
    }
  }
}

void flux_divergence(const BalanceOperator& op, std::span<const double> u, std::span<double> out) {
  assert(out.size() == u.size());
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& s : op.mesh.interfaces()) {
    const double uk = u[s.owner], ul = u[s.neighbor];
    const double phi = total_flux(op, s, uk, ul, op.model.phi(uk), op.model.phi(ul), 0.0, 0.0, false).value;
    out[s.owner] += phi;
    out[s.neighbor] -= phi;
  }
}

void residual(const BalanceOperator& op, std::span<const double> u, std::span<const double> u_prev, double dt,
              std::span<double> out) {
  flux_divergence(op, u, out);
  const auto cells = op.mesh.cells();
  for (std::size_t k = 0; k < u.size(); ++k) out[k] += cells[k].measure * (u[k] - u_prev[k]) / dt;
}

}  // namespace serial

namespace omp {

void interface_fluxes(const BalanceOperator& op, std::span<const double> u, InterfaceFluxes& out,
                      bool with_derivatives) {
  const auto faces = op.mesh.interfaces();
  const auto ncell = static_cast<std::ptrdiff_t>(u.size());
  const auto n = static_cast<std::ptrdiff_t>(faces.size());
  out.value.resize(faces.size());
  out.d_owner.resize(with_derivatives ? faces.size() : 0);
  out.d_neighbor.resize(with_derivatives ? faces.size() : 0);

  std::vector<double> phi(u.size()), dphi(with_derivatives ? u.size() : 0);
#pragma omp parallel
  {
#pragma omp for schedule(static)
    for (std::ptrdiff_t k = 0; k < ncell; ++k) {
      phi[k] = op.model.phi(u[k]);
      if (with_derivatives) dphi[k] = op.model.dphi(u[k]);
    }
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto& s = faces[i];
      const auto p = total_flux(op, s, u[s.owner], u[s.neighbor], phi[s.owner], phi[s.neighbor],
                                with_derivatives ? dphi[s.owner] : 0.0, with_derivatives ? dphi[s.neighbor] : 0.0,
                                with_derivatives);
      out.value[i] = p.value;
      if (with_derivatives) {
        out.d_owner[i] = p.d_left;
        out.d_neighbor[i] = p.d_right;
      }
    }
  }
}

namespace {

void gather(const Mesh& mesh, const std::vector<double>& values, std::span<double> out) {
  const auto ncell = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < ncell; ++k) {
    double sum = 0.0;
    for (const auto& ci : mesh.cell_interfaces(static_cast<int>(k))) sum += ci.sign * values[ci.interface];
    out[k] = sum;
  }
}

}  // namespace

void flux_divergence(const BalanceOperator& op, std::span<const double> u, std::span<double> out) {
  assert(out.size() == u.size());
  InterfaceFluxes fl;
  interface_fluxes(op, u, fl, false);
  gather(op.mesh, fl.value, out);
}

void residual(const BalanceOperator& op, std::span<const double> u, std::span<const double> u_prev, double dt,
              std::span<double> out) {
  flux_divergence(op, u, out);
  const auto cells = op.mesh.cells();
  const auto ncell = static_cast<std::ptrdiff_t>(u.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < ncell; ++k) out[k] += cells[k].measure * (u[k] - u_prev[k]) / dt;
}

}  // namespace omp

}  // namespace fvdeg::kernels
