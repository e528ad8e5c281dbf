#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fvdeg/model.hpp"

namespace fvdeg {

enum class FluxKind { Godunov, EngquistOsher, Rusanov };

FluxKind parse_flux_kind(std::string_view name);  // "godunov" | "eo" | "rusanov"
const char* to_string(FluxKind kind);

struct FluxPartials {
  double value = 0.0;
  double d_left = 0.0;   // >= 0
  double d_right = 0.0;  // <= 0
};

/// Monotone two-point approximation F(a, b) of the scalar flux f.
///
/// f is split once into monotone pieces: sign changes of f' are located on a
/// 2*10^4-cell sample grid over [0, flux_ceiling] and refined by bisection.
/// Godunov and Engquist-Osher are then exact in terms of f values at piece
/// ends. If f has too many pieces to be treated that way, both fall back to a
/// dense grid. Outside [0, flux_ceiling] f is continued with its outermost
/// monotone behavior (only relevant to unconverged solver iterates).
class NumericalFlux {
 public:
  NumericalFlux(FluxKind kind, const Model& model);

  FluxKind kind() const { return kind_; }

  /// Checked evaluation: throws a domain error unless a, b lie in [0, flux_ceiling].
  double operator()(double a, double b) const;

  double value(double a, double b) const;
  FluxPartials partials(double a, double b) const;

  /// Lipschitz bound of F in each argument; L_f for Godunov/EO, 2 L_f for Rusanov.
  double lipschitz() const;

  double f(double u) const { return f_(u); }
  double df(double u) const { return df_(u); }

  /// Interior critical points of f found on [0, flux_ceiling].
  const std::vector<double>& breakpoints() const { return breaks_; }
  bool piecewise_monotone() const { return piecewise_monotone_; }

  /// Extremes of f on [lo, hi] (lo <= hi), by breakpoints or dense grid.
  double min_on(double lo, double hi, double* argmin = nullptr) const;
  double max_on(double lo, double hi, double* argmax = nullptr) const;

  /// Rusanov wave-speed bound: max |f'| over [min(a, b), max(a, b)].
  double local_speed(double a, double b) const;

 private:
  double godunov(double a, double b) const;
  double positive_variation(double x) const;  // int_0^x max(f', 0)
  double negative_variation(double x) const;  // int_0^x min(f', 0)
  double variation(double x, bool positive) const;

  FluxKind kind_;
  Expression f_, df_;
  double ceiling_;
  double lipschitz_f_;
  double f0_;
  std::vector<double> breaks_;
  bool piecewise_monotone_ = true;
};

/// Flux across an interface with unit normal n for the vector flux f(u) d:
/// scale = (d . n) m(sigma); F_sigma(a, b) = scale F(a, b) if scale >= 0,
/// otherwise scale F(b, a). Consistent, monotone and conservative.
FluxPartials directional_flux(const NumericalFlux& flux, double scale, double a, double b);

}  // namespace fvdeg
