#include "fvdeg/numflux.hpp"

#include <algorithm>
#include <cmath>

#include "fvdeg/errors.hpp"

namespace fvdeg {

namespace {

constexpr int kScanCells = 20000;
constexpr int kMaxPieces = 64;
constexpr int kDenseCells = 4096;
constexpr int kSpeedSamples = 32;

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

FluxKind parse_flux_kind(std::string_view name) {
  if (name == "godunov") return FluxKind::Godunov;
  if (name == "eo" || name == "engquist_osher") return FluxKind::EngquistOsher;
  if (name == "rusanov") return FluxKind::Rusanov;
  throw Error(ErrorKind::Parameter, "unknown flux kind '" + std::string(name) + "' (godunov | eo | rusanov)");
}

const char* to_string(FluxKind kind) {
  switch (kind) {
    case FluxKind::Godunov: return "godunov";
    case FluxKind::EngquistOsher: return "eo";
    case FluxKind::Rusanov: return "rusanov";
  }
  return "?";
}

NumericalFlux::NumericalFlux(FluxKind kind, const Model& model)
    : kind_(kind),
      f_(model.f),
      df_(model.df),
      ceiling_(model.flux_ceiling),
      lipschitz_f_(model.lipschitz_f),
      f0_(model.f(0.0)) {
  // sign changes of f' delimit the monotone pieces of f
  int last_sign = 0;
  double last_pos = 0.0;
  for (int i = 0; i <= kScanCells; ++i) {
    const double s = ceiling_ * static_cast<double>(i) / kScanCells;
    const int sg = sign_of(df_(s));
    if (sg == 0) continue;
    if (last_sign != 0 && sg != last_sign) {
      double lo = last_pos, hi = s;
      for (int it = 0; it < 200 && hi - lo > 4e-16 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sign_of(df_(mid)) == last_sign) lo = mid;
        else hi = mid;
      }
      // the extremum value is the one attained at the crossing
      const double flo = f_(lo), fhi = f_(hi);
      const bool peak = last_sign > 0;
      breaks_.push_back(peak ? (flo >= fhi ? lo : hi) : (flo <= fhi ? lo : hi));
    }
    last_sign = sg;
    last_pos = s;
  }
  if (static_cast<int>(breaks_.size()) > kMaxPieces) {
    piecewise_monotone_ = false;
    breaks_.clear();
  }
}

double NumericalFlux::operator()(double a, double b) const {
  constexpr double tol = 1e-12;
  if (!(a >= -tol && a <= ceiling_ + tol && b >= -tol && b <= ceiling_ + tol))
    throw Error(ErrorKind::Domain, "flux arguments (" + std::to_string(a) + ", " + std::to_string(b) +
                                       ") outside [0, " + std::to_string(ceiling_) + "]");
  return value(a, b);
}

double NumericalFlux::min_on(double lo, double hi, double* argmin) const {
  double best = f_(lo), arg = lo;
  auto consider = [&](double s) {
    const double v = f_(s);
    if (v < best) {
      best = v;
      arg = s;
    }
  };
  const double fhi = f_(hi);
  if (fhi < best) {
    best = fhi;
    arg = hi;
  }
  if (piecewise_monotone_) {
    for (double s : breaks_)
      if (s > lo && s < hi) consider(s);
  } else {
    const double step = ceiling_ / kDenseCells;
    for (int i = static_cast<int>(std::ceil(std::max(lo, 0.0) / step)); i <= kDenseCells && i * step < hi; ++i)
      if (i * step > lo) consider(i * step);
  }
  if (argmin) *argmin = arg;
  return best;
}

double NumericalFlux::max_on(double lo, double hi, double* argmax) const {
  double best = f_(lo), arg = lo;
  auto consider = [&](double s) {
    const double v = f_(s);
    if (v > best) {
      best = v;
      arg = s;
    }
  };
  const double fhi = f_(hi);
  if (fhi > best) {
    best = fhi;
    arg = hi;
  }
  if (piecewise_monotone_) {
    for (double s : breaks_)
      if (s > lo && s < hi) consider(s);
  } else {
    const double step = ceiling_ / kDenseCells;
    for (int i = static_cast<int>(std::ceil(std::max(lo, 0.0) / step)); i <= kDenseCells && i * step < hi; ++i)
      if (i * step > lo) consider(i * step);
  }
  if (argmax) *argmax = arg;
  return best;
}

double NumericalFlux::godunov(double a, double b) const { return a <= b ? min_on(a, b) : max_on(b, a); }

double NumericalFlux::variation(double x, bool positive) const {
  auto part = [positive](double d) { return positive ? std::max(d, 0.0) : std::min(d, 0.0); };
  if (x == 0.0) return 0.0;
  if (x < 0.0) return -part(f0_ - f_(x));
  double sum = 0.0;
  double prev_s = 0.0, prev_f = f0_;
  auto step_to = [&](double s) {
    const double v = f_(s);
    sum += part(v - prev_f);
    prev_s = s;
    prev_f = v;
  };
  if (piecewise_monotone_) {
    for (double s : breaks_) {
      if (s >= x) break;
      step_to(s);
    }
  } else {
    const double step = ceiling_ / kDenseCells;
    for (int i = 1; i <= kDenseCells && i * step < x; ++i) step_to(i * step);
  }
  step_to(x);
  (void)prev_s;
  return sum;
}

double NumericalFlux::positive_variation(double x) const { return variation(x, true); }
double NumericalFlux::negative_variation(double x) const { return variation(x, false); }

double NumericalFlux::local_speed(double a, double b) const {
  const double lo = std::min(a, b), hi = std::max(a, b);
  double lam = std::max(std::abs(df_(lo)), std::abs(df_(hi)));
  for (int i = 1; i < kSpeedSamples; ++i) lam = std::max(lam, std::abs(df_(lo + (hi - lo) * i / kSpeedSamples)));
  return lam;
}

double NumericalFlux::value(double a, double b) const {
  switch (kind_) {
    case FluxKind::Godunov: return godunov(a, b);
    case FluxKind::EngquistOsher: return f0_ + positive_variation(a) + negative_variation(b);
    case FluxKind::Rusanov: return 0.5 * (f_(a) + f_(b)) - 0.5 * local_speed(a, b) * (b - a);
  }
  return 0.0;
}

FluxPartials NumericalFlux::partials(double a, double b) const {
  FluxPartials p;
  switch (kind_) {
    case FluxKind::Godunov: {
      if (a == b) {
        p.value = f_(a);
        const double d = df_(a);
        p.d_left = std::max(d, 0.0);
        p.d_right = std::min(d, 0.0);
        break;
      }
      double arg = 0.0;
      p.value = a < b ? min_on(a, b, &arg) : max_on(b, a, &arg);
      if (arg == a) p.d_left = std::max(df_(a), 0.0);
      else if (arg == b) p.d_right = std::min(df_(b), 0.0);
      break;
    }
    case FluxKind::EngquistOsher:
      p.value = value(a, b);
      p.d_left = std::max(df_(a), 0.0);
      p.d_right = std::min(df_(b), 0.0);
      break;
    case FluxKind::Rusanov: {
      // the sampled speed moves with both arguments, so differentiate the value itself
      p.value = value(a, b);
      auto slope = [&](double x, auto&& eval) {
        const double eps = 1e-7 * std::max(1.0, std::abs(x));
        const double lo = std::max(x - eps, 0.0), hi = std::min(x + eps, ceiling_);
        return hi > lo ? (eval(hi) - eval(lo)) / (hi - lo) : 0.0;
      };
      p.d_left = std::max(slope(a, [&](double x) { return value(x, b); }), 0.0);
      p.d_right = std::min(slope(b, [&](double x) { return value(a, x); }), 0.0);
      break;
    }
  }
  return p;
}

double NumericalFlux::lipschitz() const {
  return kind_ == FluxKind::Rusanov ? 2.0 * lipschitz_f_ : lipschitz_f_;
}

FluxPartials directional_flux(const NumericalFlux& flux, double scale, double a, double b) {
  if (scale >= 0.0) {
    FluxPartials p = flux.partials(a, b);
    return {scale * p.value, scale * p.d_left, scale * p.d_right};
  }
  FluxPartials p = flux.partials(b, a);
  return {scale * p.value, scale * p.d_right, scale * p.d_left};
}

}  // namespace fvdeg
