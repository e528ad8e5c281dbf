#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fvdeg/expr.hpp"
#include "fvdeg/mesh.hpp"

namespace fvdeg {

/// Textual model data as it appears in a run configuration.
struct ModelSpec {
  std::string name = "custom";
  std::string f = "0";
  std::string phi = "0";
  std::string u0 = "0";
  std::string g = "0";
  double u_c = 0.0;
  double u_max = 1.0;
  double T = 1.0;
  std::optional<double> lipschitz_f;
  std::optional<double> lipschitz_phi;
  /// Upper end of the range on which the convection flux may be evaluated.
  /// Defaults to u_max; models violating f(0) = f(u_max) = 0 may need more.
  std::optional<double> flux_ceiling;
  /// Convection direction d in 2D: the flux vector is f(u) * d.
  Point direction{1.0, 0.0};
};

/// Problem data for u_t + div f(u) - lap phi(u) = 0 with zero-flux boundaries
/// and for the stationary problem u + div f(u) - lap phi(u) = g.
struct Model {
  ModelSpec spec;
  Expression f, df;
  Expression phi, dphi;
  Expression u0;
  Expression g;
  double u_c = 0.0;
  double u_max = 1.0;
  double T = 1.0;
  double lipschitz_f = 0.0;
  double lipschitz_phi = 0.0;
  double flux_ceiling = 1.0;
  Point direction{1.0, 0.0};
  bool h1_satisfied = false;  // f(0) = f(u_max) = 0
};

struct ValidationReport {
  bool phi_monotone = true;
  bool phi_flat_below_uc = true;
  bool phi_strict_above_uc = true;
  bool h1_satisfied = false;
  double u0_min = 0.0;
  double u0_max = 0.0;
  std::vector<std::string> notes;
};

/// Parses and checks the expressions; estimates Lipschitz constants by
/// sampling 10^4 points when they are not declared. Runs `validate`.
Model make_model(const ModelSpec& spec);

/// Structural checks. Throws invalid-model when phi decreases on the sample
/// grid and invalid-data when u0 leaves [0, u_max]. A failing (H1) is only reported.
ValidationReport validate(const Model& model, const Mesh* mesh = nullptr);

/// Estimate of sup |e'| on [lo, hi] from 10^4 samples of the derivative and chord slopes.
double estimate_lipschitz(const Expression& e, const Expression& de, double lo, double hi, int samples = 10000);

/// Named configurations: fig1a, fig1b, fig1c, heat-like, heat-cosine.
const std::map<std::string, ModelSpec>& builtin_models();
ModelSpec builtin_model(const std::string& name);

/// The default initial datum 0.8 * 1_[0.3, 0.6](x).
inline constexpr const char* kDefaultInitialDatum = "0.8*ind(x, 0.3, 0.6)";

}  // namespace fvdeg
