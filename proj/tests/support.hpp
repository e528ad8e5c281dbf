#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fvdeg/model.hpp"
#include "fvdeg/mesh.hpp"

namespace support {

inline std::shared_ptr<const fvdeg::Model> builtin(const std::string& name, double T = -1.0) {
  auto spec = fvdeg::builtin_model(name);
  if (T >= 0.0) spec.T = T;
  return std::make_shared<const fvdeg::Model>(fvdeg::make_model(spec));
}

inline std::shared_ptr<const fvdeg::Model> custom(const std::string& f, const std::string& phi,
                                                  const std::string& u0 = "0", double u_c = 0.0, double T = 1.0) {
  fvdeg::ModelSpec s;
  s.f = f;
  s.phi = phi;
  s.u0 = u0;
  s.u_c = u_c;
  s.T = T;
  return std::make_shared<const fvdeg::Model>(fvdeg::make_model(s));
}

inline std::shared_ptr<const fvdeg::Mesh> interval(int n, double a = 0.0, double b = 1.0) {
  return std::make_shared<const fvdeg::Mesh>(fvdeg::build_interval_mesh(a, b, n));
}

inline double l1(const fvdeg::Mesh& mesh, std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (int k = 0; k < mesh.num_cells(); ++k) s += mesh.cell(k).measure * std::abs(a[k] - b[k]);
  return s;
}

inline double max_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace support
