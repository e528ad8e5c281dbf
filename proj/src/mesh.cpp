#include "fvdeg/mesh.hpp"

#include <algorithm>
#include <cmath>

#include "fvdeg/errors.hpp"

namespace fvdeg {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorKind::InvalidMesh, msg); }

}  // namespace

void Mesh::finalize() {
  const int n = num_cells();
  std::vector<int> counts(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& s : interfaces_) {
    if (s.owner == s.neighbor || s.owner < 0 || s.neighbor < 0 || s.owner >= n || s.neighbor >= n)
      invalid("interface must reference two distinct cells");
    if (!(s.transmissivity > 0.0)) invalid("transmissivity must be positive");
    ++counts[s.owner + 1];
    ++counts[s.neighbor + 1];
  }
  for (int k = 0; k < n; ++k) counts[k + 1] += counts[k];
  adjacency_offsets_ = counts;
  adjacency_.assign(static_cast<std::size_t>(counts[n]), {});
  std::vector<int> fill(counts.begin(), counts.end() - 1);
  for (int i = 0; i < static_cast<int>(interfaces_.size()); ++i) {
    const auto& s = interfaces_[i];
    adjacency_[fill[s.owner]++] = {i, s.neighbor, +1};
    adjacency_[fill[s.neighbor]++] = {i, s.owner, -1};
  }
  h_ = 0.0;
  domain_measure_ = 0.0;
  for (const auto& c : cells_) {
    h_ = std::max(h_, c.diameter);
    domain_measure_ += c.measure;
  }
}

Point Mesh::lower() const {
  if (dim_ == 1) return {desc_.nodes.front(), 0.0};
  return {0.0, 0.0};
}

Point Mesh::upper() const {
  if (dim_ == 1) return {desc_.nodes.back(), 0.0};
  return {desc_.lx, desc_.ly};
}

int Mesh::locate(const Point& x) const {
  if (dim_ == 1) {
    const auto& nodes = desc_.nodes;
    if (!(x[0] >= nodes.front() && x[0] <= nodes.back()))
      throw Error(ErrorKind::Domain, "point x=" + std::to_string(x[0]) + " lies outside the domain");
    auto it = std::upper_bound(nodes.begin(), nodes.end(), x[0]);
    int k = static_cast<int>(it - nodes.begin()) - 1;
    return std::clamp(k, 0, num_cells() - 1);
  }
  if (!(x[0] >= 0.0 && x[0] <= desc_.lx && x[1] >= 0.0 && x[1] <= desc_.ly))
    throw Error(ErrorKind::Domain, "point lies outside the rectangle");
  const int i = std::clamp(static_cast<int>(std::floor(x[0] / desc_.lx * desc_.nx)), 0, desc_.nx - 1);
  const int j = std::clamp(static_cast<int>(std::floor(x[1] / desc_.ly * desc_.ny)), 0, desc_.ny - 1);
  return j * desc_.nx + i;
}

Mesh build_interval_mesh_from_nodes(std::vector<double> nodes, std::string grading_label) {
  const int n = static_cast<int>(nodes.size()) - 1;
  if (n < 2) throw Error(ErrorKind::Parameter, "interval mesh needs at least 2 cells");
  for (int i = 0; i < n; ++i)
    if (!(nodes[i + 1] > nodes[i])) invalid("cell boundaries must be strictly increasing");

  Mesh m;
  m.dim_ = 1;
  m.cells_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& c = m.cells_[i];
    c.measure = nodes[i + 1] - nodes[i];
    c.diameter = c.measure;
    c.center = {0.5 * (nodes[i] + nodes[i + 1]), 0.0};
  }
  for (int i = 0; i + 1 < n; ++i) {
    Interface s;
    s.owner = i;
    s.neighbor = i + 1;
    s.measure = 1.0;
    s.distance = m.cells_[i + 1].center[0] - m.cells_[i].center[0];
    s.transmissivity = 1.0 / s.distance;
    s.normal = {1.0, 0.0};
    s.center = {nodes[i + 1], 0.0};
    m.interfaces_.push_back(s);
  }
  m.boundary_faces_.push_back({0, 1.0, {-1.0, 0.0}, {nodes.front(), 0.0}});
  m.boundary_faces_.push_back({n - 1, 1.0, {1.0, 0.0}, {nodes.back(), 0.0}});
  m.desc_.kind = MeshDescription::Kind::Interval;
  m.desc_.a = nodes.front();
  m.desc_.b = nodes.back();
  m.desc_.nodes = std::move(nodes);
  m.desc_.grading = std::move(grading_label);
  m.finalize();
  return m;
}

Mesh build_interval_mesh(double a, double b, int n, const std::function<double(double)>* grading,
                         std::string grading_label) {
  if (n < 2) throw Error(ErrorKind::Parameter, "interval mesh needs at least 2 cells");
  if (!(a < b)) invalid("interval mesh needs a < b");
  std::vector<double> nodes(static_cast<std::size_t>(n) + 1);
  if (grading == nullptr) {
    for (int i = 0; i <= n; ++i) nodes[i] = a + (b - a) * static_cast<double>(i) / n;
  } else {
    const auto& g = *grading;
    if (std::abs(g(0.0)) > 1e-12 || std::abs(g(1.0) - 1.0) > 1e-12)
      invalid("grading must map 0 to 0 and 1 to 1");
    // strict monotonicity on a sub-grid finer than the mesh
    constexpr int kSub = 16;
    double prev = g(0.0);
    for (int i = 1; i <= n * kSub; ++i) {
      const double v = g(static_cast<double>(i) / (n * kSub));
      if (!(v > prev)) invalid("grading is not strictly increasing");
      prev = v;
    }
    for (int i = 0; i <= n; ++i) nodes[i] = a + (b - a) * g(static_cast<double>(i) / n);
    nodes.front() = a;
    nodes.back() = b;
  }
  return build_interval_mesh_from_nodes(std::move(nodes), std::move(grading_label));
}

Mesh build_rectangle_mesh(double lx, double ly, int nx, int ny) {
  if (!(lx > 0.0) || !(ly > 0.0)) invalid("rectangle extents must be positive");
  if (nx < 2 || ny < 2) throw Error(ErrorKind::Parameter, "rectangle mesh needs at least 2 cells per direction");
  const double dx = lx / nx;
  const double dy = ly / ny;
  Mesh m;
  m.dim_ = 2;
  auto id = [nx](int i, int j) { return j * nx + i; };
  m.cells_.resize(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      auto& c = m.cells_[id(i, j)];
      c.center = {(i + 0.5) * dx, (j + 0.5) * dy};
      c.measure = dx * dy;
      c.diameter = std::hypot(dx, dy);
    }
  // vertical interfaces (normal +x)
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i)
      m.interfaces_.push_back({id(i, j), id(i + 1, j), dy, dx, dy / dx, {1.0, 0.0}, {(i + 1) * dx, (j + 0.5) * dy}});
  // horizontal interfaces (normal +y)
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i < nx; ++i)
      m.interfaces_.push_back({id(i, j), id(i, j + 1), dx, dy, dx / dy, {0.0, 1.0}, {(i + 0.5) * dx, (j + 1) * dy}});
  for (int j = 0; j < ny; ++j) {
    m.boundary_faces_.push_back({id(0, j), dy, {-1.0, 0.0}, {0.0, (j + 0.5) * dy}});
    m.boundary_faces_.push_back({id(nx - 1, j), dy, {1.0, 0.0}, {lx, (j + 0.5) * dy}});
  }
  for (int i = 0; i < nx; ++i) {
    m.boundary_faces_.push_back({id(i, 0), dx, {0.0, -1.0}, {(i + 0.5) * dx, 0.0}});
    m.boundary_faces_.push_back({id(i, ny - 1), dx, {0.0, 1.0}, {(i + 0.5) * dx, ly}});
  }
  m.desc_.kind = MeshDescription::Kind::Rectangle;
  m.desc_.lx = lx;
  m.desc_.ly = ly;
  m.desc_.nx = nx;
  m.desc_.ny = ny;
  m.finalize();
  return m;
}

Mesh refine_by_bisection(const Mesh& mesh) {
  const auto& d = mesh.description();
  if (d.kind == MeshDescription::Kind::Rectangle) return build_rectangle_mesh(d.lx, d.ly, 2 * d.nx, 2 * d.ny);
  std::vector<double> nodes;
  nodes.reserve(2 * d.nodes.size());
  for (std::size_t i = 0; i + 1 < d.nodes.size(); ++i) {
    nodes.push_back(d.nodes[i]);
    nodes.push_back(0.5 * (d.nodes[i] + d.nodes[i + 1]));
  }
  nodes.push_back(d.nodes.back());
  return build_interval_mesh_from_nodes(std::move(nodes), d.grading);
}

std::vector<int> injection_map(const Mesh& coarse, const Mesh& fine) {
  if (coarse.dim() != fine.dim()) throw Error(ErrorKind::Parameter, "meshes of different dimension");
  std::vector<int> map(static_cast<std::size_t>(fine.num_cells()));
  for (int k = 0; k < fine.num_cells(); ++k) {
    const int c = coarse.locate(fine.cell(k).center);
    // nesting: the fine cell must not straddle a coarse boundary
    if (fine.cell(k).measure > coarse.cell(c).measure * (1.0 + 1e-12))
      throw Error(ErrorKind::Parameter, "meshes are not nested");
    map[k] = c;
  }
  if (fine.dim() == 1) {
    const auto& cn = coarse.description().nodes;
    const auto& fn = fine.description().nodes;
    for (double x : cn) {
      const bool found = std::any_of(fn.begin(), fn.end(), [&](double y) {
        return std::abs(x - y) <= 1e-12 * (std::abs(x) + 1.0);
      });
      if (!found) throw Error(ErrorKind::Parameter, "meshes are not nested");
    }
  } else {
    const auto& cd = coarse.description();
    const auto& fd = fine.description();
    if (fd.nx % cd.nx != 0 || fd.ny % cd.ny != 0 || std::abs(cd.lx - fd.lx) > 1e-12 ||
        std::abs(cd.ly - fd.ly) > 1e-12)
      throw Error(ErrorKind::Parameter, "meshes are not nested");
  }
  return map;
}

}  // namespace fvdeg
