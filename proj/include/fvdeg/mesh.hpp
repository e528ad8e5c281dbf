#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fvdeg {

using Point = std::array<double, 2>;

struct Cell {
  Point center{};
  double measure = 0.0;
  double diameter = 0.0;
};

/// Inner interface sigma = K|L. The normal points from `owner` (K) to `neighbor` (L).
struct Interface {
  int owner = -1;
  int neighbor = -1;
  double measure = 0.0;        // m(sigma); 1 in 1D
  double distance = 0.0;       // d(x_K, x_L)
  double transmissivity = 0.0; // m(sigma) / d(x_K, x_L), identical seen from K or L
  Point normal{};
  Point center{};
};

struct BoundaryFace {
  int cell = -1;
  double measure = 0.0;
  Point normal{};  // outward unit normal
  Point center{};
};

/// One entry of a cell's interface list; `sign` is +1 when the cell owns it.
struct CellInterface {
  int interface = -1;
  int other = -1;
  int sign = 1;
};

/// Geometry parameters the mesh was built from (enough to rebuild it bit-for-bit).
struct MeshDescription {
  enum class Kind { Interval, Rectangle } kind = Kind::Interval;
  // interval
  double a = 0.0, b = 1.0;
  std::vector<double> nodes;  // cell boundaries, left to right
  std::string grading;        // informational, empty when uniform
  // rectangle
  double lx = 0.0, ly = 0.0;
  int nx = 0, ny = 0;
};

/// Admissible two-point mesh. Immutable once built.
class Mesh {
 public:
  int dim() const { return dim_; }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  std::span<const Cell> cells() const { return cells_; }
  std::span<const Interface> interfaces() const { return interfaces_; }
  std::span<const BoundaryFace> boundary_faces() const { return boundary_faces_; }
  std::span<const CellInterface> cell_interfaces(int cell) const {
    return {adjacency_.data() + adjacency_offsets_[cell],
            static_cast<std::size_t>(adjacency_offsets_[cell + 1] - adjacency_offsets_[cell])};
  }
  const Cell& cell(int k) const { return cells_[k]; }
  double h() const { return h_; }
  double domain_measure() const { return domain_measure_; }
  const MeshDescription& description() const { return desc_; }

  /// Lower/upper corners of the bounding box of Omega.
  Point lower() const;
  Point upper() const;

  /// Index of the cell containing x; throws a domain error outside the closed domain.
  int locate(const Point& x) const;

  friend Mesh build_interval_mesh(double, double, int, const std::function<double(double)>*, std::string);
  friend Mesh build_interval_mesh_from_nodes(std::vector<double>, std::string);
  friend Mesh build_rectangle_mesh(double, double, int, int);

 private:
  void finalize();

  int dim_ = 1;
  std::vector<Cell> cells_;
  std::vector<Interface> interfaces_;
  std::vector<BoundaryFace> boundary_faces_;
  std::vector<int> adjacency_offsets_;
  std::vector<CellInterface> adjacency_;
  double h_ = 0.0;
  double domain_measure_ = 0.0;
  MeshDescription desc_;
};

/// Partition of (a, b) into n cells with boundaries a + (b - a) * grading(i / n).
/// `grading` must be a strictly increasing bijection of [0, 1]; uniform if null.
Mesh build_interval_mesh(double a, double b, int n, const std::function<double(double)>* grading = nullptr,
                         std::string grading_label = {});
Mesh build_interval_mesh_from_nodes(std::vector<double> nodes, std::string grading_label = {});

/// Uniform nx-by-ny grid of (0, lx) x (0, ly).
Mesh build_rectangle_mesh(double lx, double ly, int nx, int ny);

/// Splits every cell into 2 (1D) or 4 (2D) congruent children.
Mesh refine_by_bisection(const Mesh& mesh);

/// For nested meshes: index of the coarse cell containing each fine cell's center.
std::vector<int> injection_map(const Mesh& coarse, const Mesh& fine);

}  // namespace fvdeg
