#include <functional>

#include "doctest.h"
#include "fvdeg/errors.hpp"
#include "fvdeg/mesh.hpp"

using namespace fvdeg;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("uniform interval of four cells") {
  const Mesh m = build_interval_mesh(0.0, 1.0, 4);
  REQUIRE(m.num_cells() == 4);
  const double centers[] = {0.125, 0.375, 0.625, 0.875};
  for (int k = 0; k < 4; ++k) {
    CHECK(m.cell(k).measure == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(m.cell(k).center[0] == doctest::Approx(centers[k]).epsilon(1e-15));
  }
  REQUIRE(m.interfaces().size() == 3);
  for (const auto& s : m.interfaces()) {
    CHECK(s.transmissivity == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(s.measure == 1.0);
  }
  CHECK(m.boundary_faces().size() == 2);
  CHECK(m.h() == doctest::Approx(0.25));
}

TEST_CASE("two cells share one interface") {
  const Mesh m = build_interval_mesh(0.0, 1.0, 2);
  REQUIRE(m.interfaces().size() == 1);
  CHECK(m.interfaces()[0].transmissivity == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("graded interval") {
  const std::function<double(double)> sq = [](double s) { return s * s; };
  const Mesh m = build_interval_mesh(0.0, 1.0, 3, &sq, "x^2");
  const auto& nodes = m.description().nodes;
  REQUIRE(nodes.size() == 4);
  CHECK(nodes[0] == 0.0);
  CHECK(nodes[1] == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  CHECK(nodes[2] == doctest::Approx(4.0 / 9.0).epsilon(1e-15));
  CHECK(nodes[3] == 1.0);
  CHECK(m.domain_measure() == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& s : m.interfaces())
    CHECK(s.transmissivity == doctest::Approx(1.0 / (m.cell(s.neighbor).center[0] - m.cell(s.owner).center[0])));
}

TEST_CASE("interval mesh errors") {
  const std::function<double(double)> bad = [](double s) { return s < 0.5 ? s : 1.0 - 0.5 * (s - 0.5); };
  CHECK(kind_of([&] { build_interval_mesh(0.0, 1.0, 4, &bad); }) == ErrorKind::InvalidMesh);
  CHECK(kind_of([] { build_interval_mesh(0.0, 1.0, 1); }) == ErrorKind::Parameter);
  CHECK(kind_of([] { build_interval_mesh(1.0, 0.0, 4); }) == ErrorKind::InvalidMesh);
  CHECK(kind_of([] { build_interval_mesh_from_nodes({0.0, 0.5, 0.5, 1.0}); }) == ErrorKind::InvalidMesh);
}

TEST_CASE("unit square quartered") {
  const Mesh m = build_rectangle_mesh(1.0, 1.0, 2, 2);
  CHECK(m.dim() == 2);
  REQUIRE(m.num_cells() == 4);
  for (const auto& c : m.cells()) CHECK(c.measure == doctest::Approx(0.25));
  REQUIRE(m.interfaces().size() == 4);
  for (const auto& s : m.interfaces()) CHECK(s.transmissivity == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("rectangle transmissivities") {
  const Mesh m = build_rectangle_mesh(2.0, 1.0, 4, 2);
  for (const auto& s : m.interfaces()) {
    CHECK(s.transmissivity == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.measure == doctest::Approx(0.5));
    CHECK(s.distance == doctest::Approx(0.5));
  }
  const Mesh skew = build_rectangle_mesh(1.0, 1.0, 4, 2);
  for (const auto& s : skew.interfaces()) {
    const double expected = s.normal[0] != 0.0 ? 0.5 / 0.25 : 0.25 / 0.5;
    CHECK(s.transmissivity == doctest::Approx(expected).epsilon(1e-15));
  }
}

TEST_CASE("three by three grid counts") {
  const Mesh m = build_rectangle_mesh(1.0, 1.0, 3, 3);
  CHECK(m.num_cells() == 9);
  CHECK(m.interfaces().size() == 12);
  CHECK(m.boundary_faces().size() == 12);
  CHECK(kind_of([] { build_rectangle_mesh(0.0, 1.0, 3, 3); }) == ErrorKind::InvalidMesh);
  CHECK(kind_of([] { build_rectangle_mesh(1.0, -1.0, 3, 3); }) == ErrorKind::InvalidMesh);
}

TEST_CASE("every interface is listed by both of its cells") {
  for (const Mesh& m : {build_interval_mesh(0.0, 2.0, 7), build_rectangle_mesh(1.0, 2.0, 3, 5)}) {
    std::vector<int> seen(m.interfaces().size(), 0);
    for (int k = 0; k < m.num_cells(); ++k)
      for (const auto& ci : m.cell_interfaces(k)) {
        const auto& s = m.interfaces()[ci.interface];
        CHECK(((ci.sign > 0 && s.owner == k && s.neighbor == ci.other) ||
               (ci.sign < 0 && s.neighbor == k && s.owner == ci.other)));
        ++seen[ci.interface];
      }
    for (int c : seen) CHECK(c == 2);
    for (const auto& f : m.boundary_faces()) CHECK((f.cell >= 0 && f.cell < m.num_cells()));
  }
}

TEST_CASE("bisection halves h and keeps the measure") {
  const std::function<double(double)> g = [](double s) { return s * s * (3.0 - 2.0 * s); };
  const Mesh coarse = build_interval_mesh(-1.0, 2.0, 10);
  const Mesh fine = refine_by_bisection(coarse);
  CHECK(fine.num_cells() == 20);
  CHECK(fine.h() == doctest::Approx(0.5 * coarse.h()).epsilon(1e-14));
  CHECK(fine.domain_measure() == doctest::Approx(coarse.domain_measure()).epsilon(1e-12));

  const Mesh graded = build_interval_mesh(0.0, 1.0, 8, &g);
  const Mesh graded_fine = refine_by_bisection(graded);
  CHECK(graded_fine.h() == doctest::Approx(0.5 * graded.h()).epsilon(1e-14));

  const Mesh sq = build_rectangle_mesh(1.0, 1.0, 3, 2);
  const Mesh sq_fine = refine_by_bisection(sq);
  CHECK(sq_fine.num_cells() == 24);
  CHECK(sq_fine.h() == doctest::Approx(0.5 * sq.h()));
}

TEST_CASE("injection map on nested meshes") {
  const Mesh coarse = build_interval_mesh(0.0, 1.0, 4);
  const Mesh fine = build_interval_mesh(0.0, 1.0, 16);
  const auto map = injection_map(coarse, fine);
  for (int k = 0; k < 16; ++k) CHECK(map[k] == k / 4);
  CHECK(kind_of([&] { injection_map(coarse, build_interval_mesh(0.0, 1.0, 6)); }) == ErrorKind::Parameter);
  CHECK(kind_of([&] { injection_map(build_rectangle_mesh(1, 1, 2, 2), build_rectangle_mesh(1, 1, 3, 4)); }) ==
        ErrorKind::Parameter);
  CHECK(kind_of([&] { injection_map(coarse, build_rectangle_mesh(1, 1, 4, 4)); }) == ErrorKind::Parameter);
}

TEST_CASE("locate") {
  const Mesh m = build_interval_mesh(0.0, 1.0, 4);
  CHECK(m.locate({0.0, 0.0}) == 0);
  CHECK(m.locate({0.3, 0.0}) == 1);
  CHECK(m.locate({1.0, 0.0}) == 3);
  CHECK(kind_of([&] { m.locate({1.5, 0.0}); }) == ErrorKind::Domain);
  const Mesh r = build_rectangle_mesh(2.0, 1.0, 4, 2);
  CHECK(r.locate({1.1, 0.9}) == 1 * 4 + 2);
  CHECK(kind_of([&] { r.locate({-0.1, 0.5}); }) == ErrorKind::Domain);
}
