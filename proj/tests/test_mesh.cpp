#include "calderon/mesh.hpp"

#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"

using namespace calderon;

namespace {

IntVector divs(std::initializer_list<int> values) {
  IntVector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (const int x : values) v(i++) = x;
  return v;
}

Vector coords(std::initializer_list<Real> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (const Real x : values) v(i++) = x;
  return v;
}

Real total_volume(const ElementGeometry& geom) { return geom.volume.sum(); }

Real surface_area(const SimplexMesh& mesh) { return mesh.bface_measure.sum(); }

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path(name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("unit square with one division splits into two triangles") {
  const SimplexMesh mesh = generate_box_mesh(coords({0, 0}), coords({1, 1}), divs({1, 1}));
  CHECK(mesh.dim == 2);
  CHECK(mesh.n_nodes() == 4);
  CHECK(mesh.n_elements() == 2);
  CHECK(mesh.n_bfaces() == 4);
}

TEST_CASE("unit interval with four divisions") {
  const SimplexMesh mesh = generate_box_mesh(coords({0}), coords({1}), divs({4}));
  CHECK(mesh.n_nodes() == 5);
  CHECK(mesh.n_elements() == 4);
  CHECK(mesh.n_bfaces() == 2);
  for (Index i = 0; i < 5; ++i) CHECK(mesh.nodes(i, 0) == doctest::Approx(0.25 * i));
}

TEST_CASE("unit cube with two divisions per axis") {
  const SimplexMesh mesh = generate_box_mesh(coords({0, 0, 0}), coords({1, 1, 1}),
                                             divs({2, 2, 2}));
  const ElementGeometry geom = compute_geometry(mesh);
  CHECK(mesh.n_nodes() == 27);
  CHECK(mesh.n_elements() == 48);
  CHECK(total_volume(geom) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("box volume and surface area match the analytic values") {
  const SimplexMesh mesh =
      generate_box_mesh(coords({0, 0, 0}), coords({1, 1, 0.05}), divs({7, 5, 1}));
  const ElementGeometry geom = compute_geometry(mesh);
  CHECK(total_volume(geom) == doctest::Approx(0.05).epsilon(1e-10));
  // 2 * (1*1) + 4 * (1*0.05)
  CHECK(surface_area(mesh) == doctest::Approx(2.2).epsilon(1e-10));
}

TEST_CASE("boundary normals are unit length and point outward") {
  const SimplexMesh mesh = generate_box_mesh(coords({0, 0, 0}), coords({1, 1, 1}),
                                             divs({3, 3, 3}));
  const ElementGeometry geom = compute_geometry(mesh);
  for (Index f = 0; f < mesh.n_bfaces(); ++f) {
    CHECK(mesh.bface_normal.row(f).norm() == doctest::Approx(1.0).epsilon(1e-12));
    RowVector face_center = RowVector::Zero(mesh.dim);
    for (int j = 0; j < mesh.dim; ++j) face_center += mesh.nodes.row(mesh.bface_nodes(f, j));
    face_center /= mesh.dim;
    const RowVector to_face = face_center - geom.centroid.row(mesh.bface_element(f));
    CHECK(to_face.dot(mesh.bface_normal.row(f)) > 0);
  }
}

TEST_CASE("shape gradients of the reference right triangle") {
  SimplexMesh mesh;
  mesh.dim = 2;
  mesh.nodes.resize(3, 2);
  mesh.nodes << 0, 0, 1, 0, 0, 1;
  mesh.elements.resize(1, 3);
  mesh.elements << 0, 1, 2;
  mesh.bface_nodes.resize(3, 2);
  mesh.bface_nodes << 0, 1, 1, 2, 2, 0;
  finalize_mesh(mesh);
  const ElementGeometry geom = compute_geometry(mesh);

  CHECK(geom.volume(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(geom.grad(0, 0)(0) == doctest::Approx(-1));
  CHECK(geom.grad(0, 0)(1) == doctest::Approx(-1));
  CHECK(geom.grad(0, 1)(0) == doctest::Approx(1));
  CHECK(geom.grad(0, 1)(1) == doctest::Approx(0).epsilon(1e-14));
  CHECK(geom.grad(0, 2)(0) == doctest::Approx(0).epsilon(1e-14));
  CHECK(geom.grad(0, 2)(1) == doctest::Approx(1));
}

TEST_CASE("shape gradients of every element sum to zero") {
  const SimplexMesh mesh =
      generate_box_mesh(coords({0, 0, 0}), coords({2, 1, 1}), divs({4, 3, 2}));
  const ElementGeometry geom = compute_geometry(mesh);
  for (Index el = 0; el < mesh.n_elements(); ++el) {
    RowVector sum = RowVector::Zero(mesh.dim);
    for (int i = 0; i <= mesh.dim; ++i) sum += geom.grad(el, i);
    CHECK(sum.norm() < 1e-12);
  }
}

TEST_CASE("element gradients reproduce affine fields exactly") {
  const SimplexMesh mesh = generate_box_mesh(coords({0, 0}), coords({1, 2}), divs({5, 4}));
  const ElementGeometry geom = compute_geometry(mesh);
  NodalField u(mesh.n_nodes());
  for (Index i = 0; i < mesh.n_nodes(); ++i)
    u(i) = 3.0 * mesh.nodes(i, 0) - 2.0 * mesh.nodes(i, 1) + 0.5;
  for (Index el = 0; el < mesh.n_elements(); ++el) {
    const RowVector g = element_gradient(mesh, geom, el, u);
    CHECK(g(0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(g(1) == doctest::Approx(-2.0).epsilon(1e-12));
  }
}

TEST_CASE("node adjacency lists are ascending and consistent") {
  const SimplexMesh mesh = generate_box_mesh(coords({0, 0}), coords({1, 1}), divs({3, 3}));
  REQUIRE(static_cast<Index>(mesh.node_to_elements.size()) == mesh.n_nodes());
  for (Index n = 0; n < mesh.n_nodes(); ++n) {
    const auto& els = mesh.node_to_elements[n];
    for (size_t j = 0; j + 1 < els.size(); ++j) CHECK(els[j] < els[j + 1]);
    for (const int el : els) {
      bool found = false;
      for (int i = 0; i <= mesh.dim; ++i) found = found || mesh.elements(el, i) == n;
      CHECK(found);
    }
  }
}

TEST_CASE("degenerate boxes and zero divisions are rejected") {
  CHECK_THROWS_AS(generate_box_mesh(coords({0, 0}), coords({1, 1}), divs({0, 2})),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_box_mesh(coords({0, 0}), coords({0, 1}), divs({2, 2})),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_box_mesh(coords({0, 0}), coords({1, 1}), divs({2})),
                  std::invalid_argument);
}

TEST_CASE("mesh file round-trip preserves connectivity and volume") {
  const SimplexMesh mesh = generate_box_mesh(coords({0, 0, 0}), coords({1, 1, 1}),
                                             divs({2, 2, 2}));
  TempFile file("roundtrip_cube.mesh");
  write_mesh(mesh, file.path);
  const SimplexMesh back = read_mesh(file.path);

  REQUIRE(back.n_nodes() == mesh.n_nodes());
  REQUIRE(back.n_elements() == mesh.n_elements());
  REQUIRE(back.n_bfaces() == mesh.n_bfaces());
  CHECK(back.elements == mesh.elements);
  CHECK((back.nodes - mesh.nodes).cwiseAbs().maxCoeff() == 0.0);
  const ElementGeometry geom = compute_geometry(back);
  CHECK(geom.volume.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("reader rejects out-of-range node indices with the line number") {
  TempFile file("bad_element.mesh");
  {
    std::ofstream out(file.path);
    out << "2 4 2 4\n0 0\n1 0\n1 1\n0 1\n1 2 99\n1 3 4\n1 2 1\n2 3 1\n3 4 2\n4 1 2\n";
  }
  try {
    read_mesh(file.path);
    FAIL("expected ParseError");
  } catch (const ParseError& err) {
    CHECK(std::string(err.what()).find(":6:") != std::string::npos);
  }
}

TEST_CASE("reader rejects a face that is not part of its element") {
  TempFile file("bad_face.mesh");
  {
    std::ofstream out(file.path);
    // Face (1,3) is the diagonal shared by both triangles, not a boundary edge.
    out << "2 4 2 4\n0 0\n1 0\n1 1\n0 1\n1 2 3\n1 3 4\n1 2 1\n2 3 1\n3 4 2\n1 3 1\n";
  }
  CHECK_THROWS_AS(read_mesh(file.path), ParseError);
}

TEST_CASE("reader rejects truncated files with the header promise") {
  TempFile file("short.mesh");
  {
    std::ofstream out(file.path);
    out << "2 4 2 4\n0 0\n1 0\n1 1\n0 1\n1 2 3\n";
  }
  CHECK_THROWS_AS(read_mesh(file.path), ParseError);
}
