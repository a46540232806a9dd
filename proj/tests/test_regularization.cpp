#include "calderon/regularization.hpp"

#include <cmath>

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

SimplexMesh reference_triangle() {
  SimplexMesh mesh;
  mesh.dim = 2;
  mesh.nodes.resize(3, 2);
  mesh.nodes << 0, 0, 1, 0, 0, 1;
  mesh.elements.resize(1, 3);
  mesh.elements << 0, 1, 2;
  mesh.bface_nodes.resize(3, 2);
  mesh.bface_nodes << 0, 1, 1, 2, 2, 0;
  finalize_mesh(mesh);
  return mesh;
}

// Element field alternating +-1 in a checkerboard over the structured
// square, the roughest mesh-scale field the smoothers must damp.
ElementField checkerboard(const SimplexMesh& mesh, const ElementGeometry& geom, Real cell) {
  ElementField g(mesh.n_elements());
  for (Index el = 0; el < g.size(); ++el) {
    const int ix = static_cast<int>(std::floor(geom.centroid(el, 0) / cell));
    const int iy = static_cast<int>(std::floor(geom.centroid(el, 1) / cell));
    g(el) = ((ix + iy) % 2 == 0) ? 1.0 : -1.0;
  }
  return g;
}

}  // namespace

TEST_CASE("patch averaging: constants, bounds, and the 1-D midpoint") {
  const SimplexMesh bar = generate_box_mesh(coords({0}), coords({1}), divs({2}));
  const ElementGeometry bar_geom = compute_geometry(bar);
  ElementField two(2);
  two << 1.0, 2.0;
  const NodalField nodal = elements_to_points(bar, bar_geom, two);
  CHECK(nodal(1) == doctest::Approx(1.5).epsilon(1e-14));

  const SimplexMesh mesh = generate_box_mesh(coords({0, 0}), coords({1, 1}), divs({4, 4}));
  const ElementGeometry geom = compute_geometry(mesh);
  const NodalField of_const =
      elements_to_points(mesh, geom, ElementField::Constant(mesh.n_elements(), 3.25));
  CHECK((of_const.array() - 3.25).abs().maxCoeff() < 1e-14);

  ElementField ramp(mesh.n_elements());
  for (Index el = 0; el < ramp.size(); ++el) ramp(el) = geom.centroid(el, 0);
  const NodalField averaged = elements_to_points(mesh, geom, ramp);
  CHECK(averaged.minCoeff() >= ramp.minCoeff() - 1e-14);
  CHECK(averaged.maxCoeff() <= ramp.maxCoeff() + 1e-14);
}

TEST_CASE("patch-average smoothing keeps constants and damps checkerboards") {
  const SimplexMesh mesh = generate_box_mesh(coords({0, 0}), coords({1, 1}), divs({8, 8}));
  const ElementGeometry geom = compute_geometry(mesh);

  const ElementField c = ElementField::Constant(mesh.n_elements(), 2.0);
  CHECK((smooth_spea(mesh, geom, c, 3).array() - 2.0).abs().maxCoeff() < 1e-12);

  const ElementField rough = checkerboard(mesh, geom, 1.0 / 8.0);
  const ElementField once = smooth_spea(mesh, geom, rough, 1);
  CHECK(once.cwiseAbs().maxCoeff() < rough.cwiseAbs().maxCoeff());
  CHECK(once.cwiseAbs().maxCoeff() <= 1.0 + 1e-10);

  CHECK_THROWS_AS(smooth_spea(mesh, geom, rough, 0), std::invalid_argument);
}

TEST_CASE("mass matrices of the reference triangle") {
  const SimplexMesh mesh = reference_triangle();
  const ElementGeometry geom = compute_geometry(mesh);
  const MassMatrices mass = assemble_mass(mesh, geom);
  const Matrix dense = Matrix(mass.consistent);
  Matrix expected(3, 3);
  expected << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  expected /= 24.0;
  CHECK((dense - expected).cwiseAbs().maxCoeff() < 1e-14);
  for (Index i = 0; i < 3; ++i)
    CHECK(mass.lumped(i) == doctest::Approx(dense.row(i).sum()).epsilon(1e-12));
  CHECK(mass.lumped.sum() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("mass row sums equal the lumped diagonal on a tet mesh") {
  const SimplexMesh mesh =
      generate_box_mesh(coords({0, 0, 0}), coords({1, 1, 1}), divs({2, 2, 2}));
  const ElementGeometry geom = compute_geometry(mesh);
  const MassMatrices mass = assemble_mass(mesh, geom);
  const Vector row_sums = mass.consistent * Vector::Ones(mesh.n_nodes());
  CHECK((row_sums - mass.lumped).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(mass.lumped.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("H1 smoothing is the identity at lambda zero and keeps constants") {
  const SimplexMesh mesh = generate_box_mesh(coords({0, 0}), coords({1, 1}), divs({6, 6}));
  const ElementGeometry geom = compute_geometry(mesh);
  NodalField g(mesh.n_nodes());
  for (Index i = 0; i < g.size(); ++i)
    g(i) = std::sin(5.0 * mesh.nodes(i, 0)) + mesh.nodes(i, 1);

  const NodalField same = smooth_h1(mesh, geom, g, 0.0);
  CHECK((same - g).cwiseAbs().maxCoeff() < 1e-12);

  const NodalField of_const =
      smooth_h1(mesh, geom, NodalField::Constant(mesh.n_nodes(), 4.0), 0.3);
  CHECK((of_const.array() - 4.0).abs().maxCoeff() < 1e-12);

  const NodalField smoothed = smooth_h1(mesh, geom, g, 0.1);
  CHECK(smoothed.maxCoeff() <= g.maxCoeff() + 1e-10);
  CHECK(smoothed.minCoeff() >= g.minCoeff() - 1e-10);
}

TEST_CASE("pseudo-Laplacian smoothing keeps constants and damps checkerboards") {
  const SimplexMesh mesh = generate_box_mesh(coords({0, 0}), coords({1, 1}), divs({8, 8}));
  const ElementGeometry geom = compute_geometry(mesh);

  const NodalField of_const =
      smooth_pseudo_laplacian(mesh, geom, NodalField::Constant(mesh.n_nodes(), -1.5), 0.05);
  CHECK((of_const.array() + 1.5).abs().maxCoeff() < 1e-12);

  NodalField rough(mesh.n_nodes());
  for (Index i = 0; i < rough.size(); ++i) {
    const int ix = static_cast<int>(std::lround(mesh.nodes(i, 0) * 8));
    const int iy = static_cast<int>(std::lround(mesh.nodes(i, 1) * 8));
    rough(i) = ((ix + iy) % 2 == 0) ? 1.0 : -1.0;
  }
  const NodalField smoothed = smooth_pseudo_laplacian(mesh, geom, rough, 0.05);
  CHECK(smoothed.cwiseAbs().maxCoeff() < rough.cwiseAbs().maxCoeff());
}

TEST_CASE("relaxation on the identity contracts geometrically") {
  SparseOperator eye(5, 5);
  eye.setIdentity();
  const Vector rhs = Vector::LinSpaced(5, 1.0, 5.0);
  // u <- u + 0.8 (rhs - u): error shrinks by exactly 0.2 per step.
  const NodalField u = relax_solve(eye, rhs, Vector::Zero(5), 0.8, 3);
  const Real expected_factor = 1.0 - std::pow(0.2, 3);
  CHECK((u - expected_factor * rhs).cwiseAbs().maxCoeff() < 1e-14);

  CHECK_THROWS_AS(relax_solve(eye, rhs, Vector::Zero(5), 0.8, 0), std::invalid_argument);
}

TEST_CASE("relaxation aborts when the residual keeps growing") {
  // Off-diagonally dominant operator with a negative eigenvalue: the
  // Jacobi iteration matrix has spectral radius above one and diverges.
  SparseOperator bad(2, 2);
  std::vector<Triplet> trips = {{0, 0, 1.0}, {0, 1, 2.0}, {1, 0, 2.0}, {1, 1, 1.0}};
  bad.setFromTriplets(trips.begin(), trips.end());
  const Vector rhs = Vector::Ones(2);
  CHECK_THROWS_AS(relax_solve(bad, rhs, Vector::Zero(2), 0.8, 50), SolverError);
}

TEST_CASE("relaxed pseudo-Laplacian solve approaches the direct one") {
  const SimplexMesh mesh = generate_box_mesh(coords({0, 0}), coords({1, 1}), divs({8, 8}));
  const ElementGeometry geom = compute_geometry(mesh);
  const MassMatrices mass = assemble_mass(mesh, geom);
  SparseOperator L = mass.consistent;
  SparseOperator lumped_minus(L.rows(), L.cols());
  std::vector<Triplet> trips;
  for (Index i = 0; i < mass.lumped.size(); ++i)
    trips.emplace_back(static_cast<int>(i), static_cast<int>(i), mass.lumped(i));
  lumped_minus.setFromTriplets(trips.begin(), trips.end());
  L = mass.consistent + 0.05 * (lumped_minus - mass.consistent);

  NodalField g(mesh.n_nodes());
  for (Index i = 0; i < g.size(); ++i) g(i) = std::cos(4.0 * mesh.nodes(i, 0));
  const Vector rhs = mass.consistent * g;

  const NodalField direct = smooth_pseudo_laplacian(mesh, geom, g, 0.05);
  const NodalField relaxed = relax_solve(L, rhs, g, 0.8, 400);
  CHECK((relaxed - direct).cwiseAbs().maxCoeff() <= 1e-8 * direct.cwiseAbs().maxCoeff());

  // The paper's operating point: 10 steps already cut the residual well
  // below its starting value.
  const NodalField ten = relax_solve(L, rhs, g, 0.8, 10);
  const Real r0 = (rhs - L * g).norm();
  const Real r10 = (rhs - L * ten).norm();
  CHECK(r10 < 0.1 * r0);
}

TEST_CASE("lattice regions partition the mesh x-fastest") {
  const SimplexMesh mesh = generate_box_mesh(coords({0, 0}), coords({1, 1}), divs({4, 4}));
  const ElementGeometry geom = compute_geometry(mesh);
  const RegionMap regions = make_lattice_regions(mesh, geom, divs({2, 2}));
  regions.validate(mesh);
  CHECK(regions.n_regions == 4);
  CHECK(regions.region_volume.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(regions.region_volume.minCoeff() > 0);

  // Element at centroid (0.1, 0.1) is region 0; (0.9, 0.1) region 1;
  // (0.1, 0.9) region 2 (x runs fastest).
  for (Index el = 0; el < mesh.n_elements(); ++el) {
    const bool right = geom.centroid(el, 0) > 0.5;
    const bool top = geom.centroid(el, 1) > 0.5;
    const int expected = (top ? 2 : 0) + (right ? 1 : 0);
    CHECK(regions.element_region[el] == expected);
  }
}

TEST_CASE("region projection is a left inverse of expansion") {
  const SimplexMesh mesh = generate_box_mesh(coords({0, 0}), coords({1, 1}), divs({5, 5}));
  const ElementGeometry geom = compute_geometry(mesh);
  const RegionMap regions = make_lattice_regions(mesh, geom, divs({5, 5}));

  Vector kappa = Vector::LinSpaced(regions.n_regions, 0.5, 3.0);
  const ElementField field = expand_regions(regions, kappa);
  // Volume-weighted element values project back to the region values.
  const Vector back =
      project_gradient(ElementField(field.array() * geom.volume.array()), regions);
  CHECK((back - kappa).cwiseAbs().maxCoeff() < 1e-12);

  // A constant density projects to that constant in every region.
  const Vector of_const =
      project_gradient(ElementField(geom.volume * 2.5), regions);
  CHECK((of_const.array() - 2.5).abs().maxCoeff() < 1e-12);
}

TEST_CASE("region maps reject bad assignments and empty lattice boxes") {
  const SimplexMesh mesh = generate_box_mesh(coords({0, 0}), coords({1, 1}), divs({2, 2}));
  const ElementGeometry geom = compute_geometry(mesh);
  RegionMap bad = make_lattice_regions(mesh, geom, divs({2, 2}));
  bad.element_region[0] = 99;
  CHECK_THROWS_AS(bad.validate(mesh), std::invalid_argument);
  bad.element_region.pop_back();
  CHECK_THROWS_AS(bad.validate(mesh), std::invalid_argument);

  // Too fine a lattice leaves empty boxes and is rejected outright.
  CHECK_THROWS_AS(make_lattice_regions(mesh, geom, divs({50, 50})),
                  std::invalid_argument);
}

TEST_CASE("gradient smoother pipeline preserves constant densities") {
  const SimplexMesh mesh = generate_box_mesh(coords({0, 0}), coords({1, 1}), divs({6, 6}));
  const ElementGeometry geom = compute_geometry(mesh);
  // A constant gradient density corresponds to the volume-proportional
  // element gradient; the smoothing kinds must hand the density back.
  const ElementField g = 3.0 * geom.volume;

  for (const SmoothingKind kind :
       {SmoothingKind::spea, SmoothingKind::h1, SmoothingKind::pseudo_laplacian}) {
    SmoothingConfig config;
    config.kind = kind;
    const GradientSmoother smoother(mesh, geom, config);
    const ElementField s = smoother.smooth_gradient(g);
    CHECK((s.array() - 3.0).abs().maxCoeff() < 1e-12);
  }

  SmoothingConfig off;
  off.kind = SmoothingKind::none;
  const ElementField raw = GradientSmoother(mesh, geom, off).smooth_gradient(g);
  CHECK((raw - g).cwiseAbs().maxCoeff() == 0.0);
}
