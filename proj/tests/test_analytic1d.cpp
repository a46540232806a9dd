#include "calderon/analytic1d.hpp"

#include <cmath>

#include "calderon/fem.hpp"
#include "doctest.h"

using namespace calderon;

namespace {

LayeredProfile1D four_layers(std::initializer_list<Real> ks) {
  LayeredProfile1D p;
  p.breakpoints = Vector::LinSpaced(5, 0.0, 1.0);
  p.values.resize(4);
  Index i = 0;
  for (const Real k : ks) p.values(i++) = k;
  return p;
}

}  // namespace

TEST_CASE("resistance and current of the uniform bar") {
  const LayeredProfile1D p = four_layers({1, 1, 1, 1});
  CHECK(resistance(p) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(current(p, 1.0, 0.0) == doctest::Approx(-1.0).epsilon(1e-14));
  const Vector u = breakpoint_potentials(p, 1.0, 0.0);
  const Real expected[] = {1.0, 0.75, 0.5, 0.25, 0.0};
  for (Index i = 0; i < 5; ++i) CHECK(u(i) == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("the three classic profiles share every piece of boundary data") {
  const LayeredProfile1D a = four_layers({1, 1, 1, 1});
  const LayeredProfile1D b = four_layers({2, 2, 2.0 / 3.0, 2.0 / 3.0});
  const LayeredProfile1D c = four_layers({10, 5, 2, 10.0 / 32.0});

  for (const LayeredProfile1D* p : {&a, &b, &c}) {
    CHECK((1.0 / p->values.array()).sum() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(resistance(*p) == doctest::Approx(1.0).epsilon(1e-12));
    const EndFluxes f = end_fluxes(*p, 1.0, 0.0);
    CHECK(f.left == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.right == doctest::Approx(-1.0).epsilon(1e-12));
  }

  const Vector ub = breakpoint_potentials(b, 1.0, 0.0);
  const Real expected_b[] = {1.0, 0.875, 0.75, 0.375, 0.0};
  for (Index i = 0; i < 5; ++i)
    CHECK(ub(i) == doctest::Approx(expected_b[i]).epsilon(1e-12));

  const Vector uc = breakpoint_potentials(c, 1.0, 0.0);
  const Real expected_c[] = {1.0, 0.975, 0.925, 0.8, 0.0};
  for (Index i = 0; i < 5; ++i)
    CHECK(uc(i) == doctest::Approx(expected_c[i]).epsilon(1e-12));
}

TEST_CASE("profiles must be ascending and positive") {
  LayeredProfile1D p = four_layers({1, 1, 1, 1});
  p.values(2) = -1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = four_layers({1, 1, 1, 1});
  p.breakpoints(1) = 0.7;
  p.breakpoints(2) = 0.3;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("non-uniqueness families hit the target resistance exactly") {
  const auto family = nonuniqueness_family(1.0, 1.0, 4, 8, 42);
  REQUIRE(family.size() == 8);
  for (const LayeredProfile1D& p : family) {
    CHECK(resistance(p) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.values.minCoeff() >= 0.5 - 1e-12);
    CHECK(p.values.maxCoeff() <= 10.0 + 1e-12);
    const EndFluxes f = end_fluxes(p, 1.0, 0.0);
    CHECK(f.left == doctest::Approx(1.0).epsilon(1e-12));
  }
  // Same seed, same family.
  const auto again = nonuniqueness_family(1.0, 1.0, 4, 8, 42);
  for (size_t i = 0; i < family.size(); ++i)
    CHECK((family[i].values - again[i].values).cwiseAbs().maxCoeff() == 0.0);

  // A resistance no draw inside [k_lo, k_hi] can reach is rejected.
  CHECK_THROWS(nonuniqueness_family(1e6, 1.0, 4, 1, 42));
}

TEST_CASE("sampled profiles feed the 1-D FEM path consistently") {
  const LayeredProfile1D p = four_layers({10, 5, 2, 10.0 / 32.0});
  Vector lower(1), upper(1);
  lower << 0.0;
  upper << 1.0;
  IntVector divisions(1);
  divisions << 4;
  const SimplexMesh mesh = generate_box_mesh(lower, upper, divisions);
  const ElementGeometry geom = compute_geometry(mesh);
  const ElementField k = sample_profile(p, mesh, geom);
  for (Index el = 0; el < 4; ++el) CHECK(k(el) == doctest::Approx(p.values(el)));

  const DirichletData bc = DirichletData::from_pairs({{0, 1.0}, {4, 0.0}});
  const NodalField u = solve_forward(mesh, geom, k, bc);
  const Vector exact = breakpoint_potentials(p, 1.0, 0.0);
  for (Index i = 0; i < 5; ++i) CHECK(u(i) == doctest::Approx(exact(i)).epsilon(1e-10));
}
