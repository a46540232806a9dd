#include "calderon/analytic1d.hpp"

#include <random>
#include <string>

namespace calderon {

void LayeredProfile1D::validate() const {
  if (breakpoints.size() < 2 || values.size() != breakpoints.size() - 1)
    throw std::invalid_argument("profile needs n+1 breakpoints for n layers");
  for (Index i = 0; i + 1 < breakpoints.size(); ++i)
    if (!(breakpoints(i + 1) > breakpoints(i)))
      throw std::invalid_argument("breakpoints must be strictly increasing");
  for (Index i = 0; i < values.size(); ++i)
    if (!(values(i) > 0))
      throw std::invalid_argument("layer conductivity must be positive (layer " +
                                  std::to_string(i) + ")");
}

Real resistance(const LayeredProfile1D& profile) {
  profile.validate();
  Real r = 0;
  for (Index i = 0; i < profile.values.size(); ++i)
    r += (profile.breakpoints(i + 1) - profile.breakpoints(i)) / profile.values(i);
  return r;
}

Real current(const LayeredProfile1D& profile, Real u_left, Real u_right) {
  return (u_right - u_left) / resistance(profile);
}

Vector breakpoint_potentials(const LayeredProfile1D& profile, Real u_left, Real u_right) {
  const Real c = current(profile, u_left, u_right);
  Vector u(profile.breakpoints.size());
  u(0) = u_left;
  for (Index i = 0; i < profile.values.size(); ++i)
    u(i + 1) = u(i) + c * (profile.breakpoints(i + 1) - profile.breakpoints(i)) / profile.values(i);
  return u;
}

EndFluxes end_fluxes(const LayeredProfile1D& profile, Real u_left, Real u_right) {
  const Real c = current(profile, u_left, u_right);
  return {-c, c};
}

std::vector<LayeredProfile1D> nonuniqueness_family(Real target_resistance, Real length,
                                                   int n_layers, int count,
                                                   std::uint64_t seed, Real k_lo, Real k_hi) {
  if (!(target_resistance > 0) || !(length > 0) || n_layers < 1 || count < 1)
    throw std::invalid_argument("resistance, length, layer and profile counts must be positive");
  if (!(k_lo > 0) || !(k_hi > k_lo))
    throw std::invalid_argument("conductivity bounds must satisfy 0 < k_lo < k_hi");
  const Real width = length / n_layers;
  if (n_layers == 1 &&
      (width / k_hi > target_resistance || width / k_lo < target_resistance))
    throw std::invalid_argument("single layer cannot reach the target resistance within bounds");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Real> draw(k_lo, k_hi);
  std::vector<LayeredProfile1D> family;
  family.reserve(count);
  for (int p = 0; p < count; ++p) {
    LayeredProfile1D profile;
    profile.breakpoints = Vector::LinSpaced(n_layers + 1, 0.0, length);
    profile.values.resize(n_layers);
    bool accepted = false;
    for (int attempt = 0; attempt < 1000 && !accepted; ++attempt) {
      Real partial = 0;
      for (int i = 0; i + 1 < n_layers; ++i) {
        profile.values(i) = draw(rng);
        partial += width / profile.values(i);
      }
      const Real remaining = target_resistance - partial;
      if (remaining <= 0) continue;
      const Real k_last = width / remaining;
      if (k_last < k_lo || k_last > k_hi) continue;
      profile.values(n_layers - 1) = k_last;
      accepted = true;
    }
    if (!accepted)
      throw std::runtime_error(
          "could not draw a profile matching the target resistance in 1000 attempts; "
          "widen the conductivity bounds or change the target");
    family.push_back(profile);
  }
  return family;
}

ElementField sample_profile(const LayeredProfile1D& profile, const SimplexMesh& mesh,
                            const ElementGeometry& geom) {
  profile.validate();
  if (mesh.dim != 1) throw std::invalid_argument("profile sampling requires a 1-D mesh");
  ElementField k(mesh.n_elements());
  for (Index el = 0; el < mesh.n_elements(); ++el) {
    const Real x = geom.centroid(el, 0);
    Index layer = 0;
    while (layer + 1 < profile.values.size() && x >= profile.breakpoints(layer + 1)) ++layer;
    k(el) = profile.values(layer);
  }
  return k;
}

}  // namespace calderon
