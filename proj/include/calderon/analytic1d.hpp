#pragma once

#include "calderon/mesh.hpp"
#include "calderon/types.hpp"

#include <cstdint>
#include <vector>

namespace calderon {

/// Layered conductor on an interval: breakpoints(0..n) ascending,
/// values(i) > 0 on [breakpoints(i), breakpoints(i+1)].
struct LayeredProfile1D {
  Vector breakpoints;
  Vector values;

  void validate() const;
  Index n_layers() const { return values.size(); }
  Real length() const { return breakpoints(breakpoints.size() - 1) - breakpoints(0); }
};

/// Total resistance sum_i (width_i / k_i). Fixing the end potentials,
/// every profile with the same resistance produces the same current and
/// therefore the same boundary data: the layered medium is determined by
/// one scalar only, not layer by layer.
Real resistance(const LayeredProfile1D& profile);

/// Current density k u' (constant in x) for end potentials u_left,
/// u_right: (u_right - u_left) / resistance, positive toward +x.
Real current(const LayeredProfile1D& profile, Real u_left, Real u_right);

/// Exact potential at the layer breakpoints.
Vector breakpoint_potentials(const LayeredProfile1D& profile, Real u_left, Real u_right);

/// Outward normal fluxes k n . u' at the two ends (left normal -1,
/// right normal +1).
struct EndFluxes {
  Real left = 0;
  Real right = 0;
};
EndFluxes end_fluxes(const LayeredProfile1D& profile, Real u_left, Real u_right);

/// count equal-width layered profiles over [0, length], conductivities
/// drawn uniformly from [k_lo, k_hi], each adjusted in its last layer to
/// hit the prescribed total resistance exactly. Draws that cannot be
/// adjusted within the bounds are rejected; gives up after 1000 rejected
/// draws per profile.
std::vector<LayeredProfile1D> nonuniqueness_family(Real target_resistance, Real length,
                                                   int n_layers, int count,
                                                   std::uint64_t seed, Real k_lo = 0.5,
                                                   Real k_hi = 10.0);

/// Element conductivities sampled from the profile at element centroids.
ElementField sample_profile(const LayeredProfile1D& profile, const SimplexMesh& mesh,
                            const ElementGeometry& geom);

}  // namespace calderon
