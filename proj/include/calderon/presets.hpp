#pragma once

#include "calderon/config.hpp"
#include "calderon/inversion.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace calderon {

/// One fully assembled experiment: mesh, target conductivity, synthetic
/// measurements, and the optimizer configuration. Built from a named
/// preset plus config overrides.
struct ExperimentSetup {
  enum class Mode { element_adjoint, region_fd, region_projected, parametric_disk };

  std::string name;
  SimplexMesh mesh;
  ElementGeometry geom;
  TargetSpec target;
  ElementField k_target;
  std::vector<std::uint8_t> mask;  // faces entering cost and Dirichlet data
  std::vector<Measurement> measurements;
  DescentConfig descent;
  Mode mode = Mode::element_adjoint;
  IntVector region_divisions;  // used by the region modes
  Real k0 = 1.0;
  DiskParameters disk_initial;
  Real disk_background = 1.0;
  std::uint64_t seed = 0;
};

/// Catalog: square-constant, square-linear, square-gaussian, square-disk,
/// cube-gaussian, three-region-2d. (The 1-D non-uniqueness demo is a
/// separate command; it has no mesh inversion.) Square experiments run on
/// a thin structured slab [0,1]^2 x [0,0.05] whose z-normal walls are
/// insulated and excluded from the data; three-region-2d runs on a
/// genuinely 2-D mesh of [0,3] x [0,1].
std::vector<std::string> preset_names();

ExperimentSetup build_preset(const std::string& name, const Config& config);

}  // namespace calderon
