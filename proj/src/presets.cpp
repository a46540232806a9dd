#include "calderon/presets.hpp"

#include <algorithm>
#include <cmath>

namespace calderon {

namespace {

Vector vec2(Real x, Real y) {
  Vector v(2);
  v << x, y;
  return v;
}

Vector vec3(Real x, Real y, Real z) {
  Vector v(3);
  v << x, y, z;
  return v;
}

PointSource source(const Vector& center, Real amplitude) {
  return PointSource{center, 0.5, amplitude};
}

// Source/sink pairs of the square experiments (in-plane coordinates).
// Pairs 1 and 2 sit at opposite edge midpoints; pairs 3 and 4 at opposite
// corners so that up to four independent excitations are available.
std::vector<std::vector<PointSource>> square_sources() {
  return {
      {source(vec2(0.5, 0.0), 1.0), source(vec2(0.5, 1.0), -1.0)},
      {source(vec2(0.0, 0.5), 1.0), source(vec2(1.0, 0.5), -1.0)},
      {source(vec2(0.0, 0.0), 1.0), source(vec2(1.0, 1.0), -1.0)},
      {source(vec2(1.0, 0.0), 1.0), source(vec2(0.0, 1.0), -1.0)},
  };
}

// One source/sink pair per axis at opposite face centers of the unit
// cube, driving flux mainly along x, y, z respectively.
std::vector<std::vector<PointSource>> cube_sources() {
  return {
      {source(vec3(0.0, 0.5, 0.5), 1.0), source(vec3(1.0, 0.5, 0.5), -1.0)},
      {source(vec3(0.5, 0.0, 0.5), 1.0), source(vec3(0.5, 1.0, 0.5), -1.0)},
      {source(vec3(0.5, 0.5, 0.0), 1.0), source(vec3(0.5, 0.5, 1.0), -1.0)},
  };
}

struct PresetDefaults {
  Vector lower, upper;
  IntVector divisions;
  bool slab = false;  // exclude z-normal walls from data and cost
  int n_measurements = 2;
  int max_measurements = 4;
  std::string dofs = "element";
  std::string gradient = "fd";  // region modes: fd or projected
  TargetSpec target;
  Real alpha = 0.25;         // element-adjoint step on the smoothed density
  Real region_alpha = 2.0;   // region step on the derivative density
  int max_iterations = 50;
  Real cost_tol_rel = 1e-5;
  Real step_tol_rel = 0.0;
  SmoothingKind smoothing = SmoothingKind::pseudo_laplacian;
  Real lambda_h1 = 1e-3;
};

const char* smoothing_name(SmoothingKind kind) {
  switch (kind) {
    case SmoothingKind::none: return "none";
    case SmoothingKind::spea: return "spea";
    case SmoothingKind::h1: return "h1";
    case SmoothingKind::pseudo_laplacian: return "pseudo-laplacian";
  }
  return "pseudo-laplacian";
}

IntVector intvec(std::initializer_list<int> values) {
  IntVector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (const int x : values) v(i++) = x;
  return v;
}

PresetDefaults defaults_for(const std::string& name) {
  PresetDefaults d;
  d.lower = vec3(0, 0, 0);
  d.upper = vec3(1, 1, 0.05);
  d.divisions = intvec({20, 20, 1});
  d.slab = true;
  if (name == "square-constant") {
    d.target.kind = TargetSpec::Kind::constant;
    d.target.base = 2.0;
    // Wide-reach smoothing: the flux mismatch alone fits the boundary
    // region first, the diffusion carries the update into the interior.
    d.smoothing = SmoothingKind::h1;
    d.lambda_h1 = 0.1;
    d.alpha = 0.5;
    d.cost_tol_rel = 1e-6;
  } else if (name == "square-linear") {
    d.target.kind = TargetSpec::Kind::linear;
    d.target.base = 2.0;
    d.target.slope = -1.0;
    d.n_measurements = 4;
    d.max_measurements = 4;
    d.smoothing = SmoothingKind::h1;
    d.lambda_h1 = 0.1;
    d.alpha = 0.5;
    d.cost_tol_rel = 1e-6;
  } else if (name == "square-gaussian") {
    d.divisions = intvec({30, 30, 1});
    d.target.kind = TargetSpec::Kind::gaussian;
    d.target.base = 1.0;
    d.target.amplitude = 4.0;
    d.target.center = vec2(0.5, 0.5);
    d.target.radius = 0.2;
    d.n_measurements = 4;
    d.max_measurements = 4;
    d.max_iterations = 80;
    d.cost_tol_rel = 1e-6;
    d.gradient = "projected";
  } else if (name == "square-disk") {
    d.target.kind = TargetSpec::Kind::disk;
    d.target.base = 1.0;
    d.target.inside = 5.0;
    d.target.center = vec2(0.5, 0.5);
    d.target.radius = 0.25;
    // The centroid-sampled disk boundary makes the reduced cost bumpy at
    // the element scale; this resolution keeps its valley monotone.
    d.divisions = intvec({40, 40, 1});
    d.alpha = 0.5;
    d.max_iterations = 300;
    d.step_tol_rel = 1e-3;
    d.cost_tol_rel = 0.0;
  } else if (name == "cube-gaussian") {
    d.lower = vec3(0, 0, 0);
    d.upper = vec3(1, 1, 1);
    d.divisions = intvec({12, 12, 12});
    d.slab = false;
    d.target.kind = TargetSpec::Kind::gaussian;
    d.target.base = 1.0;
    d.target.amplitude = 4.0;
    d.target.center = vec3(0.5, 0.5, 0.05);
    d.target.radius = 0.2;
    d.n_measurements = 3;
    d.max_measurements = 3;
    d.dofs = "125";
    d.max_iterations = 30;
    d.cost_tol_rel = 1e-4;
  } else if (name == "three-region-2d") {
    d.lower = vec2(0, 0);
    d.upper = vec2(3, 1);
    d.divisions = intvec({30, 10});
    d.slab = false;
    d.target.kind = TargetSpec::Kind::three_region;
    d.target.breaks = vec2(1.0, 2.0);
    d.target.levels = vec3(1.0, 10.1, 1.0);
    d.n_measurements = 1;
    d.max_measurements = 1;
    d.dofs = "3";
    d.max_iterations = 60;
    d.cost_tol_rel = 1e-6;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'; available: square-constant, " +
                                "square-linear, square-gaussian, square-disk, cube-gaussian, " +
                                "three-region-2d, oned-demo");
  }
  return d;
}

// Region lattice for a requested degree-of-freedom count: n x n (x 1 on
// slabs) in-plane for squares, n x n x n for the cube, thirds-in-x for
// the three-region case.
IntVector region_lattice(const std::string& name, int dofs, int dim, bool slab) {
  if (name == "three-region-2d") {
    if (dofs != 3) throw std::invalid_argument("three-region-2d supports dofs=3 only");
    return intvec({3, 1});
  }
  if (slab) {
    const int n = static_cast<int>(std::lround(std::sqrt(Real(dofs))));
    if (n * n != dofs)
      throw std::invalid_argument("square presets need a square dof count (e.g. 25, 49)");
    return intvec({n, n, 1});
  }
  if (dim == 3) {
    const int n = static_cast<int>(std::lround(std::cbrt(Real(dofs))));
    if (n * n * n != dofs)
      throw std::invalid_argument("cube presets need a cubic dof count (e.g. 125)");
    return intvec({n, n, n});
  }
  throw std::invalid_argument("no region lattice rule for this preset");
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"square-constant", "square-linear",  "square-gaussian", "square-disk",
          "cube-gaussian",   "three-region-2d"};
}

ExperimentSetup build_preset(const std::string& name, const Config& config) {
  PresetDefaults d = defaults_for(name);

  ExperimentSetup setup;
  setup.name = name;
  setup.seed = static_cast<std::uint64_t>(config.get_int("run.seed", 20260819));

  const IntVector divisions = [&] {
    const Vector v = config.get_vector("mesh.divisions", d.divisions.cast<Real>());
    IntVector iv(v.size());
    for (Index i = 0; i < v.size(); ++i) iv(i) = static_cast<int>(std::lround(v(i)));
    return iv;
  }();
  const Vector lower = config.get_vector("mesh.box_lower", d.lower);
  const Vector upper = config.get_vector("mesh.box_upper", d.upper);
  if (divisions.size() != lower.size() || divisions.size() != upper.size())
    throw std::invalid_argument("mesh.divisions and box bounds must share one dimension");
  setup.mesh = generate_box_mesh(lower, upper, divisions);
  setup.geom = compute_geometry(setup.mesh);

  setup.target = d.target;
  setup.target.base = config.get_real("target.base", d.target.base);
  setup.target.slope = config.get_real("target.slope", d.target.slope);
  setup.target.radius = config.get_real("target.radius", d.target.radius);
  setup.target.amplitude = config.get_real("target.amplitude", d.target.amplitude);
  setup.target.inside = config.get_real("target.inside", d.target.inside);
  if (d.target.center.size() > 0)
    setup.target.center = config.get_vector("target.center", d.target.center);
  setup.k_target = build_target(setup.mesh, setup.geom, setup.target);

  setup.mask = measurement_mask(setup.mesh, d.slab);

  const int n_meas = config.get_int("measurements.count", d.n_measurements);
  if (n_meas < 1 || n_meas > d.max_measurements)
    throw std::invalid_argument("preset '" + name + "' supports 1.." +
                                std::to_string(d.max_measurements) + " measurements");
  setup.descent.solver.rel_tol = config.get_real("solver.rel_tol", 1e-10);
  setup.descent.solver.max_iter_factor = config.get_int("solver.max_iter_factor", 10);

  if (name == "three-region-2d") {
    const auto u0 = [](const RowVector& x) {
      return x(0) <= 1.0 ? (x(1) - 0.5) * (x(0) - 1.0) * (x(0) - 1.0) : 0.0;
    };
    setup.measurements.push_back(build_measurement_from_function(
        setup.mesh, setup.geom, setup.k_target, 1, u0, setup.mask, setup.descent.solver));
  } else {
    const auto catalog = setup.mesh.dim == 3 && !d.slab ? cube_sources() : square_sources();
    for (int m = 0; m < n_meas; ++m)
      setup.measurements.push_back(build_measurement(setup.mesh, setup.geom, setup.k_target,
                                                     m + 1, catalog[m], setup.mask,
                                                     setup.descent.solver));
  }

  setup.k0 = config.get_real("descent.k0", 1.0);
  setup.descent.backtrack = config.get_bool("descent.backtrack", true);
  setup.descent.max_iterations = config.get_int("descent.max_iterations", d.max_iterations);
  setup.descent.k_min = config.get_real("descent.k_min", 1e-3);
  setup.descent.cost_tol_rel = config.get_real("descent.cost_tol_rel", d.cost_tol_rel);
  setup.descent.cost_tol_abs = config.get_real("descent.cost_tol_abs", 1e-18);
  setup.descent.step_tol_rel = config.get_real("descent.step_tol_rel", d.step_tol_rel);
  setup.descent.fd_step_rel = config.get_real("descent.fd_step_rel", 1e-4);

  const std::string smoothing = config.get_string("smoothing.kind", smoothing_name(d.smoothing));
  if (smoothing == "none")
    setup.descent.smoothing.kind = SmoothingKind::none;
  else if (smoothing == "spea")
    setup.descent.smoothing.kind = SmoothingKind::spea;
  else if (smoothing == "h1")
    setup.descent.smoothing.kind = SmoothingKind::h1;
  else if (smoothing == "pseudo-laplacian")
    setup.descent.smoothing.kind = SmoothingKind::pseudo_laplacian;
  else
    throw std::invalid_argument("unknown smoothing.kind '" + smoothing + "'");
  setup.descent.smoothing.lambda_pl = config.get_real("smoothing.lambda_pl", 0.05);
  setup.descent.smoothing.lambda_h1 = config.get_real("smoothing.lambda_h1", d.lambda_h1);
  setup.descent.smoothing.relaxed = config.get_bool("smoothing.relaxed", true);
  setup.descent.smoothing.dtau = config.get_real("smoothing.dtau", 0.8);
  setup.descent.smoothing.relax_steps = config.get_int("smoothing.steps", 10);
  setup.descent.smoothing.spea_passes = config.get_int("smoothing.spea_passes", 1);

  if (name == "square-disk") {
    setup.mode = ExperimentSetup::Mode::parametric_disk;
    setup.disk_initial.x = config.get_real("disk.x", 0.25);
    setup.disk_initial.y = config.get_real("disk.y", 0.25);
    setup.disk_initial.radius = config.get_real("disk.radius", 0.1);
    setup.disk_initial.k = config.get_real("disk.k", 2.0);
    setup.disk_background = config.get_real("disk.background", 1.0);
  } else {
    const std::string dofs = config.get_string("regions.dofs", d.dofs);
    if (dofs == "element") {
      setup.mode = ExperimentSetup::Mode::element_adjoint;
    } else {
      int count = 0;
      try {
        count = std::stoi(dofs);
      } catch (const std::exception&) {
        throw std::invalid_argument("regions.dofs must be 'element' or a region count");
      }
      setup.region_divisions = region_lattice(name, count, setup.mesh.dim, d.slab);
      const std::string gradient = config.get_string("regions.gradient", d.gradient);
      if (gradient == "fd")
        setup.mode = ExperimentSetup::Mode::region_fd;
      else if (gradient == "projected")
        setup.mode = ExperimentSetup::Mode::region_projected;
      else
        throw std::invalid_argument("regions.gradient must be 'fd' or 'projected'");
    }
  }

  const bool region_mode = setup.mode == ExperimentSetup::Mode::region_fd ||
                           setup.mode == ExperimentSetup::Mode::region_projected;
  setup.descent.alpha =
      config.get_real("descent.alpha", region_mode ? d.region_alpha : d.alpha);
  return setup;
}

}  // namespace calderon
