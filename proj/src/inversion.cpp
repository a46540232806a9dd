#include "calderon/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <tuple>

namespace calderon {

namespace {

constexpr Real kNaN = std::numeric_limits<Real>::quiet_NaN();

Real centroid_distance(const ElementGeometry& geom, Index el, const Vector& center) {
  if (center.size() < 1 || center.size() > geom.centroid.cols())
    throw std::invalid_argument("center dimensionality exceeds the mesh dimension");
  Real d2 = 0;
  for (Index a = 0; a < center.size(); ++a) {
    const Real dx = geom.centroid(el, a) - center(a);
    d2 += dx * dx;
  }
  return std::sqrt(d2);
}

Real piecewise_level(const TargetSpec& spec, Real x) {
  Index i = 0;
  while (i < spec.breaks.size() && x >= spec.breaks(i)) ++i;
  return spec.levels(i);
}

}  // namespace

ElementField build_target(const SimplexMesh& mesh, const ElementGeometry& geom,
                          const TargetSpec& spec) {
  ElementField k(mesh.n_elements());
  switch (spec.kind) {
    case TargetSpec::Kind::constant:
      if (!(spec.base > 0)) throw std::invalid_argument("constant conductivity must be positive");
      k.setConstant(spec.base);
      break;
    case TargetSpec::Kind::linear:
      for (Index el = 0; el < mesh.n_elements(); ++el)
        k(el) = spec.base + spec.slope * geom.centroid(el, 0);
      break;
    case TargetSpec::Kind::gaussian: {
      if (!(spec.radius > 0)) throw std::invalid_argument("gaussian radius must be positive");
      for (Index el = 0; el < mesh.n_elements(); ++el) {
        const Real d = centroid_distance(geom, el, spec.center) / spec.radius;
        k(el) = spec.base + spec.amplitude * std::exp(-d * d);
      }
      break;
    }
    case TargetSpec::Kind::disk: {
      if (mesh.dim == 1) throw std::invalid_argument("disk target needs a 2-D or 3-D mesh");
      if (!(spec.radius > 0)) throw std::invalid_argument("disk radius must be positive");
      if (!(spec.inside > 0) || !(spec.base > 0))
        throw std::invalid_argument("disk conductivities must be positive");
      for (Index el = 0; el < mesh.n_elements(); ++el)
        k(el) = centroid_distance(geom, el, spec.center) <= spec.radius ? spec.inside : spec.base;
      break;
    }
    case TargetSpec::Kind::piecewise_x:
    case TargetSpec::Kind::three_region: {
      if (spec.levels.size() != spec.breaks.size() + 1)
        throw std::invalid_argument("piecewise target needs one more level than breaks");
      for (Index el = 0; el < mesh.n_elements(); ++el)
        k(el) = piecewise_level(spec, geom.centroid(el, 0));
      break;
    }
  }
  for (Index el = 0; el < mesh.n_elements(); ++el)
    if (!(k(el) > 0))
      throw std::invalid_argument("target conductivity is not positive on element " +
                                  std::to_string(el));
  return k;
}

Real eval_sources(const std::vector<PointSource>& sources, const RowVector& x) {
  Real value = 0;
  for (const PointSource& s : sources) {
    if (!(s.radius > 0)) throw std::invalid_argument("source radius must be positive");
    if (s.center.size() < 1 || s.center.size() > x.size())
      throw std::invalid_argument("source center dimensionality exceeds the mesh dimension");
    Real d2 = 0;
    for (Index a = 0; a < s.center.size(); ++a) {
      const Real dx = x(a) - s.center(a);
      d2 += dx * dx;
    }
    value += s.amplitude * std::exp(-d2 / (s.radius * s.radius));
  }
  return value;
}

std::vector<std::uint8_t> measurement_mask(const SimplexMesh& mesh, bool exclude_z_walls) {
  std::vector<std::uint8_t> mask(mesh.n_bfaces(), 1);
  if (!exclude_z_walls) return mask;
  if (mesh.dim != 3)
    throw std::invalid_argument("z-wall exclusion applies to 3-D slab meshes only");
  for (Index f = 0; f < mesh.n_bfaces(); ++f)
    if (std::abs(mesh.bface_normal(f, 2)) > 0.5) mask[f] = 0;
  return mask;
}

std::vector<int> mask_nodes(const SimplexMesh& mesh, const std::vector<std::uint8_t>& mask) {
  if (static_cast<Index>(mask.size()) != mesh.n_bfaces())
    throw std::invalid_argument("face mask must have one flag per boundary face");
  std::set<int> ids;
  for (Index f = 0; f < mesh.n_bfaces(); ++f)
    if (mask[f])
      for (int i = 0; i < mesh.dim; ++i) ids.insert(mesh.bface_nodes(f, i));
  return {ids.begin(), ids.end()};
}

Measurement build_measurement_from_function(const SimplexMesh& mesh,
                                            const ElementGeometry& geom,
                                            const ElementField& k_target, int id,
                                            const std::function<Real(const RowVector&)>& u0,
                                            const std::vector<std::uint8_t>& mask,
                                            const SolverOptions& opts) {
  Measurement m;
  m.id = id;
  m.active = mask;
  m.dirichlet.nodes = mask_nodes(mesh, mask);
  m.dirichlet.values.resize(static_cast<Index>(m.dirichlet.nodes.size()));
  for (Index i = 0; i < m.dirichlet.values.size(); ++i)
    m.dirichlet.values(i) = u0(mesh.nodes.row(m.dirichlet.nodes[i]));
  const NodalField u = solve_forward(mesh, geom, k_target, m.dirichlet, opts);
  m.target_flux = boundary_normal_flux(mesh, geom, k_target, u);
  return m;
}

Measurement build_measurement(const SimplexMesh& mesh, const ElementGeometry& geom,
                              const ElementField& k_target, int id,
                              const std::vector<PointSource>& sources,
                              const std::vector<std::uint8_t>& mask,
                              const SolverOptions& opts) {
  return build_measurement_from_function(
      mesh, geom, k_target, id,
      [&sources](const RowVector& x) { return eval_sources(sources, x); }, mask, opts);
}

Real k_l2_error(const ElementGeometry& geom, const ElementField& k,
                const ElementField& k_ref) {
  if (k.size() != k_ref.size() || k.size() != geom.volume.size())
    throw std::invalid_argument("conductivity fields must conform to the mesh");
  const Real den = (geom.volume.array() * k_ref.array().square()).sum();
  if (den == 0) throw std::invalid_argument("reference conductivity has zero norm");
  const Real num = (geom.volume.array() * (k - k_ref).array().square()).sum();
  return std::sqrt(num / den);
}

Real flux_error_norm(const SimplexMesh& mesh, const std::vector<FaceField>& fluxes,
                     const std::vector<Measurement>& measurements) {
  if (fluxes.size() != measurements.size())
    throw std::invalid_argument("need one flux field per measurement");
  Real num = 0, den = 0;
  for (size_t m = 0; m < measurements.size(); ++m) {
    const Measurement& meas = measurements[m];
    if (fluxes[m].size() != mesh.n_bfaces())
      throw std::invalid_argument("flux field must have one value per boundary face");
    for (Index f = 0; f < mesh.n_bfaces(); ++f) {
      if (!meas.active[f]) continue;
      const Real w = mesh.bface_measure(f);
      const Real d = fluxes[m](f) - meas.target_flux(f);
      num += w * d * d;
      den += w * meas.target_flux(f) * meas.target_flux(f);
    }
  }
  if (den == 0) throw std::invalid_argument("target fluxes have zero norm");
  return std::sqrt(num / den);
}

void write_history_csv(const std::string& path, const ConvergenceHistory& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write history file: " + path);
  out.precision(17);
  out << "iter,cost,flux_error,k_l2_error,alpha\n";
  for (const ConvergenceRecord& r : history)
    out << r.iter << "," << r.cost << "," << r.flux_error << "," << r.k_error << ","
        << r.alpha << "\n";
  if (!out) throw std::runtime_error("failed while writing history file: " + path);
}

namespace {

// Shared scaffolding of the element/region/parametric descent loops:
// record keeping, tolerance checks, backtracking line search.
struct LoopState {
  const DescentConfig& config;
  DescentResult result;
  Real initial_cost = 0;

  explicit LoopState(const DescentConfig& config) : config(config) {
    if (config.max_iterations < 0) throw std::invalid_argument("iteration cap must be >= 0");
    if (!(config.alpha > 0)) throw std::invalid_argument("step length must be positive");
    if (!(config.k_min > 0)) throw std::invalid_argument("positivity clamp must be positive");
  }

  void record(int iter, Real cost, Real flux_error, Real k_error, Real alpha) {
    if (iter == 0) initial_cost = cost;
    result.history.push_back({iter, cost, flux_error, k_error, alpha});
  }

  bool cost_converged(Real cost) {
    if (cost <= config.cost_tol_abs) {
      result.converged = true;
      result.stop_reason = "cost below absolute tolerance";
      return true;
    }
    if (config.cost_tol_rel > 0 && cost <= config.cost_tol_rel * initial_cost) {
      result.converged = true;
      result.stop_reason = "cost below relative tolerance";
      return true;
    }
    return false;
  }

  bool step_converged(Real rel_change) {
    if (config.step_tol_rel > 0 && rel_change < config.step_tol_rel) {
      result.converged = true;
      result.stop_reason = "relative parameter change below tolerance";
      return true;
    }
    return false;
  }

  void exhausted() {
    if (result.stop_reason.empty()) {
      result.converged = false;
      result.stop_reason = "iteration budget exhausted";
    }
  }
};

Real cost_only(const SimplexMesh& mesh, const ElementGeometry& geom, const ElementField& k,
               const std::vector<Measurement>& measurements, const SolverOptions& opts,
               int& n_solves) {
  const ObjectiveResult r = total_gradient(mesh, geom, k, measurements, false, opts);
  n_solves += r.n_solves;
  return r.cost;
}

}  // namespace

DescentResult run_descent(const SimplexMesh& mesh, const ElementGeometry& geom,
                          const std::vector<Measurement>& measurements,
                          const ElementField& k0, const DescentConfig& config,
                          const ElementField* k_reference, const SnapshotCallback& snapshot) {
  if (measurements.empty()) throw std::invalid_argument("descent needs at least one measurement");
  if (k0.size() != mesh.n_elements())
    throw std::invalid_argument("initial conductivity must have one value per element");

  LoopState loop(config);
  const GradientSmoother smoother(mesh, geom, config.smoothing);
  ElementField k = k0.cwiseMax(config.k_min);
  loop.result.k = k;

  const auto k_err = [&](const ElementField& field) {
    return k_reference ? k_l2_error(geom, field, *k_reference) : kNaN;
  };

  try {
    ObjectiveResult obj = total_gradient(mesh, geom, k, measurements, true, config.solver);
    loop.result.n_solves += obj.n_solves;
    loop.record(0, obj.cost, flux_error_norm(mesh, obj.fluxes, measurements), k_err(k), 0.0);
    if (snapshot) snapshot(0, k, loop.result);

    for (int iter = 1; iter <= config.max_iterations; ++iter) {
      if (loop.cost_converged(obj.cost)) break;

      const ElementField direction = smoother.smooth_gradient(obj.gradient);
      Real alpha = config.alpha;
      ElementField k_trial;
      bool accepted = false;
      for (int bt = 0; bt <= config.max_backtracks; ++bt) {
        k_trial = (k - alpha * direction).cwiseMax(config.k_min);
        const Real trial_cost =
            cost_only(mesh, geom, k_trial, measurements, config.solver, loop.result.n_solves);
        if (!config.backtrack || trial_cost < obj.cost) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        loop.result.converged = false;
        loop.result.stop_reason = "line search found no descent step";
        break;
      }

      const Real rel_change = (k_trial - k).norm() / k.norm();
      k = k_trial;
      obj = total_gradient(mesh, geom, k, measurements, true, config.solver);
      loop.result.n_solves += obj.n_solves;
      loop.record(iter, obj.cost, flux_error_norm(mesh, obj.fluxes, measurements), k_err(k),
                  alpha);
      loop.result.k = k;
      if (snapshot) snapshot(iter, k, loop.result);
      if (loop.step_converged(rel_change)) break;
      if (loop.cost_converged(obj.cost)) break;
    }
  } catch (const SolverError& err) {
    loop.result.k = k;
    throw DescentError(std::string("descent aborted: ") + err.what(), loop.result);
  }

  loop.exhausted();
  loop.result.k = k;
  return loop.result;
}

Vector fd_gradient_regions(const SimplexMesh& mesh, const ElementGeometry& geom,
                           const ElementField& k, const RegionMap& regions,
                           const std::vector<Measurement>& measurements, Real step_rel,
                           int* n_solves, const SolverOptions& opts) {
  if (!(step_rel > 0)) throw std::invalid_argument("finite-difference step must be positive");
  regions.validate(mesh);
  int solves = 0;
  Vector grad(regions.n_regions);
  const Vector region_mean =
      project_gradient(ElementField(k.array() * geom.volume.array()), regions);
  for (int r = 0; r < regions.n_regions; ++r) {
    const Real step = step_rel * std::max(std::abs(region_mean(r)), Real(1e-8));
    ElementField kp = k, km = k;
    for (Index el = 0; el < mesh.n_elements(); ++el) {
      if (regions.element_region[el] != r) continue;
      kp(el) += step;
      km(el) -= step;
    }
    const Real cp = cost_only(mesh, geom, kp, measurements, opts, solves);
    const Real cm = cost_only(mesh, geom, km, measurements, opts, solves);
    grad(r) = (cp - cm) / (2 * step);
  }
  if (n_solves) *n_solves += solves;
  return grad;
}

Vector fd_gradient_elements(const SimplexMesh& mesh, const ElementGeometry& geom,
                            const ElementField& k,
                            const std::vector<Measurement>& measurements,
                            const std::vector<int>& elements, Real step_rel,
                            int* n_solves, const SolverOptions& opts) {
  if (!(step_rel > 0)) throw std::invalid_argument("finite-difference step must be positive");
  int solves = 0;
  Vector grad(static_cast<Index>(elements.size()));
  for (size_t i = 0; i < elements.size(); ++i) {
    const int el = elements[i];
    if (el < 0 || el >= mesh.n_elements())
      throw std::invalid_argument("element id out of range: " + std::to_string(el));
    const Real step = step_rel * k(el);
    ElementField kp = k, km = k;
    kp(el) += step;
    km(el) -= step;
    const Real cp = cost_only(mesh, geom, kp, measurements, opts, solves);
    const Real cm = cost_only(mesh, geom, km, measurements, opts, solves);
    grad(static_cast<Index>(i)) = (cp - cm) / (2 * step);
  }
  if (n_solves) *n_solves += solves;
  return grad;
}

DescentResult run_region_descent(const SimplexMesh& mesh, const ElementGeometry& geom,
                                 const std::vector<Measurement>& measurements,
                                 const RegionMap& regions, const Vector& kappa0,
                                 RegionGradient mode, const DescentConfig& config,
                                 const ElementField* k_reference,
                                 const SnapshotCallback& snapshot) {
  if (measurements.empty()) throw std::invalid_argument("descent needs at least one measurement");
  regions.validate(mesh);
  if (kappa0.size() != regions.n_regions)
    throw std::invalid_argument("initial values must have one entry per region");

  LoopState loop(config);
  Vector kappa = kappa0.cwiseMax(config.k_min);
  ElementField k = expand_regions(regions, kappa);
  loop.result.k = k;

  const auto k_err = [&](const ElementField& field) {
    return k_reference ? k_l2_error(geom, field, *k_reference) : kNaN;
  };

  try {
    const bool adjoint = mode == RegionGradient::projected_adjoint;
    ObjectiveResult obj = total_gradient(mesh, geom, k, measurements, adjoint, config.solver);
    loop.result.n_solves += obj.n_solves;
    loop.record(0, obj.cost, flux_error_norm(mesh, obj.fluxes, measurements), k_err(k), 0.0);
    if (snapshot) snapshot(0, k, loop.result);

    Vector prev_kappa, prev_density;
    for (int iter = 1; iter <= config.max_iterations; ++iter) {
      if (loop.cost_converged(obj.cost)) break;

      // Per-volume derivative density: the projected adjoint gradient is
      // already a density; the FD oracle returns dI/dkappa_r and is
      // divided by the region volumes.
      const Vector density =
          adjoint ? project_gradient(obj.gradient, regions)
                  : Vector(fd_gradient_regions(mesh, geom, k, regions, measurements,
                                               config.fd_step_rel, &loop.result.n_solves,
                                               config.solver)
                               .array() /
                           regions.region_volume.array());

      Real alpha = config.alpha;
      if (config.backtrack && prev_density.size() > 0) {
        // Spectral step: secant ratio of the last accepted move against
        // the change it produced in the density. A fixed step crawls once
        // the stiff region directions are fit; this rescales it each
        // iteration, and the backtracking below safeguards the result.
        const Vector dkappa = kappa - prev_kappa;
        const Real curvature = dkappa.dot(density - prev_density);
        if (curvature > 0)
          alpha = std::clamp(dkappa.squaredNorm() / curvature, Real(1e-3) * config.alpha,
                             Real(1e3) * config.alpha);
      }
      prev_kappa = kappa;
      prev_density = density;
      Vector kappa_trial;
      ElementField k_trial;
      bool accepted = false;
      for (int bt = 0; bt <= config.max_backtracks; ++bt) {
        kappa_trial = (kappa - alpha * density).cwiseMax(config.k_min);
        k_trial = expand_regions(regions, kappa_trial);
        const Real trial_cost =
            cost_only(mesh, geom, k_trial, measurements, config.solver, loop.result.n_solves);
        if (!config.backtrack || trial_cost < obj.cost) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        loop.result.converged = false;
        loop.result.stop_reason = "line search found no descent step";
        break;
      }

      const Real rel_change = (kappa_trial - kappa).norm() / kappa.norm();
      kappa = kappa_trial;
      k = k_trial;
      obj = total_gradient(mesh, geom, k, measurements, adjoint, config.solver);
      loop.result.n_solves += obj.n_solves;
      loop.record(iter, obj.cost, flux_error_norm(mesh, obj.fluxes, measurements), k_err(k),
                  alpha);
      loop.result.k = k;
      if (snapshot) snapshot(iter, k, loop.result);
      if (loop.step_converged(rel_change)) break;
      if (loop.cost_converged(obj.cost)) break;
    }
  } catch (const SolverError& err) {
    loop.result.k = k;
    throw DescentError(std::string("region descent aborted: ") + err.what(), loop.result);
  }

  loop.exhausted();
  loop.result.k = k;
  return loop.result;
}

ElementField disk_field(const ElementGeometry& geom, const DiskParameters& p,
                        Real k_background) {
  Vector center(2);
  center << p.x, p.y;
  ElementField k(geom.volume.size());
  for (Index el = 0; el < k.size(); ++el)
    k(el) = centroid_distance(geom, el, center) <= p.radius ? p.k : k_background;
  return k;
}

ParametricResult run_parametric_disk(const SimplexMesh& mesh, const ElementGeometry& geom,
                                     const std::vector<Measurement>& measurements,
                                     const DiskParameters& initial, Real k_background,
                                     const DescentConfig& config,
                                     const ElementField* k_reference) {
  if (measurements.empty()) throw std::invalid_argument("descent needs at least one measurement");
  if (!(initial.radius > 0) || !(initial.k > 0))
    throw std::invalid_argument("initial disk radius and conductivity must be positive");
  if (!(k_background > 0)) throw std::invalid_argument("background conductivity must be positive");

  const Real h = geom.h.mean();
  // The centroid-sampled disk makes the cost piecewise constant in the
  // geometry parameters: probe steps near the element scale average over
  // several classification plateaus, smaller ones read plateau noise.
  const Real geometry_step = 0.5 * h;
  const Real min_radius = 0.5 * h;
  // A trial step must beat the current cost by this relative margin.
  // Below it the model is changing at classification-noise level, the
  // regime the relative-parameter-change termination is meant to catch.
  const Real descent_margin = 1e-3;

  LoopState loop(config);
  ParametricResult result;

  const RowVector box_lo = mesh.nodes.colwise().minCoeff();
  const RowVector box_hi = mesh.nodes.colwise().maxCoeff();
  // Past this radius the rim leaves the domain from any admissible center
  // and the geometry derivatives vanish identically.
  const Real max_radius = std::hypot(box_hi(0) - box_lo(0), box_hi(1) - box_lo(1));

  // Geometry (x, y, radius); the interior conductivity is eliminated at
  // every geometry evaluation by an inner one-dimensional minimization,
  // because the radius/contrast trade-off forms a valley so stiff and so
  // plateau-ridden that a joint 4-parameter descent stalls on its wall.
  Eigen::Vector3d q(initial.x, initial.y,
                    std::clamp(initial.radius, min_radius, max_radius));
  Real k_disk = std::max(initial.k, config.k_min);

  const auto clamp_geo = [&](Eigen::Vector3d v) {
    v(0) = std::clamp(v(0), box_lo(0), box_hi(0));
    v(1) = std::clamp(v(1), box_lo(1), box_hi(1));
    v(2) = std::clamp(v(2), min_radius, max_radius);
    return v;
  };
  const auto field_at = [&](const Eigen::Vector3d& v, Real k) {
    return disk_field(geom, DiskParameters{v(0), v(1), v(2), k}, k_background);
  };

  // Cost and its derivative with respect to the disk conductivity: the
  // adjoint element gradient summed over the disk members.
  struct KSlope {
    Real cost;
    Real slope;
  };
  const auto k_slope = [&](const Eigen::Vector3d& v, Real k) {
    const ObjectiveResult obj =
        total_gradient(mesh, geom, field_at(v, k), measurements, true, config.solver);
    result.n_solves += obj.n_solves;
    Vector center(2);
    center << v(0), v(1);
    Real slope = 0;
    for (Index el = 0; el < geom.volume.size(); ++el)
      if (centroid_distance(geom, el, center) <= v(2)) slope += obj.gradient(el);
    return KSlope{obj.cost, slope};
  };

  // Inner elimination: minimize over k at fixed geometry by a safeguarded
  // secant on the slope, bracketed by doubling/halving from the warm start.
  const Real k_cap = 1e4;
  const auto eliminate_k = [&](const Eigen::Vector3d& v, Real k_start) {
    Real lo_k = std::clamp(k_start, config.k_min, k_cap);
    KSlope lo_s = k_slope(v, lo_k);
    if (lo_s.slope == 0) return std::pair<Real, Real>(lo_k, lo_s.cost);
    Real hi_k = lo_k;
    KSlope hi_s = lo_s;
    while (hi_s.slope < 0) {
      if (hi_k >= k_cap) return std::pair<Real, Real>(hi_k, hi_s.cost);
      lo_k = hi_k;
      lo_s = hi_s;
      hi_k = std::min(2 * hi_k, k_cap);
      hi_s = k_slope(v, hi_k);
    }
    while (lo_s.slope > 0) {
      if (lo_k <= config.k_min) return std::pair<Real, Real>(lo_k, lo_s.cost);
      hi_k = lo_k;
      hi_s = lo_s;
      lo_k = std::max(0.5 * lo_k, config.k_min);
      lo_s = k_slope(v, lo_k);
    }
    Real best_k = lo_s.cost <= hi_s.cost ? lo_k : hi_k;
    Real best_cost = std::min(lo_s.cost, hi_s.cost);
    for (int it = 0; it < 25 && hi_k - lo_k > 1e-4 * hi_k; ++it) {
      Real mid = hi_k - hi_s.slope * (hi_k - lo_k) / (hi_s.slope - lo_s.slope);
      if (!(mid > lo_k && mid < hi_k)) mid = 0.5 * (lo_k + hi_k);
      const KSlope mid_s = k_slope(v, mid);
      if (mid_s.cost < best_cost) {
        best_cost = mid_s.cost;
        best_k = mid;
      }
      if (mid_s.slope == 0) break;
      if (mid_s.slope < 0) {
        lo_k = mid;
        lo_s = mid_s;
      } else {
        hi_k = mid;
        hi_s = mid_s;
      }
    }
    return std::pair<Real, Real>(best_k, best_cost);
  };

  const auto k_err = [&](const Eigen::Vector3d& v, Real k) {
    return k_reference ? k_l2_error(geom, field_at(v, k), *k_reference) : kNaN;
  };
  const auto flux_err = [&](const Eigen::Vector3d& v, Real k) {
    const ObjectiveResult obj =
        total_gradient(mesh, geom, field_at(v, k), measurements, false, config.solver);
    result.n_solves += obj.n_solves;
    return flux_error_norm(mesh, obj.fluxes, measurements);
  };
  const auto full_params = [&](const Eigen::Vector3d& v, Real k) {
    return Eigen::Vector4d(v(0), v(1), v(2), k);
  };

  try {
    Real cost;
    std::tie(k_disk, cost) = eliminate_k(q, k_disk);
    loop.record(0, cost, flux_err(q, k_disk), k_err(q, k_disk), 0.0);

    Eigen::Vector3d q_prev = q;
    Eigen::Vector3d grad_prev = Eigen::Vector3d::Zero();
    bool have_prev = false;

    for (int iter = 1; iter <= config.max_iterations; ++iter) {
      if (loop.cost_converged(cost)) break;

      // Central differences of the eliminated cost over the geometry.
      Eigen::Vector3d grad;
      for (int i = 0; i < 3; ++i) {
        Eigen::Vector3d qp = q, qm = q;
        qp(i) += geometry_step;
        qm(i) -= geometry_step;
        const Real cp = eliminate_k(clamp_geo(qp), k_disk).second;
        const Real cm = eliminate_k(clamp_geo(qm), k_disk).second;
        grad(i) = (cp - cm) / (2 * geometry_step);
      }
      const Real gnorm = grad.norm();
      if (gnorm == 0) {
        loop.result.converged = true;
        loop.result.stop_reason = "relative parameter change below tolerance";
        break;
      }

      // Initial step length: spectral (secant) estimate once a previous
      // gradient exists, else the configured length for a unit move. The
      // geometry move per iteration is capped at a multiple of the probe
      // window: a finite-difference direction is only trusted near the
      // scale it was sampled at, and an uncapped expanding line search can
      // ride a descending ray into the degenerate all-covering disk.
      const Real move_cap = 8 * geometry_step;
      Real alpha = config.alpha / gnorm;
      if (have_prev) {
        const Eigen::Vector3d dq = q - q_prev;
        const Eigen::Vector3d dg = grad - grad_prev;
        const Real curvature = dq.dot(dg);
        if (curvature > 0)
          alpha = std::clamp(dq.squaredNorm() / curvature, 1e-6 / gnorm, 10.0 / gnorm);
      }
      alpha = std::min(alpha, move_cap / gnorm);
      q_prev = q;
      grad_prev = grad;
      have_prev = true;

      Eigen::Vector3d q_trial = q;
      Real k_trial = k_disk;
      Real trial_cost = 0;
      bool accepted = false;
      const auto try_alpha = [&](Real a) {
        const Eigen::Vector3d v = clamp_geo(q - a * grad);
        const auto [kv, cv] = eliminate_k(v, k_disk);
        if (cv >= cost * (1 - descent_margin)) return false;
        q_trial = v;
        k_trial = kv;
        trial_cost = cv;
        alpha = a;
        return true;
      };
      if (!config.backtrack) {
        q_trial = clamp_geo(q - alpha * grad);
        std::tie(k_trial, trial_cost) = eliminate_k(q_trial, k_disk);
        accepted = true;
      } else {
        Real a = alpha;
        for (int bt = 0; bt <= config.max_backtracks && !accepted; ++bt, a *= 0.5)
          accepted = try_alpha(a);
        // Expand while the cost keeps falling and the cap allows: one
        // iteration may then cover many base step lengths.
        for (int grow = 0; accepted && grow < config.max_backtracks; ++grow) {
          if (2 * alpha * gnorm > move_cap) break;
          if (!try_alpha(2 * alpha)) break;
        }
      }
      if (!accepted) {
        // No admissible step improves the cost beyond classification
        // noise: the parameters have stopped moving meaningfully, the
        // relative-range stopping state.
        loop.result.converged = true;
        loop.result.stop_reason = "relative parameter change below tolerance";
        break;
      }

      // Relative change measured per parameter so the large contrast value
      // cannot mask motion that is still significant for the geometry.
      const Eigen::Vector4d before = full_params(q, k_disk);
      const Eigen::Vector4d after = full_params(q_trial, k_trial);
      Real rel_change = 0;
      for (int i = 0; i < 4; ++i)
        rel_change = std::max(rel_change, std::abs(after(i) - before(i)) /
                                              std::max(std::abs(before(i)), Real(1e-12)));
      q = q_trial;
      k_disk = k_trial;
      cost = trial_cost;
      loop.record(iter, cost, flux_err(q, k_disk), k_err(q, k_disk), alpha);
      if (loop.step_converged(rel_change)) break;
      if (loop.cost_converged(cost)) break;
    }
  } catch (const SolverError& err) {
    loop.result.k = field_at(q, k_disk);
    throw DescentError(std::string("parametric descent aborted: ") + err.what(), loop.result);
  }

  loop.exhausted();
  result.params = DiskParameters{q(0), q(1), q(2), k_disk};
  result.history = std::move(loop.result.history);
  result.n_solves += loop.result.n_solves;
  result.converged = loop.result.converged;
  result.stop_reason = loop.result.stop_reason;
  return result;
}

}  // namespace calderon
