#pragma once

#include "calderon/adjoint.hpp"
#include "calderon/fem.hpp"
#include "calderon/mesh.hpp"
#include "calderon/regularization.hpp"
#include "calderon/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace calderon {

/// Synthetic conductivity targets, evaluated at element centroids.
/// Distances use the first center.size() coordinates, so a 2-vector
/// center on a thin 3-D slab measures in-plane distance only.
struct TargetSpec {
  enum class Kind { constant, linear, gaussian, disk, piecewise_x, three_region } kind =
      Kind::constant;
  Real base = 1.0;       // constant value / background / linear intercept
  Real slope = 0.0;      // linear: k = base + slope * x
  Vector center;         // gaussian and disk
  Real radius = 0.2;     // gaussian width / disk radius
  Real amplitude = 4.0;  // gaussian: k = base + amplitude exp(-(|x-c|/radius)^2)
  Real inside = 5.0;     // disk: k inside the radius
  Vector breaks;         // piecewise_x / three_region: ascending x cuts
  Vector levels;         // piecewise_x / three_region: one value per slab
};

ElementField build_target(const SimplexMesh& mesh, const ElementGeometry& geom,
                          const TargetSpec& spec);

/// Localized boundary source: contributes
///   amplitude * exp(-|x - center|^2 / radius^2)
/// to the prescribed boundary values; distance over the first
/// center.size() coordinates.
struct PointSource {
  Vector center;
  Real radius = 0.5;
  Real amplitude = 1.0;
};

Real eval_sources(const std::vector<PointSource>& sources, const RowVector& x);

/// Faces whose mismatch enters the cost. With exclude_z_walls the faces
/// whose normal points along +-z are dropped (thin-slab emulation of a
/// 2-D domain with insulated lateral walls); their nodes also carry no
/// Dirichlet data.
std::vector<std::uint8_t> measurement_mask(const SimplexMesh& mesh, bool exclude_z_walls);

/// Boundary nodes of the active faces, sorted.
std::vector<int> mask_nodes(const SimplexMesh& mesh, const std::vector<std::uint8_t>& mask);

/// Synthesize one experiment: prescribe the boundary field at the active
/// faces' nodes, run the forward problem at the target conductivity, and
/// record the resulting normal fluxes as the measured data.
Measurement build_measurement(const SimplexMesh& mesh, const ElementGeometry& geom,
                              const ElementField& k_target, int id,
                              const std::vector<PointSource>& sources,
                              const std::vector<std::uint8_t>& mask,
                              const SolverOptions& opts = {});

Measurement build_measurement_from_function(const SimplexMesh& mesh,
                                            const ElementGeometry& geom,
                                            const ElementField& k_target, int id,
                                            const std::function<Real(const RowVector&)>& u0,
                                            const std::vector<std::uint8_t>& mask,
                                            const SolverOptions& opts = {});

/// Relative volume-weighted L2 distance between conductivities:
/// sqrt(sum V (k - k_ref)^2) / sqrt(sum V k_ref^2).
Real k_l2_error(const ElementGeometry& geom, const ElementField& k,
                const ElementField& k_ref);

/// Relative face-measure-weighted flux mismatch accumulated over all
/// experiments: sqrt(sum w (f - f_m)^2 / sum w f_m^2), active faces only.
Real flux_error_norm(const SimplexMesh& mesh, const std::vector<FaceField>& fluxes,
                     const std::vector<Measurement>& measurements);

struct DescentConfig {
  Real alpha = 1.0;            // step on the smoothed gradient density
  bool backtrack = true;       // halve alpha on cost increase
  int max_backtracks = 30;
  int max_iterations = 50;
  Real k_min = 1e-3;           // positivity clamp after each update
  Real cost_tol_rel = 0.0;     // stop when cost <= rel * initial (0 = off)
  Real cost_tol_abs = 1e-18;   // stop when cost <= abs
  Real step_tol_rel = 0.0;     // stop when |dk| / |k| < this (0 = off)
  Real fd_step_rel = 1e-4;     // relative probe step of the region FD gradient
  SmoothingConfig smoothing;
  SolverOptions solver;
};

struct ConvergenceRecord {
  int iter = 0;
  Real cost = 0;
  Real flux_error = 0;
  Real k_error = 0;  // NaN when no reference conductivity is known
  Real alpha = 0;    // step accepted to reach this iterate (0 for row 0)
};

using ConvergenceHistory = std::vector<ConvergenceRecord>;

/// Writes `iter,cost,flux_error,k_l2_error,alpha` rows at full precision.
void write_history_csv(const std::string& path, const ConvergenceHistory& history);

struct DescentResult {
  ElementField k;
  ConvergenceHistory history;
  int n_solves = 0;
  bool converged = false;
  std::string stop_reason;
};

/// Observer invoked after every accepted iterate (and once for the
/// initial state with iteration 0).
using SnapshotCallback =
    std::function<void(int iteration, const ElementField& k, const DescentResult& partial)>;

/// Steepest-descent loop on per-element conductivities. Each iteration:
/// forward + adjoint solves per experiment, gradient accumulation,
/// gradient smoothing, step with optional backtracking, positivity clamp.
/// Cost never increases when backtracking is on. Solver failures abort
/// with the partial history attached to the thrown DescentError.
DescentResult run_descent(const SimplexMesh& mesh, const ElementGeometry& geom,
                          const std::vector<Measurement>& measurements,
                          const ElementField& k0, const DescentConfig& config,
                          const ElementField* k_reference = nullptr,
                          const SnapshotCallback& snapshot = {});

class DescentError : public SolverError {
public:
  DescentError(const std::string& what, DescentResult partial)
      : SolverError(what), partial_(std::move(partial)) {}
  const DescentResult& partial() const { return partial_; }

private:
  DescentResult partial_;
};

/// Central finite differences of the summed experiment cost with respect
/// to each region's conductivity value; step is relative to the region
/// value. Costs 2 * n_regions * n_measurements forward solves, counted
/// into n_solves when provided.
Vector fd_gradient_regions(const SimplexMesh& mesh, const ElementGeometry& geom,
                           const ElementField& k, const RegionMap& regions,
                           const std::vector<Measurement>& measurements, Real step_rel,
                           int* n_solves = nullptr, const SolverOptions& opts = {});

/// Central finite differences of the summed cost with respect to single
/// element conductivities (the gradient-check oracle).
Vector fd_gradient_elements(const SimplexMesh& mesh, const ElementGeometry& geom,
                            const ElementField& k,
                            const std::vector<Measurement>& measurements,
                            const std::vector<int>& elements, Real step_rel,
                            int* n_solves = nullptr, const SolverOptions& opts = {});

enum class RegionGradient { finite_difference, projected_adjoint };

/// Descent over region-constant conductivities. The gradient is either
/// the FD oracle above or the adjoint element gradient projected onto the
/// regions; the update steps on the per-volume derivative density, so
/// alpha carries the same meaning as in the element loop. When
/// backtracking is on, the trial step length is reseeded each iteration
/// from the secant ratio of the previous move (spectral step); with
/// backtracking off, every step uses config.alpha unchanged. No smoothing
/// is applied; the region count is the regularization.
DescentResult run_region_descent(const SimplexMesh& mesh, const ElementGeometry& geom,
                                 const std::vector<Measurement>& measurements,
                                 const RegionMap& regions, const Vector& kappa0,
                                 RegionGradient mode, const DescentConfig& config,
                                 const ElementField* k_reference = nullptr,
                                 const SnapshotCallback& snapshot = {});

struct DiskParameters {
  Real x = 0, y = 0, radius = 0, k = 0;
};

struct ParametricResult {
  DiskParameters params;
  ConvergenceHistory history;
  int n_solves = 0;
  bool converged = false;
  std::string stop_reason;
};

/// Four-parameter disk fit (center, radius, interior conductivity). The
/// geometry follows finite-difference steepest descent with backtracking
/// line search; the interior conductivity is eliminated at every geometry
/// evaluation by an inner one-dimensional minimization driven by the
/// adjoint derivative, which removes the stiff radius/contrast trade-off
/// valley from the search. Geometry probes are tied to the mesh spacing
/// because the centroid-sampled disk makes the cost piecewise constant
/// below that scale, moves are capped at a multiple of the probe window,
/// and a trial step must improve the cost beyond classification noise.
/// Terminates when every parameter's relative change drops under
/// config.step_tol_rel.
ParametricResult run_parametric_disk(const SimplexMesh& mesh, const ElementGeometry& geom,
                                     const std::vector<Measurement>& measurements,
                                     const DiskParameters& initial, Real k_background,
                                     const DescentConfig& config,
                                     const ElementField* k_reference = nullptr);

/// Element conductivity of a disk model (in-plane distance).
ElementField disk_field(const ElementGeometry& geom, const DiskParameters& p,
                        Real k_background);

}  // namespace calderon
