#pragma once

#include "calderon/mesh.hpp"
#include "calderon/types.hpp"

#include <Eigen/SparseCholesky>

#include <vector>

namespace calderon {

/// Volume-weighted patch average of an element field onto the nodes:
///   s_i = sum_{el around i} vol_el g_el / sum_{el around i} vol_el.
NodalField elements_to_points(const SimplexMesh& mesh, const ElementGeometry& geom,
                              const ElementField& g);

/// Arithmetic mean of the element's nodal values; inverse direction of
/// elements_to_points.
ElementField points_to_elements(const SimplexMesh& mesh, const NodalField& s);

/// Successive patch-averaging passes (elements -> points -> elements).
/// Each pass widens the stencil by one element layer.
ElementField smooth_spea(const SimplexMesh& mesh, const ElementGeometry& geom,
                         const ElementField& g, int passes);

/// P1 mass matrices. consistent(i,j) = sum_el vol_el (1 + delta_ij) /
/// ((d+1)(d+2)); lumped is its row sum, vol_el/(d+1) per element node.
/// lumped - consistent (as a diagonal minus matrix) is positive
/// semidefinite with kernel spanned by constants.
struct MassMatrices {
  SparseOperator consistent;
  Vector lumped;
};

MassMatrices assemble_mass(const SimplexMesh& mesh, const ElementGeometry& geom);

/// H1 smoothing of a nodal field: (M + lambda K) s = M g with K the unit
/// stiffness. lambda has units length^2; lambda = 0 returns g.
NodalField smooth_h1(const SimplexMesh& mesh, const ElementGeometry& geom,
                     const NodalField& g, Real lambda);

/// Pseudo-Laplacian smoothing: (M + lambda_pl (M_l - M)) s = M g with
/// M_l the lumped mass. Dimensionless lambda_pl >= 0 keeps the operator
/// positive definite; the system is solved directly.
NodalField smooth_pseudo_laplacian(const SimplexMesh& mesh, const ElementGeometry& geom,
                                   const NodalField& g, Real lambda_pl);

/// Jacobi-style relaxation for L u = rhs with C = diag(L):
///   u <- u + dtau C^{-1} (rhs - L u),
/// run for a fixed step count from the given initial field. Throws
/// SolverError when the residual grows three steps in a row.
NodalField relax_solve(const SparseOperator& L, const Vector& rhs, const Vector& initial,
                       Real dtau, int steps);

/// Partition of the elements into conductivity regions (inversion
/// unknowns coarser than the mesh).
struct RegionMap {
  int n_regions = 0;
  std::vector<int> element_region;  // one region id per element
  Vector region_volume;             // summed element volumes

  void validate(const SimplexMesh& mesh) const;
};

/// Regions from a lattice of boxes over the mesh bounding box; elements
/// are binned by centroid. Every region must receive at least one
/// element. Region ids run x-fastest.
RegionMap make_lattice_regions(const SimplexMesh& mesh, const ElementGeometry& geom,
                               const IntVector& divisions);

/// Per-region gradient density: sum of the member elements' gradient
/// entries divided by the region volume. Multiplying a region's density
/// by its volume recovers the derivative with respect to that region's
/// conductivity value.
Vector project_gradient(const ElementField& g, const RegionMap& regions);

/// Element field holding each element's region value.
ElementField expand_regions(const RegionMap& regions, const Vector& region_values);

enum class SmoothingKind { none, spea, h1, pseudo_laplacian };

struct SmoothingConfig {
  SmoothingKind kind = SmoothingKind::pseudo_laplacian;
  Real lambda_h1 = 1e-3;
  Real lambda_pl = 0.05;
  bool relaxed = true;  // solve the pseudo-Laplacian system by relaxation
  Real dtau = 0.8;
  int relax_steps = 10;
  int spea_passes = 1;
};

/// Gradient regularizer used by the descent loop. Element gradients are
/// converted to densities (divide by element volume), patch-averaged to
/// the nodes, smoothed, and averaged back to the elements, keeping the
/// update step independent of local element size. Operators are
/// assembled once per mesh.
class GradientSmoother {
public:
  GradientSmoother(const SimplexMesh& mesh, const ElementGeometry& geom,
                   const SmoothingConfig& config);

  NodalField smooth_nodal(const NodalField& g) const;
  ElementField smooth_gradient(const ElementField& element_grad) const;

private:
  const SimplexMesh& mesh_;
  const ElementGeometry& geom_;
  SmoothingConfig config_;
  SparseOperator op_;    // left-hand operator of the smoothing system
  SparseOperator mass_;  // consistent mass (right-hand operator)
  Eigen::SimplicialLDLT<SparseOperator> direct_;
};

}  // namespace calderon
