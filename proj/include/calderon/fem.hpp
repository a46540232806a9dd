#pragma once

#include "calderon/mesh.hpp"
#include "calderon/types.hpp"

#include <vector>

namespace calderon {

/// Dirichlet values on a subset of boundary nodes. Nodes are sorted,
/// unique, and values(i) belongs to nodes[i]. Mesh nodes absent from
/// the list carry the natural (zero-flux) condition.
struct DirichletData {
  std::vector<int> nodes;
  Vector values;

  static DirichletData from_pairs(std::vector<std::pair<int, Real>> pairs);
};

/// Iterative solver knobs. The conjugate-gradient iteration cap is
/// max_iter_factor * n_nodes; tolerance is relative to the rhs norm.
struct SolverOptions {
  Real rel_tol = 1e-10;
  int max_iter_factor = 10;
};

/// Stiffness matrix of -div(k grad u) with piecewise-constant
/// conductivity k (one positive value per element):
///   A(i,j) = sum_el k_el vol_el grad N_i . grad N_j.
/// Symmetric positive semidefinite with kernel spanned by constants.
SparseOperator assemble_stiffness(const SimplexMesh& mesh, const ElementGeometry& geom,
                                  const ElementField& k);

/// Reduction of a symmetric operator to the free (non-Dirichlet) nodes.
/// Build once per (operator, constrained node set); solve many times for
/// different boundary values and loads. Solves use Jacobi-preconditioned
/// conjugate gradients and throw SolverError when the iteration stalls.
class DirichletSystem {
public:
  DirichletSystem(const SparseOperator& A, const std::vector<int>& fixed_nodes);

  Index n_free() const { return free_nodes_.size(); }

  /// Solve A u = load with u = values on the fixed nodes; returns the
  /// full nodal field. load may be empty (treated as zero).
  Vector solve(const Vector& fixed_values, const Vector& load,
               const SolverOptions& opts = {}) const;

private:
  Index n_total_ = 0;
  Eigen::VectorXi free_nodes_;   // ascending mesh ids of unconstrained nodes
  Eigen::VectorXi fixed_nodes_;  // ascending mesh ids of constrained nodes
  SparseOperator A_ff_;
  SparseOperator A_fb_;
  mutable Eigen::ConjugateGradient<SparseOperator, Eigen::Lower | Eigen::Upper,
                                   Eigen::DiagonalPreconditioner<Real>>
      cg_;
};

/// Potential with conductivity k and Dirichlet data bc:
/// solves the stiffness system on the free nodes.
NodalField solve_forward(const SimplexMesh& mesh, const ElementGeometry& geom,
                         const ElementField& k, const DirichletData& bc,
                         const SolverOptions& opts = {});

/// Face-centred normal flux k n . grad u, one value per boundary face,
/// evaluated in the face's owning element. Positive means outflow.
FaceField boundary_normal_flux(const SimplexMesh& mesh, const ElementGeometry& geom,
                               const ElementField& k, const NodalField& u);

}  // namespace calderon
