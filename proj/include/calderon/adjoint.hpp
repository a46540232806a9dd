#pragma once

#include "calderon/fem.hpp"
#include "calderon/mesh.hpp"
#include "calderon/types.hpp"

#include <cstdint>
#include <vector>

namespace calderon {

/// One boundary experiment: imposed Dirichlet data, the measured normal
/// flux it should reproduce, and the boundary faces that participate in
/// the mismatch. Faces with active(f) == 0 (for instance the lateral
/// walls of a thin slab) carry the natural condition and are skipped by
/// the cost, the adjoint load, and the gradient.
struct Measurement {
  int id = 0;
  DirichletData dirichlet;
  FaceField target_flux;              // one value per boundary face
  std::vector<std::uint8_t> active;   // one flag per boundary face
};

/// Flux-mismatch cost of one experiment,
///   I = 1/2 sum_f w_f (target_f - flux_f)^2
/// over active faces, with w_f the face measure.
Real evaluate_cost(const SimplexMesh& mesh, const FaceField& flux, const Measurement& m);

/// Adjoint potential for one experiment: solves the stiffness system with
/// homogeneous Dirichlet values on the measurement's constrained nodes and
/// the weak mismatch load
///   b_j = sum_f w_f r_f k_el n_f . grad N_j   (r_f = target_f - flux_f),
/// assembled over active faces in their owning elements. Where the flux
/// under-shoots the target on an outflow face the load pulls the interior
/// values up, steepening the recovered normal gradient.
NodalField solve_adjoint(const SimplexMesh& mesh, const ElementGeometry& geom,
                         const ElementField& k, const DirichletSystem& system,
                         const FaceField& flux, const Measurement& m,
                         const SolverOptions& opts = {});

/// Derivative of one experiment's cost with respect to the element
/// conductivities. Two contributions per element:
///   vol_el grad u . grad w          (adjoint pairing)
///   - sum_{f on el} w_f r_f n_f . grad u   (direct flux dependence),
/// the second over the element's active boundary faces. Together they
/// differentiate the discrete cost exactly, so central finite differences
/// of evaluate_cost reproduce this vector to solver precision.
ElementField cost_gradient(const SimplexMesh& mesh, const ElementGeometry& geom,
                           const ElementField& k, const NodalField& u,
                           const NodalField& adjoint, const FaceField& flux,
                           const Measurement& m);

/// Cost and cost gradient accumulated over a set of experiments sharing
/// one conductivity. Stiffness and the Dirichlet reduction are built once
/// when all experiments constrain the same node set.
struct ObjectiveResult {
  Real cost = 0;
  ElementField gradient;
  std::vector<FaceField> fluxes;     // per experiment, all boundary faces
  std::vector<NodalField> potentials;
  int n_solves = 0;                  // forward + adjoint solves performed
};

ObjectiveResult total_gradient(const SimplexMesh& mesh, const ElementGeometry& geom,
                                   const ElementField& k,
                                   const std::vector<Measurement>& measurements,
                                   bool with_gradient = true,
                                   const SolverOptions& opts = {});

}  // namespace calderon
