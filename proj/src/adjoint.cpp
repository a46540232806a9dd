#include "calderon/adjoint.hpp"

#include <memory>

namespace calderon {

namespace {

void check_measurement(const SimplexMesh& mesh, const Measurement& m) {
  if (m.target_flux.size() != mesh.n_bfaces())
    throw std::invalid_argument("measurement target flux must have one value per boundary face");
  if (static_cast<Index>(m.active.size()) != mesh.n_bfaces())
    throw std::invalid_argument("measurement active mask must have one flag per boundary face");
}

}  // namespace

Real evaluate_cost(const SimplexMesh& mesh, const FaceField& flux, const Measurement& m) {
  check_measurement(mesh, m);
  Real cost = 0;
  for (Index f = 0; f < mesh.n_bfaces(); ++f) {
    if (!m.active[f]) continue;
    const Real r = m.target_flux(f) - flux(f);
    cost += 0.5 * mesh.bface_measure(f) * r * r;
  }
  return cost;
}

NodalField solve_adjoint(const SimplexMesh& mesh, const ElementGeometry& geom,
                         const ElementField& k, const DirichletSystem& system,
                         const FaceField& flux, const Measurement& m,
                         const SolverOptions& opts) {
  check_measurement(mesh, m);
  Vector load = Vector::Zero(mesh.n_nodes());
  for (Index f = 0; f < mesh.n_bfaces(); ++f) {
    if (!m.active[f]) continue;
    const Index el = mesh.bface_element(f);
    const Real wr = mesh.bface_measure(f) * (m.target_flux(f) - flux(f)) * k(el);
    for (int i = 0; i <= mesh.dim; ++i)
      load(mesh.elements(el, i)) += wr * mesh.bface_normal.row(f).dot(geom.grad(el, i));
  }
  const Vector zeros = Vector::Zero(static_cast<Index>(m.dirichlet.nodes.size()));
  return system.solve(zeros, load, opts);
}

ElementField cost_gradient(const SimplexMesh& mesh, const ElementGeometry& geom,
                           const ElementField& k, const NodalField& u,
                           const NodalField& adjoint, const FaceField& flux,
                           const Measurement& m) {
  check_measurement(mesh, m);
  if (k.size() != mesh.n_elements())
    throw std::invalid_argument("conductivity must have one value per element");
  ElementField grad(mesh.n_elements());
  for (Index el = 0; el < mesh.n_elements(); ++el) {
    grad(el) = geom.volume(el) *
               element_gradient(mesh, geom, el, u).dot(element_gradient(mesh, geom, el, adjoint));
  }
  for (Index f = 0; f < mesh.n_bfaces(); ++f) {
    if (!m.active[f]) continue;
    const Index el = mesh.bface_element(f);
    const Real r = m.target_flux(f) - flux(f);
    grad(el) -= mesh.bface_measure(f) * r *
                mesh.bface_normal.row(f).dot(element_gradient(mesh, geom, el, u));
  }
  return grad;
}

ObjectiveResult total_gradient(const SimplexMesh& mesh, const ElementGeometry& geom,
                                   const ElementField& k,
                                   const std::vector<Measurement>& measurements,
                                   bool with_gradient, const SolverOptions& opts) {
  ObjectiveResult result;
  result.gradient = ElementField::Zero(mesh.n_elements());
  if (measurements.empty()) return result;

  const SparseOperator A = assemble_stiffness(mesh, geom, k);

  // The Dirichlet reduction depends only on the constrained node set;
  // reuse it across experiments whenever the sets coincide.
  std::unique_ptr<DirichletSystem> system;
  const std::vector<int>* system_nodes = nullptr;
  for (const Measurement& m : measurements) {
    if (!system || *system_nodes != m.dirichlet.nodes) {
      system = std::make_unique<DirichletSystem>(A, m.dirichlet.nodes);
      system_nodes = &m.dirichlet.nodes;
    }
    const Vector u = system->solve(m.dirichlet.values, Vector(), opts);
    ++result.n_solves;
    const FaceField flux = boundary_normal_flux(mesh, geom, k, u);
    result.cost += evaluate_cost(mesh, flux, m);
    if (with_gradient) {
      const Vector w = solve_adjoint(mesh, geom, k, *system, flux, m, opts);
      ++result.n_solves;
      result.gradient += cost_gradient(mesh, geom, k, u, w, flux, m);
    }
    result.fluxes.push_back(flux);
    result.potentials.push_back(u);
  }
  return result;
}

}  // namespace calderon
