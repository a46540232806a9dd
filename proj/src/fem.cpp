#include "calderon/fem.hpp"

#include <algorithm>
#include <string>

namespace calderon {

DirichletData DirichletData::from_pairs(std::vector<std::pair<int, Real>> pairs) {
  std::sort(pairs.begin(), pairs.end());
  DirichletData bc;
  bc.nodes.reserve(pairs.size());
  bc.values.resize(static_cast<Index>(pairs.size()));
  Index n = 0;
  for (const auto& [node, value] : pairs) {
    if (!bc.nodes.empty() && bc.nodes.back() == node)
      throw std::invalid_argument("duplicate Dirichlet node " + std::to_string(node));
    bc.nodes.push_back(node);
    bc.values(n++) = value;
  }
  return bc;
}

SparseOperator assemble_stiffness(const SimplexMesh& mesh, const ElementGeometry& geom,
                                  const ElementField& k) {
  if (k.size() != mesh.n_elements())
    throw std::invalid_argument("conductivity must have one value per element");
  const int d = mesh.dim;
  std::vector<Triplet> triplets;
  triplets.reserve(mesh.n_elements() * (d + 1) * (d + 1));
  for (Index el = 0; el < mesh.n_elements(); ++el) {
    if (!(k(el) > 0))
      throw std::invalid_argument("non-positive conductivity on element " + std::to_string(el));
    const Real kv = k(el) * geom.volume(el);
    for (int i = 0; i <= d; ++i) {
      const int ni = mesh.elements(el, i);
      for (int j = 0; j <= d; ++j) {
        const int nj = mesh.elements(el, j);
        triplets.emplace_back(ni, nj, kv * geom.grad(el, i).dot(geom.grad(el, j)));
      }
    }
  }
  SparseOperator A(mesh.n_nodes(), mesh.n_nodes());
  A.setFromTriplets(triplets.begin(), triplets.end());
  return A;
}

DirichletSystem::DirichletSystem(const SparseOperator& A, const std::vector<int>& fixed_nodes)
    : n_total_(A.rows()) {
  if (!std::is_sorted(fixed_nodes.begin(), fixed_nodes.end()) ||
      std::adjacent_find(fixed_nodes.begin(), fixed_nodes.end()) != fixed_nodes.end())
    throw std::invalid_argument("Dirichlet node list must be sorted and unique");
  if (!fixed_nodes.empty() && (fixed_nodes.front() < 0 || fixed_nodes.back() >= n_total_))
    throw std::invalid_argument("Dirichlet node id out of range");

  std::vector<char> is_fixed(n_total_, 0);
  for (const int n : fixed_nodes) is_fixed[n] = 1;
  fixed_nodes_.resize(static_cast<Index>(fixed_nodes.size()));
  std::copy(fixed_nodes.begin(), fixed_nodes.end(), fixed_nodes_.data());
  free_nodes_.resize(n_total_ - fixed_nodes_.size());
  Eigen::VectorXi to_local = Eigen::VectorXi::Constant(n_total_, -1);
  Index nf = 0, nb = 0;
  for (Index n = 0; n < n_total_; ++n) {
    if (is_fixed[n])
      to_local(n) = static_cast<int>(nb++);
    else {
      free_nodes_(nf) = static_cast<int>(n);
      to_local(n) = static_cast<int>(nf++);
    }
  }

  std::vector<Triplet> ff, fb;
  for (Index col = 0; col < A.outerSize(); ++col) {
    for (SparseOperator::InnerIterator it(A, col); it; ++it) {
      const Index r = it.row(), c = it.col();
      if (is_fixed[r]) continue;
      if (is_fixed[c])
        fb.emplace_back(to_local(r), to_local(c), it.value());
      else
        ff.emplace_back(to_local(r), to_local(c), it.value());
    }
  }
  A_ff_.resize(nf, nf);
  A_ff_.setFromTriplets(ff.begin(), ff.end());
  A_fb_.resize(nf, fixed_nodes_.size());
  A_fb_.setFromTriplets(fb.begin(), fb.end());
  cg_.compute(A_ff_);
}

Vector DirichletSystem::solve(const Vector& fixed_values, const Vector& load,
                              const SolverOptions& opts) const {
  if (fixed_values.size() != fixed_nodes_.size())
    throw std::invalid_argument("fixed value count does not match constrained node count");
  Vector u(n_total_);
  for (Index i = 0; i < fixed_nodes_.size(); ++i) u(fixed_nodes_(i)) = fixed_values(i);
  if (n_free() == 0) return u;

  Vector rhs = -(A_fb_ * fixed_values);
  if (load.size() != 0) {
    if (load.size() != n_total_)
      throw std::invalid_argument("load vector must have one entry per node");
    for (Index i = 0; i < free_nodes_.size(); ++i) rhs(i) += load(free_nodes_(i));
  }

  cg_.setTolerance(opts.rel_tol);
  cg_.setMaxIterations(std::max<Index>(1, opts.max_iter_factor * n_total_));
  const Vector x = cg_.solve(rhs);
  if (cg_.info() != Eigen::Success)
    throw SolverError("conjugate gradient failed to converge: " +
                      std::to_string(cg_.iterations()) + " iterations, residual " +
                      std::to_string(cg_.error()));
  for (Index i = 0; i < free_nodes_.size(); ++i) u(free_nodes_(i)) = x(i);
  return u;
}

NodalField solve_forward(const SimplexMesh& mesh, const ElementGeometry& geom,
                         const ElementField& k, const DirichletData& bc,
                         const SolverOptions& opts) {
  const SparseOperator A = assemble_stiffness(mesh, geom, k);
  const DirichletSystem system(A, bc.nodes);
  return system.solve(bc.values, Vector(), opts);
}

FaceField boundary_normal_flux(const SimplexMesh& mesh, const ElementGeometry& geom,
                               const ElementField& k, const NodalField& u) {
  FaceField flux(mesh.n_bfaces());
  for (Index f = 0; f < mesh.n_bfaces(); ++f) {
    const Index el = mesh.bface_element(f);
    flux(f) = k(el) * mesh.bface_normal.row(f).dot(element_gradient(mesh, geom, el, u));
  }
  return flux;
}

}  // namespace calderon
