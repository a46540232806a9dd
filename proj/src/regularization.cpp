#include "calderon/regularization.hpp"

#include "calderon/fem.hpp"

#include <algorithm>
#include <string>

namespace calderon {

NodalField elements_to_points(const SimplexMesh& mesh, const ElementGeometry& geom,
                              const ElementField& g) {
  if (g.size() != mesh.n_elements())
    throw std::invalid_argument("field must have one value per element");
  Vector acc = Vector::Zero(mesh.n_nodes());
  Vector vol = Vector::Zero(mesh.n_nodes());
  for (Index el = 0; el < mesh.n_elements(); ++el)
    for (int i = 0; i <= mesh.dim; ++i) {
      acc(mesh.elements(el, i)) += geom.volume(el) * g(el);
      vol(mesh.elements(el, i)) += geom.volume(el);
    }
  return acc.cwiseQuotient(vol);
}

ElementField points_to_elements(const SimplexMesh& mesh, const NodalField& s) {
  if (s.size() != mesh.n_nodes())
    throw std::invalid_argument("field must have one value per node");
  ElementField g(mesh.n_elements());
  for (Index el = 0; el < mesh.n_elements(); ++el) {
    Real sum = 0;
    for (int i = 0; i <= mesh.dim; ++i) sum += s(mesh.elements(el, i));
    g(el) = sum / (mesh.dim + 1);
  }
  return g;
}

ElementField smooth_spea(const SimplexMesh& mesh, const ElementGeometry& geom,
                         const ElementField& g, int passes) {
  if (passes < 1) throw std::invalid_argument("smoothing passes must be >= 1");
  ElementField out = g;
  for (int p = 0; p < passes; ++p) out = points_to_elements(mesh, elements_to_points(mesh, geom, out));
  return out;
}

MassMatrices assemble_mass(const SimplexMesh& mesh, const ElementGeometry& geom) {
  const int d = mesh.dim;
  const Real scale = 1.0 / Real((d + 1) * (d + 2));
  MassMatrices mass;
  mass.lumped = Vector::Zero(mesh.n_nodes());
  std::vector<Triplet> triplets;
  triplets.reserve(mesh.n_elements() * (d + 1) * (d + 1));
  for (Index el = 0; el < mesh.n_elements(); ++el) {
    const Real v = geom.volume(el);
    for (int i = 0; i <= d; ++i) {
      const int ni = mesh.elements(el, i);
      mass.lumped(ni) += v / (d + 1);
      for (int j = 0; j <= d; ++j)
        triplets.emplace_back(ni, mesh.elements(el, j), v * scale * (i == j ? 2.0 : 1.0));
    }
  }
  mass.consistent.resize(mesh.n_nodes(), mesh.n_nodes());
  mass.consistent.setFromTriplets(triplets.begin(), triplets.end());
  return mass;
}

namespace {

SparseOperator sparse_diagonal(const Vector& d) {
  SparseOperator D(d.size(), d.size());
  D.reserve(Eigen::VectorXi::Ones(static_cast<int>(d.size())));
  for (Index i = 0; i < d.size(); ++i) D.insert(i, i) = d(i);
  D.makeCompressed();
  return D;
}

NodalField solve_spd(const SparseOperator& op, const Vector& rhs, const char* name) {
  Eigen::SimplicialLDLT<SparseOperator> ldlt(op);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0).any())
    throw SolverError(std::string(name) + " operator is not positive definite");
  return ldlt.solve(rhs);
}

}  // namespace

NodalField smooth_h1(const SimplexMesh& mesh, const ElementGeometry& geom,
                     const NodalField& g, Real lambda) {
  if (lambda < 0) throw std::invalid_argument("H1 smoothing weight must be non-negative");
  if (lambda == 0) return g;
  const MassMatrices mass = assemble_mass(mesh, geom);
  const SparseOperator K =
      assemble_stiffness(mesh, geom, ElementField::Ones(mesh.n_elements()));
  const SparseOperator op = mass.consistent + lambda * K;
  return solve_spd(op, mass.consistent * g, "H1 smoothing");
}

NodalField smooth_pseudo_laplacian(const SimplexMesh& mesh, const ElementGeometry& geom,
                                   const NodalField& g, Real lambda_pl) {
  if (lambda_pl < 0)
    throw std::invalid_argument("pseudo-Laplacian weight must be non-negative");
  const MassMatrices mass = assemble_mass(mesh, geom);
  SparseOperator op = (1.0 - lambda_pl) * mass.consistent;
  op += sparse_diagonal(lambda_pl * mass.lumped);
  return solve_spd(op, mass.consistent * g, "pseudo-Laplacian");
}

NodalField relax_solve(const SparseOperator& L, const Vector& rhs, const Vector& initial,
                       Real dtau, int steps) {
  if (L.rows() != L.cols() || L.rows() != rhs.size() || rhs.size() != initial.size())
    throw std::invalid_argument("relaxation operands must share one size");
  if (steps < 1) throw std::invalid_argument("relaxation needs at least one step");
  if (!(dtau > 0) || !(dtau < 2))
    throw std::invalid_argument("relaxation factor must lie in (0, 2)");
  const Vector diag = L.diagonal();
  if ((diag.array() == 0).any())
    throw std::invalid_argument("relaxation requires a nonzero diagonal");
  Vector u = initial;
  Real prev_residual = (rhs - L * u).norm();
  // Residuals at the rounding floor fluctuate without meaning; only
  // growth above this scale counts as divergence.
  const Real floor = Real(1e-14) * std::max(rhs.norm(), Real(1));
  int growth = 0;
  for (int s = 0; s < steps; ++s) {
    const Vector r = rhs - L * u;
    u += dtau * r.cwiseQuotient(diag);
    const Real res = (rhs - L * u).norm();
    growth = (res > prev_residual && res > floor) ? growth + 1 : 0;
    if (growth >= 3)
      throw SolverError("relaxation diverges: residual grew over three steps (dtau too large)");
    prev_residual = res;
  }
  return u;
}

void RegionMap::validate(const SimplexMesh& mesh) const {
  if (static_cast<Index>(element_region.size()) != mesh.n_elements())
    throw std::invalid_argument("region map must assign every element");
  for (const int r : element_region)
    if (r < 0 || r >= n_regions) throw std::invalid_argument("region id out of range");
}

RegionMap make_lattice_regions(const SimplexMesh& mesh, const ElementGeometry& geom,
                               const IntVector& divisions) {
  if (divisions.size() != mesh.dim)
    throw std::invalid_argument("region lattice must match the mesh dimension");
  for (Index a = 0; a < divisions.size(); ++a)
    if (divisions(a) < 1) throw std::invalid_argument("region divisions must be positive");

  const RowVector lo = mesh.nodes.colwise().minCoeff();
  const RowVector hi = mesh.nodes.colwise().maxCoeff();
  RegionMap map;
  map.n_regions = divisions.prod();
  map.element_region.resize(mesh.n_elements());
  map.region_volume = Vector::Zero(map.n_regions);
  for (Index el = 0; el < mesh.n_elements(); ++el) {
    int region = 0, stride = 1;
    for (int a = 0; a < mesh.dim; ++a) {
      const Real rel = (geom.centroid(el, a) - lo(a)) / (hi(a) - lo(a));
      const int cell = std::min(divisions(a) - 1,
                                std::max(0, static_cast<int>(rel * divisions(a))));
      region += stride * cell;
      stride *= divisions(a);
    }
    map.element_region[el] = region;
    map.region_volume(region) += geom.volume(el);
  }
  for (int r = 0; r < map.n_regions; ++r)
    if (map.region_volume(r) == 0)
      throw std::invalid_argument("lattice region " + std::to_string(r) +
                                  " contains no elements");
  return map;
}

Vector project_gradient(const ElementField& g, const RegionMap& regions) {
  if (g.size() != static_cast<Index>(regions.element_region.size()))
    throw std::invalid_argument("gradient must have one value per element");
  Vector density = Vector::Zero(regions.n_regions);
  for (Index el = 0; el < g.size(); ++el) density(regions.element_region[el]) += g(el);
  return density.cwiseQuotient(regions.region_volume);
}

ElementField expand_regions(const RegionMap& regions, const Vector& region_values) {
  if (region_values.size() != regions.n_regions)
    throw std::invalid_argument("need one value per region");
  ElementField out(static_cast<Index>(regions.element_region.size()));
  for (Index el = 0; el < out.size(); ++el) out(el) = region_values(regions.element_region[el]);
  return out;
}

GradientSmoother::GradientSmoother(const SimplexMesh& mesh, const ElementGeometry& geom,
                                   const SmoothingConfig& config)
    : mesh_(mesh), geom_(geom), config_(config) {
  if (config_.kind == SmoothingKind::none || config_.kind == SmoothingKind::spea) return;
  const MassMatrices mass = assemble_mass(mesh_, geom_);
  mass_ = mass.consistent;
  if (config_.kind == SmoothingKind::h1) {
    if (config_.lambda_h1 < 0)
      throw std::invalid_argument("H1 smoothing weight must be non-negative");
    op_ = mass_ + config_.lambda_h1 *
                      assemble_stiffness(mesh_, geom_, ElementField::Ones(mesh_.n_elements()));
  } else {
    if (config_.lambda_pl < 0)
      throw std::invalid_argument("pseudo-Laplacian weight must be non-negative");
    op_ = (1.0 - config_.lambda_pl) * mass_;
    op_ += sparse_diagonal(config_.lambda_pl * mass.lumped);
  }
  const bool direct = !(config_.kind == SmoothingKind::pseudo_laplacian && config_.relaxed);
  if (direct) {
    direct_.compute(op_);
    if (direct_.info() != Eigen::Success || (direct_.vectorD().array() <= 0).any())
      throw SolverError("smoothing operator is not positive definite");
  }
}

NodalField GradientSmoother::smooth_nodal(const NodalField& g) const {
  switch (config_.kind) {
    case SmoothingKind::none:
    case SmoothingKind::spea:
      return g;
    case SmoothingKind::pseudo_laplacian:
      if (config_.relaxed)
        return relax_solve(op_, mass_ * g, g, config_.dtau, config_.relax_steps);
      [[fallthrough]];
    case SmoothingKind::h1:
    default:
      return direct_.solve(mass_ * g);
  }
}

ElementField GradientSmoother::smooth_gradient(const ElementField& element_grad) const {
  if (config_.kind == SmoothingKind::none) return element_grad;
  const ElementField density = element_grad.cwiseQuotient(geom_.volume);
  if (config_.kind == SmoothingKind::spea)
    return smooth_spea(mesh_, geom_, density, config_.spea_passes);
  return points_to_elements(mesh_, smooth_nodal(elements_to_points(mesh_, geom_, density)));
}

}  // namespace calderon
