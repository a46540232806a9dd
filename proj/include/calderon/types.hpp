#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace calderon {

using Real = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;
using IntVector = Eigen::VectorXi;
using IntMatrix = Eigen::MatrixXi;
using SparseOperator = Eigen::SparseMatrix<Real>;
using Triplet = Eigen::Triplet<Real>;
using Index = Eigen::Index;

/// Nodal fields are indexed by mesh node, element fields by element,
/// face fields by boundary face. All three are dense vectors; the
/// distinction is documented at each interface.
using NodalField = Vector;
using ElementField = Vector;
using FaceField = Vector;

/// Raised when an iterative or direct linear solve fails to converge
/// or the operator is unusable (indefinite, singular).
class SolverError : public std::runtime_error {
public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised on malformed input files; the message names the offending line.
class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace calderon
