#pragma once

#include "calderon/types.hpp"

#include <string>
#include <vector>

namespace calderon {

/// Conforming simplex mesh in dimension 1, 2 or 3: segments, triangles
/// or tetrahedra with piecewise-linear nodal basis functions.
///
/// Invariants after construction (generator, reader, or finalize_mesh):
///  - elements are positively oriented (signed volume > 0),
///  - every boundary face belongs to exactly one element,
///  - boundary face normals are unit length and point out of the mesh,
///  - node_to_elements lists, for each node, the elements touching it
///    in ascending element order.
struct SimplexMesh {
  int dim = 0;
  Matrix nodes;             // n_nodes x dim, coordinates
  IntMatrix elements;       // n_elements x (dim+1), 0-based node ids
  IntMatrix bface_nodes;    // n_bfaces x dim, 0-based node ids
  IntVector bface_element;  // n_bfaces, owning element of each face
  Matrix bface_normal;      // n_bfaces x dim, unit outward normal
  Vector bface_measure;     // n_bfaces, length/area of each face
  std::vector<std::vector<int>> node_to_elements;

  Index n_nodes() const { return nodes.rows(); }
  Index n_elements() const { return elements.rows(); }
  Index n_bfaces() const { return bface_nodes.rows(); }
  int nodes_per_element() const { return dim + 1; }

  /// Sorted unique ids of all nodes lying on some boundary face.
  std::vector<int> boundary_nodes() const;
};

/// Per-element quantities of the affine map onto each simplex.
///
/// shape_grad stores the constant gradient of every nodal shape function:
/// row el * (dim+1) + i holds grad N_i on element el. Rows of one element
/// sum to zero (partition of unity).
struct ElementGeometry {
  int dim = 0;
  Vector volume;      // n_elements, positive measure
  Matrix shape_grad;  // (n_elements * (dim+1)) x dim
  Matrix centroid;    // n_elements x dim
  Vector h;           // n_elements, mean edge length

  RowVector grad(Index element, int local_node) const {
    return shape_grad.row(element * (dim + 1) + local_node);
  }
};

/// Gradient of a nodal field on one element (constant per element).
RowVector element_gradient(const SimplexMesh& mesh, const ElementGeometry& geom,
                           Index element, const NodalField& u);

/// Structured simplex mesh of the box [lower, upper] with divisions[d]
/// cells per axis. Cells are split into 2 triangles (2-D) or 6
/// tetrahedra (3-D) with a fixed pattern that is conforming across
/// neighbouring cells. divisions.size() selects the dimension.
SimplexMesh generate_box_mesh(const Vector& lower, const Vector& upper,
                              const IntVector& divisions);

/// Recompute derived mesh data from nodes + elements + bface_nodes:
/// element orientation, face ownership, outward normals, face measures,
/// node adjacency. Throws std::invalid_argument on degenerate elements
/// and ParseError-style messages are left to the reader; this routine
/// reports structural defects (face not on its element, interior face).
void finalize_mesh(SimplexMesh& mesh);

ElementGeometry compute_geometry(const SimplexMesh& mesh);

/// Plain ASCII mesh exchange format.
///
///   line 1:            dim n_nodes n_elements n_bfaces
///   n_nodes lines:     dim coordinates
///   n_elements lines:  dim+1 node indices, 1-based
///   n_bfaces lines:    dim node indices then the owning element, 1-based
///
/// read_mesh throws ParseError naming the 1-based line of the first
/// malformed or out-of-range entry, and rejects boundary faces whose
/// nodes do not all belong to the named element.
SimplexMesh read_mesh(const std::string& path);
void write_mesh(const SimplexMesh& mesh, const std::string& path);

}  // namespace calderon
