#pragma once

#include "calderon/mesh.hpp"
#include "calderon/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace calderon {

/// Named fields attached to a VTK snapshot. Vector fields are
/// n_elements x dim matrices (padded to 3 components on output).
struct VtkFields {
  std::vector<std::pair<std::string, NodalField>> point_scalars;
  std::vector<std::pair<std::string, ElementField>> cell_scalars;
  std::vector<std::pair<std::string, Matrix>> cell_vectors;
};

/// Legacy-ASCII VTK unstructured grid: points padded to 3-D, cells as
/// VTK_LINE / VTK_TRIANGLE / VTK_TETRA, one SCALARS block per field.
/// Field names must be nonempty and contain no whitespace.
void write_vtk(const std::string& path, const SimplexMesh& mesh, const VtkFields& fields,
               const std::string& title = "field snapshot");

}  // namespace calderon
