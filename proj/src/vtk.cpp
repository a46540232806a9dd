#include "calderon/vtk.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

namespace calderon {

namespace {

void check_name(const std::string& name) {
  if (name.empty() ||
      std::any_of(name.begin(), name.end(), [](unsigned char c) { return std::isspace(c); }))
    throw std::invalid_argument("VTK field names must be nonempty without whitespace: '" +
                                name + "'");
}

}  // namespace

void write_vtk(const std::string& path, const SimplexMesh& mesh, const VtkFields& fields,
               const std::string& title) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write VTK file: " + path);
  out.precision(17);

  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_nodes() << " double\n";
  for (Index i = 0; i < mesh.n_nodes(); ++i) {
    for (int c = 0; c < 3; ++c)
      out << (c ? " " : "") << (c < mesh.dim ? mesh.nodes(i, c) : 0.0);
    out << "\n";
  }

  const int npe = mesh.nodes_per_element();
  out << "CELLS " << mesh.n_elements() << " " << mesh.n_elements() * (npe + 1) << "\n";
  for (Index el = 0; el < mesh.n_elements(); ++el) {
    out << npe;
    for (int i = 0; i < npe; ++i) out << " " << mesh.elements(el, i);
    out << "\n";
  }
  const int cell_type = mesh.dim == 1 ? 3 : mesh.dim == 2 ? 5 : 10;
  out << "CELL_TYPES " << mesh.n_elements() << "\n";
  for (Index el = 0; el < mesh.n_elements(); ++el) out << cell_type << "\n";

  if (!fields.point_scalars.empty()) {
    out << "POINT_DATA " << mesh.n_nodes() << "\n";
    for (const auto& [name, values] : fields.point_scalars) {
      check_name(name);
      if (values.size() != mesh.n_nodes())
        throw std::invalid_argument("point field '" + name + "' must have one value per node");
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (Index i = 0; i < values.size(); ++i) out << values(i) << "\n";
    }
  }

  if (!fields.cell_scalars.empty() || !fields.cell_vectors.empty()) {
    out << "CELL_DATA " << mesh.n_elements() << "\n";
    for (const auto& [name, values] : fields.cell_scalars) {
      check_name(name);
      if (values.size() != mesh.n_elements())
        throw std::invalid_argument("cell field '" + name +
                                    "' must have one value per element");
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (Index i = 0; i < values.size(); ++i) out << values(i) << "\n";
    }
    for (const auto& [name, values] : fields.cell_vectors) {
      check_name(name);
      if (values.rows() != mesh.n_elements() || values.cols() != mesh.dim)
        throw std::invalid_argument("cell vector field '" + name +
                                    "' must be n_elements x dim");
      out << "VECTORS " << name << " double\n";
      for (Index el = 0; el < values.rows(); ++el) {
        for (int c = 0; c < 3; ++c)
          out << (c ? " " : "") << (c < mesh.dim ? values(el, c) : 0.0);
        out << "\n";
      }
    }
  }
  if (!out) throw std::runtime_error("failed while writing VTK file: " + path);
}

}  // namespace calderon
