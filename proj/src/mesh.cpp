#include "calderon/mesh.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

namespace calderon {

namespace {

std::string describe(const char* what, Index id) {
  std::ostringstream os;
  os << what << " " << id;
  return os.str();
}

// Shape-function gradients and volume of one positively oriented simplex.
// X is (dim+1) x dim vertex coordinates, G receives (dim+1) x dim gradients.
Real shape_gradients(int dim, const Matrix& X, Matrix& G) {
  G.resize(dim + 1, dim);
  Real vol = 0;
  if (dim == 1) {
    const Real j = X(1, 0) - X(0, 0);
    vol = j;
    G(1, 0) = 1.0 / j;
  } else if (dim == 2) {
    Eigen::Matrix2d J;
    J.col(0) = (X.row(1) - X.row(0)).transpose();
    J.col(1) = (X.row(2) - X.row(0)).transpose();
    const Real det = J.determinant();
    vol = det / 2.0;
    const Eigen::Matrix2d Ji = J.inverse();
    G.row(1) = Ji.row(0);
    G.row(2) = Ji.row(1);
  } else {
    Eigen::Matrix3d J;
    J.col(0) = (X.row(1) - X.row(0)).transpose();
    J.col(1) = (X.row(2) - X.row(0)).transpose();
    J.col(2) = (X.row(3) - X.row(0)).transpose();
    const Real det = J.determinant();
    vol = det / 6.0;
    const Eigen::Matrix3d Ji = J.inverse();
    G.row(1) = Ji.row(0);
    G.row(2) = Ji.row(1);
    G.row(3) = Ji.row(2);
  }
  G.row(0) = -G.bottomRows(dim).colwise().sum();
  return vol;
}

Real signed_volume(const SimplexMesh& mesh, Index el) {
  const int d = mesh.dim;
  if (d == 1) {
    return mesh.nodes(mesh.elements(el, 1), 0) - mesh.nodes(mesh.elements(el, 0), 0);
  }
  if (d == 2) {
    Eigen::Matrix2d J;
    J.col(0) = (mesh.nodes.row(mesh.elements(el, 1)) - mesh.nodes.row(mesh.elements(el, 0))).transpose();
    J.col(1) = (mesh.nodes.row(mesh.elements(el, 2)) - mesh.nodes.row(mesh.elements(el, 0))).transpose();
    return J.determinant() / 2.0;
  }
  Eigen::Matrix3d J;
  J.col(0) = (mesh.nodes.row(mesh.elements(el, 1)) - mesh.nodes.row(mesh.elements(el, 0))).transpose();
  J.col(1) = (mesh.nodes.row(mesh.elements(el, 2)) - mesh.nodes.row(mesh.elements(el, 0))).transpose();
  J.col(2) = (mesh.nodes.row(mesh.elements(el, 3)) - mesh.nodes.row(mesh.elements(el, 0))).transpose();
  return J.determinant() / 6.0;
}

using FaceKey = std::array<int, 3>;  // sorted node ids, unused slots = -1

FaceKey face_key(const IntMatrix& faces, Index row, int dim) {
  FaceKey key{-1, -1, -1};
  for (int i = 0; i < dim; ++i) key[i] = faces(row, i);
  std::sort(key.begin(), key.begin() + dim);
  return key;
}

// Faces of element el: local face i is the vertex set without local node i.
IntMatrix element_faces(const SimplexMesh& mesh, Index el) {
  const int d = mesh.dim;
  IntMatrix faces(d + 1, d);
  for (int i = 0; i <= d; ++i) {
    int c = 0;
    for (int j = 0; j <= d; ++j)
      if (j != i) faces(i, c++) = mesh.elements(el, j);
  }
  return faces;
}

// Boundary faces are element faces owned by exactly one element.
std::map<FaceKey, std::pair<int, int>> boundary_face_map(const SimplexMesh& mesh) {
  std::map<FaceKey, std::pair<int, int>> count_owner;  // key -> (count, owner)
  for (Index el = 0; el < mesh.n_elements(); ++el) {
    const IntMatrix faces = element_faces(mesh, el);
    for (int i = 0; i <= mesh.dim; ++i) {
      const FaceKey key = face_key(faces, i, mesh.dim);
      auto [it, inserted] = count_owner.try_emplace(key, 1, static_cast<int>(el));
      if (!inserted) ++it->second.first;
    }
  }
  for (auto it = count_owner.begin(); it != count_owner.end();) {
    if (it->second.first != 1)
      it = count_owner.erase(it);
    else
      ++it;
  }
  return count_owner;
}

void orient_elements(SimplexMesh& mesh) {
  for (Index el = 0; el < mesh.n_elements(); ++el) {
    const Real v = signed_volume(mesh, el);
    if (v == 0.0)
      throw std::invalid_argument("degenerate " + describe("element", el) + ": zero volume");
    if (v < 0.0) std::swap(mesh.elements(el, mesh.dim - 1), mesh.elements(el, mesh.dim));
  }
}

// Unit outward normals and face measures; requires oriented elements and
// bface_nodes/bface_element filled and validated.
void compute_face_data(SimplexMesh& mesh) {
  const int d = mesh.dim;
  mesh.bface_normal.resize(mesh.n_bfaces(), d);
  mesh.bface_measure.resize(mesh.n_bfaces());
  Matrix X(d + 1, d), G;
  for (Index f = 0; f < mesh.n_bfaces(); ++f) {
    const Index el = mesh.bface_element(f);
    const FaceKey key = face_key(mesh.bface_nodes, f, d);
    int opposite = -1;
    for (int i = 0; i <= d; ++i) {
      const int node = mesh.elements(el, i);
      if (!std::binary_search(key.begin(), key.begin() + d, node)) {
        if (opposite >= 0)
          throw std::invalid_argument(describe("boundary face", f) + " is not a face of its element");
        opposite = i;
      }
    }
    if (opposite < 0)
      throw std::invalid_argument(describe("boundary face", f) + " is not a face of its element");
    for (int i = 0; i <= d; ++i) X.row(i) = mesh.nodes.row(mesh.elements(el, i));
    const Real vol = shape_gradients(d, X, G);
    // N_opposite vanishes on the face and grows inward, so the outward
    // normal is the negated, normalised gradient; |grad N| = area/(d*vol).
    const RowVector g = G.row(opposite);
    const Real gn = g.norm();
    mesh.bface_normal.row(f) = -g / gn;
    mesh.bface_measure(f) = (d == 1) ? 1.0 : d * vol * gn;
  }
}

void build_adjacency(SimplexMesh& mesh) {
  mesh.node_to_elements.assign(mesh.n_nodes(), {});
  for (Index el = 0; el < mesh.n_elements(); ++el)
    for (int i = 0; i <= mesh.dim; ++i)
      mesh.node_to_elements[mesh.elements(el, i)].push_back(static_cast<int>(el));
}

void extract_boundary(SimplexMesh& mesh) {
  const auto map = boundary_face_map(mesh);
  // Deterministic order: ascending owner element, then sorted node ids.
  std::vector<std::pair<FaceKey, int>> faces;
  faces.reserve(map.size());
  for (const auto& [key, co] : map) faces.emplace_back(key, co.second);
  std::sort(faces.begin(), faces.end(), [](const auto& a, const auto& b) {
    return std::tie(a.second, a.first) < std::tie(b.second, b.first);
  });
  mesh.bface_nodes.resize(static_cast<Index>(faces.size()), mesh.dim);
  mesh.bface_element.resize(static_cast<Index>(faces.size()));
  for (Index f = 0; f < static_cast<Index>(faces.size()); ++f) {
    for (int i = 0; i < mesh.dim; ++i) mesh.bface_nodes(f, i) = faces[f].first[i];
    mesh.bface_element(f) = faces[f].second;
  }
}

}  // namespace

std::vector<int> SimplexMesh::boundary_nodes() const {
  std::set<int> ids;
  for (Index f = 0; f < n_bfaces(); ++f)
    for (int i = 0; i < dim; ++i) ids.insert(bface_nodes(f, i));
  return {ids.begin(), ids.end()};
}

RowVector element_gradient(const SimplexMesh& mesh, const ElementGeometry& geom,
                           Index element, const NodalField& u) {
  RowVector g = RowVector::Zero(mesh.dim);
  for (int i = 0; i <= mesh.dim; ++i)
    g += u(mesh.elements(element, i)) * geom.grad(element, i);
  return g;
}

SimplexMesh generate_box_mesh(const Vector& lower, const Vector& upper,
                              const IntVector& divisions) {
  const int d = static_cast<int>(divisions.size());
  if (d < 1 || d > 3) throw std::invalid_argument("mesh dimension must be 1, 2 or 3");
  if (lower.size() != d || upper.size() != d)
    throw std::invalid_argument("lower/upper bounds must match the division count");
  for (int a = 0; a < d; ++a) {
    if (divisions(a) < 1) throw std::invalid_argument("divisions must be positive");
    if (!(upper(a) > lower(a))) throw std::invalid_argument("box must have positive extent");
  }

  SimplexMesh mesh;
  mesh.dim = d;

  if (d == 1) {
    const int n = divisions(0);
    mesh.nodes.resize(n + 1, 1);
    for (int i = 0; i <= n; ++i)
      mesh.nodes(i, 0) = lower(0) + (upper(0) - lower(0)) * Real(i) / Real(n);
    mesh.elements.resize(n, 2);
    for (int i = 0; i < n; ++i) {
      mesh.elements(i, 0) = i;
      mesh.elements(i, 1) = i + 1;
    }
  } else if (d == 2) {
    const int nx = divisions(0), ny = divisions(1);
    const auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    mesh.nodes.resize((nx + 1) * (ny + 1), 2);
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) {
        mesh.nodes(id(i, j), 0) = lower(0) + (upper(0) - lower(0)) * Real(i) / Real(nx);
        mesh.nodes(id(i, j), 1) = lower(1) + (upper(1) - lower(1)) * Real(j) / Real(ny);
      }
    mesh.elements.resize(2 * nx * ny, 3);
    Index el = 0;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        // Split along the cell diagonal (i,j) -> (i+1,j+1); the pattern is
        // invariant under swapping the axes.
        const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), e = id(i, j + 1);
        mesh.elements.row(el++) << a, b, c;
        mesh.elements.row(el++) << a, c, e;
      }
  } else {
    const int nx = divisions(0), ny = divisions(1), nz = divisions(2);
    const auto id = [nx, ny](int i, int j, int k) {
      return (k * (ny + 1) + j) * (nx + 1) + i;
    };
    mesh.nodes.resize((nx + 1) * (ny + 1) * (nz + 1), 3);
    for (int k = 0; k <= nz; ++k)
      for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
          const int n = id(i, j, k);
          mesh.nodes(n, 0) = lower(0) + (upper(0) - lower(0)) * Real(i) / Real(nx);
          mesh.nodes(n, 1) = lower(1) + (upper(1) - lower(1)) * Real(j) / Real(ny);
          mesh.nodes(n, 2) = lower(2) + (upper(2) - lower(2)) * Real(k) / Real(nz);
        }
    // Six tetrahedra per cell along vertex chains of the unit cube, one per
    // axis permutation; conforming across cells and symmetric in the axes.
    static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                        {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    mesh.elements.resize(6 * nx * ny * nz, 4);
    Index el = 0;
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
          for (const auto& p : perms) {
            int v[3] = {i, j, k};
            mesh.elements(el, 0) = id(v[0], v[1], v[2]);
            for (int s = 0; s < 3; ++s) {
              ++v[p[s]];
              mesh.elements(el, s + 1) = id(v[0], v[1], v[2]);
            }
            ++el;
          }
  }

  extract_boundary(mesh);
  finalize_mesh(mesh);
  return mesh;
}

void finalize_mesh(SimplexMesh& mesh) {
  if (mesh.dim < 1 || mesh.dim > 3) throw std::invalid_argument("mesh dimension must be 1, 2 or 3");
  if (mesh.elements.cols() != mesh.dim + 1)
    throw std::invalid_argument("elements must have dim+1 nodes");
  orient_elements(mesh);

  const auto map = boundary_face_map(mesh);
  if (mesh.bface_nodes.rows() == 0 && !map.empty()) {
    extract_boundary(mesh);
  } else {
    if (static_cast<size_t>(mesh.n_bfaces()) != map.size())
      throw std::invalid_argument("boundary face list does not cover the mesh boundary: expected " +
                                  std::to_string(map.size()) + " faces, got " +
                                  std::to_string(mesh.n_bfaces()));
    // Ownership is validated when the caller supplied it (the reader
    // does) and derived from the element faces otherwise.
    const bool owners_given = mesh.bface_element.size() == mesh.n_bfaces();
    if (!owners_given) mesh.bface_element.resize(mesh.n_bfaces());
    std::set<FaceKey> seen;
    for (Index f = 0; f < mesh.n_bfaces(); ++f) {
      const FaceKey key = face_key(mesh.bface_nodes, f, mesh.dim);
      const auto it = map.find(key);
      if (it == map.end())
        throw std::invalid_argument(describe("boundary face", f) + " is interior or unknown");
      if (owners_given && it->second.second != mesh.bface_element(f))
        throw std::invalid_argument(describe("boundary face", f) + " names the wrong element");
      mesh.bface_element(f) = it->second.second;
      if (!seen.insert(key).second)
        throw std::invalid_argument(describe("boundary face", f) + " is duplicated");
    }
  }

  compute_face_data(mesh);
  build_adjacency(mesh);
}

ElementGeometry compute_geometry(const SimplexMesh& mesh) {
  const int d = mesh.dim;
  ElementGeometry geom;
  geom.dim = d;
  geom.volume.resize(mesh.n_elements());
  geom.shape_grad.resize(mesh.n_elements() * (d + 1), d);
  geom.centroid.resize(mesh.n_elements(), d);
  geom.h.resize(mesh.n_elements());

  Matrix X(d + 1, d), G;
  for (Index el = 0; el < mesh.n_elements(); ++el) {
    for (int i = 0; i <= d; ++i) X.row(i) = mesh.nodes.row(mesh.elements(el, i));
    const Real vol = shape_gradients(d, X, G);
    if (!(vol > 0))
      throw std::invalid_argument("degenerate " + describe("element", el) + ": zero volume");
    geom.volume(el) = vol;
    geom.shape_grad.middleRows(el * (d + 1), d + 1) = G;
    geom.centroid.row(el) = X.colwise().mean();
    Real len = 0;
    int n_edges = 0;
    for (int i = 0; i <= d; ++i)
      for (int j = i + 1; j <= d; ++j, ++n_edges) len += (X.row(i) - X.row(j)).norm();
    geom.h(el) = len / n_edges;
  }
  return geom;
}

SimplexMesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file: " + path);

  std::vector<std::pair<int, std::vector<std::string>>> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
    if (!tokens.empty()) records.emplace_back(lineno, std::move(tokens));
  }

  const auto fail = [&path](int ln, const std::string& msg) -> ParseError {
    return ParseError(path + ":" + std::to_string(ln) + ": " + msg);
  };
  const auto parse_int = [&fail](int ln, const std::string& tok) {
    size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(tok, &pos);
    } catch (const std::exception&) {
      throw fail(ln, "expected integer, got '" + tok + "'");
    }
    if (pos != tok.size()) throw fail(ln, "expected integer, got '" + tok + "'");
    return static_cast<int>(v);
  };
  const auto parse_real = [&fail](int ln, const std::string& tok) {
    size_t pos = 0;
    Real v = 0;
    try {
      v = std::stod(tok, &pos);
    } catch (const std::exception&) {
      throw fail(ln, "expected number, got '" + tok + "'");
    }
    if (pos != tok.size()) throw fail(ln, "expected number, got '" + tok + "'");
    return v;
  };

  if (records.empty()) throw fail(1, "missing header 'dim n_nodes n_elements n_bfaces'");
  size_t r = 0;
  {
    const auto& [ln, toks] = records[r];
    if (toks.size() != 4) throw fail(ln, "header must be 'dim n_nodes n_elements n_bfaces'");
  }

  SimplexMesh mesh;
  const int hline = records[0].first;
  mesh.dim = parse_int(hline, records[0].second[0]);
  const int n_nodes = parse_int(hline, records[0].second[1]);
  const int n_elements = parse_int(hline, records[0].second[2]);
  const int n_bfaces = parse_int(hline, records[0].second[3]);
  if (mesh.dim < 1 || mesh.dim > 3) throw fail(hline, "dimension must be 1, 2 or 3");
  if (n_nodes < mesh.dim + 1) throw fail(hline, "node count too small for dimension");
  if (n_elements < 1 || n_bfaces < 0) throw fail(hline, "element/face counts must be positive");
  ++r;

  if (records.size() != 1 + size_t(n_nodes) + size_t(n_elements) + size_t(n_bfaces)) {
    const int ln = records.back().first;
    throw fail(ln, "file has " + std::to_string(records.size() - 1) + " data lines, header promises " +
                       std::to_string(n_nodes + n_elements + n_bfaces));
  }

  mesh.nodes.resize(n_nodes, mesh.dim);
  for (int i = 0; i < n_nodes; ++i, ++r) {
    const auto& [ln, toks] = records[r];
    if (static_cast<int>(toks.size()) != mesh.dim)
      throw fail(ln, "node line must have " + std::to_string(mesh.dim) + " coordinates");
    for (int c = 0; c < mesh.dim; ++c) mesh.nodes(i, c) = parse_real(ln, toks[c]);
  }

  mesh.elements.resize(n_elements, mesh.dim + 1);
  for (int e = 0; e < n_elements; ++e, ++r) {
    const auto& [ln, toks] = records[r];
    if (static_cast<int>(toks.size()) != mesh.dim + 1)
      throw fail(ln, "element line must have " + std::to_string(mesh.dim + 1) + " node indices");
    for (int c = 0; c <= mesh.dim; ++c) {
      const int id = parse_int(ln, toks[c]);
      if (id < 1 || id > n_nodes)
        throw fail(ln, "node index " + std::to_string(id) + " out of range [1, " +
                           std::to_string(n_nodes) + "]");
      mesh.elements(e, c) = id - 1;
    }
  }

  mesh.bface_nodes.resize(n_bfaces, mesh.dim);
  mesh.bface_element.resize(n_bfaces);
  std::vector<int> bface_lines(n_bfaces);
  for (int f = 0; f < n_bfaces; ++f, ++r) {
    const auto& [ln, toks] = records[r];
    bface_lines[f] = ln;
    if (static_cast<int>(toks.size()) != mesh.dim + 1)
      throw fail(ln, "boundary face line must have " + std::to_string(mesh.dim) +
                         " node indices and the owning element");
    for (int c = 0; c < mesh.dim; ++c) {
      const int id = parse_int(ln, toks[c]);
      if (id < 1 || id > n_nodes)
        throw fail(ln, "node index " + std::to_string(id) + " out of range [1, " +
                           std::to_string(n_nodes) + "]");
      mesh.bface_nodes(f, c) = id - 1;
    }
    const int el = parse_int(ln, toks[mesh.dim]);
    if (el < 1 || el > n_elements)
      throw fail(ln, "element index " + std::to_string(el) + " out of range [1, " +
                         std::to_string(n_elements) + "]");
    mesh.bface_element(f) = el - 1;
  }

  try {
    finalize_mesh(mesh);
  } catch (const std::invalid_argument& err) {
    // Map structural defects back to the face line that declared them.
    const std::string what = err.what();
    for (int f = 0; f < n_bfaces; ++f) {
      if (what.find("boundary face " + std::to_string(f) + " ") != std::string::npos)
        throw fail(bface_lines[f], what);
    }
    throw ParseError(path + ": " + what);
  }
  return mesh;
}

void write_mesh(const SimplexMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file: " + path);
  out.precision(17);
  out << mesh.dim << " " << mesh.n_nodes() << " " << mesh.n_elements() << " "
      << mesh.n_bfaces() << "\n";
  for (Index i = 0; i < mesh.n_nodes(); ++i) {
    for (int c = 0; c < mesh.dim; ++c) out << (c ? " " : "") << mesh.nodes(i, c);
    out << "\n";
  }
  for (Index e = 0; e < mesh.n_elements(); ++e) {
    for (int c = 0; c <= mesh.dim; ++c) out << (c ? " " : "") << mesh.elements(e, c) + 1;
    out << "\n";
  }
  for (Index f = 0; f < mesh.n_bfaces(); ++f) {
    for (int c = 0; c < mesh.dim; ++c) out << (c ? " " : "") << mesh.bface_nodes(f, c) + 1;
    out << " " << mesh.bface_element(f) + 1 << "\n";
  }
  if (!out) throw std::runtime_error("failed while writing mesh file: " + path);
}

}  // namespace calderon
