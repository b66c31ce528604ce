#include "shapeopt/vtk_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_vtk(const std::string& path, const TriMesh& mesh, const VtkExtras& extras) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");

  out << "# vtk DataFile Version 3.0\n";
  out << "shapeopt\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_nodes() << " double\n";
  for (const auto& p : mesh.nodes) out << fmt(p.x) << " " << fmt(p.y) << " 0\n";

  out << "CELLS " << mesh.num_cells() << " " << 4 * mesh.num_cells() << "\n";
  for (const auto& t : mesh.cells) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << mesh.num_cells() << "\n";
  for (int c = 0; c < mesh.num_cells(); ++c) out << "5\n";

  out << "CELL_DATA " << mesh.num_cells() << "\n";
  out << "SCALARS subdomain int 1\n";
  out << "LOOKUP_TABLE default\n";
  for (int l : mesh.cell_subdomain) out << l << "\n";
  for (const auto& [name, values] : extras.cell_scalars) {
    if (static_cast<int>(values.size()) != mesh.num_cells())
      throw IoError("cell field '" + name + "' size does not match mesh");
    out << "SCALARS " << name << " double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (double v : values) out << fmt(v) << "\n";
  }

  if (!extras.point_scalars.empty() || !extras.point_vectors.empty()) {
    out << "POINT_DATA " << mesh.num_nodes() << "\n";
    for (const auto& [name, field] : extras.point_scalars) {
      if (static_cast<int>(field->size()) != mesh.num_nodes())
        throw IoError("point field '" + name + "' size does not match mesh");
      out << "SCALARS " << name << " double 1\n";
      out << "LOOKUP_TABLE default\n";
      for (double v : field->v) out << fmt(v) << "\n";
    }
    for (const auto& [name, field] : extras.point_vectors) {
      if (static_cast<int>(field->size()) != mesh.num_nodes())
        throw IoError("point field '" + name + "' size does not match mesh");
      out << "VECTORS " << name << " double\n";
      for (const auto& v : field->v) out << fmt(v.x) << " " << fmt(v.y) << " 0\n";
    }
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

TriMesh read_vtk_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");

  TriMesh mesh;
  bool have_points = false, have_cells = false, have_labels = false;
  enum class Section { none, cell_data, point_data } section = Section::none;
  std::string tok;

  // token scan; the header comment line is consumed separately
  std::string line;
  std::getline(in, line);
  if (line.rfind("# vtk", 0) != 0) throw IoError("'" + path + "': not a VTK file");
  std::getline(in, line);  // title

  while (in >> tok) {
    if (tok == "ASCII" || tok == "DATASET" || tok == "UNSTRUCTURED_GRID" ||
        tok == "LOOKUP_TABLE" || tok == "default") {
      continue;
    } else if (tok == "POINTS") {
      int n;
      std::string type;
      in >> n >> type;
      mesh.nodes.resize(n);
      for (int i = 0; i < n; ++i) {
        double z;
        in >> mesh.nodes[i].x >> mesh.nodes[i].y >> z;
      }
      have_points = true;
    } else if (tok == "CELLS") {
      int m, total;
      in >> m >> total;
      mesh.cells.resize(m);
      for (int c = 0; c < m; ++c) {
        int k;
        in >> k;
        if (k != 3) throw IoError("'" + path + "': only triangles are supported");
        in >> mesh.cells[c][0] >> mesh.cells[c][1] >> mesh.cells[c][2];
      }
      have_cells = true;
    } else if (tok == "CELL_TYPES") {
      int m;
      in >> m;
      for (int c = 0; c < m; ++c) {
        int ty;
        in >> ty;
        if (ty != 5) throw IoError("'" + path + "': cell type " + std::to_string(ty) +
                                   " is not a triangle");
      }
    } else if (tok == "CELL_DATA") {
      int m;
      in >> m;
      section = Section::cell_data;
    } else if (tok == "POINT_DATA") {
      int n;
      in >> n;
      section = Section::point_data;
    } else if (tok == "SCALARS") {
      std::string name, type;
      int comps;
      in >> name >> type >> comps;
      std::size_t count = section == Section::cell_data ? mesh.cells.size() : mesh.nodes.size();
      std::string lut, deflt;
      in >> lut >> deflt;  // LOOKUP_TABLE default
      if (section == Section::cell_data && name == "subdomain") {
        mesh.cell_subdomain.resize(count);
        for (std::size_t i = 0; i < count; ++i) in >> mesh.cell_subdomain[i];
        have_labels = true;
      } else {
        double skip;
        for (std::size_t i = 0; i < count * comps; ++i) in >> skip;
      }
    } else if (tok == "VECTORS") {
      std::string name, type;
      in >> name >> type;
      std::size_t count = section == Section::cell_data ? mesh.cells.size() : mesh.nodes.size();
      double skip;
      for (std::size_t i = 0; i < 3 * count; ++i) in >> skip;
    } else {
      throw IoError("'" + path + "': unexpected token '" + tok + "'");
    }
  }
  if (!have_points || !have_cells)
    throw IoError("'" + path + "': missing POINTS or CELLS");
  if (!have_labels) mesh.cell_subdomain.assign(mesh.cells.size(), 0);

  // validate and reconstruct derived structure
  for (const auto& t : mesh.cells)
    for (int v : t)
      if (v < 0 || v >= mesh.num_nodes()) throw InvalidMesh("'" + path + "': cell index out of range");
  for (int c = 0; c < mesh.num_cells(); ++c)
    if (!(cell_signed_area(mesh, c) > 0.0))
      throw InvalidMesh("'" + path + "': cell " + std::to_string(c) + " is not CCW");

  int num_shapes = 0;
  for (int l : mesh.cell_subdomain) {
    if (l < 0) throw InvalidMesh("'" + path + "': negative subdomain label");
    num_shapes = std::max(num_shapes, l);
  }
  mesh.num_shapes = num_shapes;
  mesh.interfaces.assign(num_shapes, {});

  std::map<Edge, std::vector<int>> adj;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.cells[c];
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      adj[a < b ? Edge{a, b} : Edge{b, a}].push_back(c);
    }
  }
  mesh.node_on_boundary.assign(mesh.nodes.size(), 0);
  for (const auto& [e, cells] : adj) {
    if (cells.size() == 1) {
      mesh.boundary_edges.push_back(e);
      mesh.node_on_boundary[e[0]] = mesh.node_on_boundary[e[1]] = 1;
      if (mesh.cell_subdomain[cells[0]] != 0)
        throw InvalidMesh("'" + path + "': a shape touches the outer boundary");
    } else if (cells.size() == 2) {
      int la = mesh.cell_subdomain[cells[0]], lb = mesh.cell_subdomain[cells[1]];
      if (la == lb) continue;
      if (la != 0 && lb != 0) throw InvalidMesh("'" + path + "': two shapes share an edge");
      mesh.interfaces[std::max(la, lb) - 1].push_back(e);
    } else {
      throw InvalidMesh("'" + path + "': non-manifold edge");
    }
  }

  for (int s = 1; s <= num_shapes; ++s) {
    std::map<int, int> degree;
    for (const auto& e : mesh.interface_edges(s)) {
      ++degree[e[0]];
      ++degree[e[1]];
    }
    if (degree.empty())
      throw InvalidMesh("'" + path + "': shape " + std::to_string(s) + " has no interface");
    for (const auto& [n, d] : degree)
      if (d != 2)
        throw InvalidMesh("'" + path + "': interface of shape " + std::to_string(s) +
                          " is not a closed loop");
  }
  return mesh;
}

}  // namespace shapeopt
