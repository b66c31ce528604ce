#include "shapeopt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

Edge make_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

// edge -> adjacent cell indices (one or two)
std::map<Edge, std::vector<int>> edge_to_cells(const TriMesh& mesh) {
  std::map<Edge, std::vector<int>> adj;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.cells[c];
    for (int k = 0; k < 3; ++k) adj[make_edge(t[k], t[(k + 1) % 3])].push_back(c);
  }
  return adj;
}

// crossing-number test; the query point must not lie on the polygon
bool point_in_loop(const std::vector<Vec2>& poly, Vec2 p) {
  bool in = false;
  std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[j];
    const Vec2& b = poly[i];
    if ((b.y > p.y) != (a.y > p.y)) {
      double xi = b.x + (p.y - b.y) / (a.y - b.y) * (a.x - b.x);
      if (p.x < xi) in = !in;
    }
  }
  return in;
}

}  // namespace

TriMesh build_unit_square_mesh(int resolution) {
  if (resolution < 2) throw ConfigError("mesh resolution must be at least 2 nodes per side");
  int r = resolution;
  double h = 1.0 / (r - 1);

  TriMesh mesh;
  mesh.nodes.reserve(static_cast<std::size_t>(r) * r);
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < r; ++i) mesh.nodes.push_back({i * h, j * h});

  auto idx = [r](int i, int j) { return j * r + i; };
  mesh.cells.reserve(2u * (r - 1) * (r - 1));
  for (int j = 0; j + 1 < r; ++j) {
    for (int i = 0; i + 1 < r; ++i) {
      // split along the (i,j)-(i+1,j+1) diagonal, both triangles CCW
      mesh.cells.push_back({idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)});
      mesh.cells.push_back({idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)});
    }
  }
  mesh.cell_subdomain.assign(mesh.cells.size(), 0);

  mesh.node_on_boundary.assign(mesh.nodes.size(), 0);
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < r; ++i)
      if (i == 0 || i == r - 1 || j == 0 || j == r - 1) mesh.node_on_boundary[idx(i, j)] = 1;

  for (const auto& [e, cells] : edge_to_cells(mesh))
    if (cells.size() == 1) mesh.boundary_edges.push_back(e);

  return mesh;
}

double cell_signed_area(const TriMesh& mesh, int cell) {
  const auto& t = mesh.cells[cell];
  Vec2 a = mesh.nodes[t[0]], b = mesh.nodes[t[1]], c = mesh.nodes[t[2]];
  return 0.5 * cross(b - a, c - a);
}

Vec2 cell_centroid(const TriMesh& mesh, int cell) {
  const auto& t = mesh.cells[cell];
  return (1.0 / 3.0) * (mesh.nodes[t[0]] + mesh.nodes[t[1]] + mesh.nodes[t[2]]);
}

double total_area(const TriMesh& mesh) {
  double s = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) s += cell_signed_area(mesh, c);
  return s;
}

double max_cell_diameter(const TriMesh& mesh) {
  double d = 0.0;
  for (const auto& t : mesh.cells)
    for (int k = 0; k < 3; ++k)
      d = std::max(d, norm(mesh.nodes[t[k]] - mesh.nodes[t[(k + 1) % 3]]));
  return d;
}

std::size_t count_unique_edges(const TriMesh& mesh) {
  std::set<Edge> edges;
  for (const auto& t : mesh.cells)
    for (int k = 0; k < 3; ++k) edges.insert(make_edge(t[k], t[(k + 1) % 3]));
  return edges.size();
}

TriMesh label_subdomains(const TriMesh& mesh, const std::vector<std::vector<int>>& loops) {
  std::set<Edge> mesh_edges;
  for (const auto& t : mesh.cells)
    for (int k = 0; k < 3; ++k) mesh_edges.insert(make_edge(t[k], t[(k + 1) % 3]));

  std::set<int> seen_nodes;
  for (std::size_t s = 0; s < loops.size(); ++s) {
    const auto& loop = loops[s];
    if (loop.size() < 3)
      throw NonConformingCurve("shape curve " + std::to_string(s + 1) + " has fewer than 3 nodes");
    std::set<int> own(loop.begin(), loop.end());
    if (own.size() != loop.size())
      throw NonConformingCurve("shape curve " + std::to_string(s + 1) + " repeats a node");
    for (int n : loop) {
      if (n < 0 || n >= mesh.num_nodes())
        throw NonConformingCurve("shape curve node index out of range");
      if (mesh.node_on_boundary[n])
        throw NonConformingCurve("shape curve " + std::to_string(s + 1) +
                                 " touches the square boundary");
      if (!seen_nodes.insert(n).second)
        throw IntersectingShapes("shape curves share node " + std::to_string(n));
    }
    for (std::size_t k = 0; k < loop.size(); ++k) {
      Edge e = make_edge(loop[k], loop[(k + 1) % loop.size()]);
      if (!mesh_edges.count(e))
        throw NonConformingCurve("shape curve " + std::to_string(s + 1) +
                                 " uses a segment that is not a mesh edge");
    }
  }

  TriMesh out = mesh;
  out.num_shapes = static_cast<int>(loops.size());
  out.cell_subdomain.assign(mesh.cells.size(), 0);
  for (std::size_t s = 0; s < loops.size(); ++s) {
    std::vector<Vec2> poly;
    poly.reserve(loops[s].size());
    for (int n : loops[s]) poly.push_back(mesh.nodes[n]);
    for (int c = 0; c < mesh.num_cells(); ++c) {
      if (!point_in_loop(poly, cell_centroid(mesh, c))) continue;
      if (out.cell_subdomain[c] != 0)
        throw IntersectingShapes("shape curves enclose a common cell");
      out.cell_subdomain[c] = static_cast<int>(s + 1);
    }
  }

  out.interfaces.assign(loops.size(), {});
  for (const auto& [e, cells] : edge_to_cells(mesh)) {
    if (cells.size() == 1) {
      if (out.cell_subdomain[cells[0]] != 0)
        throw NonConformingCurve("labeled region touches the square boundary");
      continue;
    }
    int la = out.cell_subdomain[cells[0]];
    int lb = out.cell_subdomain[cells[1]];
    if (la == lb) continue;
    if (la != 0 && lb != 0) throw IntersectingShapes("two shapes share an edge");
    out.interfaces[std::max(la, lb) - 1].push_back(e);
  }

  for (std::size_t s = 0; s < loops.size(); ++s) {
    std::set<Edge> from_labels(out.interfaces[s].begin(), out.interfaces[s].end());
    std::set<Edge> from_loop;
    for (std::size_t k = 0; k < loops[s].size(); ++k)
      from_loop.insert(make_edge(loops[s][k], loops[s][(k + 1) % loops[s].size()]));
    if (from_labels != from_loop)
      throw InvalidMesh("interface extracted from labels does not match shape curve " +
                        std::to_string(s + 1));
  }

  return out;
}

std::vector<int> conforming_loop(const TriMesh& mesh, const std::function<bool(Vec2)>& inside) {
  std::vector<unsigned char> in_region(mesh.cells.size(), 0);
  int count = 0;
  for (int c = 0; c < mesh.num_cells(); ++c)
    if (inside(cell_centroid(mesh, c))) in_region[c] = 1, ++count;
  if (count == 0) throw InvalidMesh("shape region contains no cells at this mesh resolution");

  std::map<int, std::vector<int>> neighbors;  // node -> adjacent loop nodes
  std::size_t edge_count = 0;
  for (const auto& [e, cells] : edge_to_cells(mesh)) {
    int hits = 0;
    for (int c : cells) hits += in_region[c];
    if (hits != 1) continue;
    if (cells.size() == 1) throw InvalidMesh("shape region touches the square boundary");
    neighbors[e[0]].push_back(e[1]);
    neighbors[e[1]].push_back(e[0]);
    ++edge_count;
  }

  for (auto& [n, nb] : neighbors) {
    if (nb.size() != 2)
      throw InvalidMesh("shape region boundary is not a simple closed curve (node " +
                        std::to_string(n) + " has degree " + std::to_string(nb.size()) + ")");
    std::sort(nb.begin(), nb.end());
  }

  int start = neighbors.begin()->first;
  std::vector<int> loop{start};
  int prev = start;
  int cur = neighbors[start][0];
  while (cur != start) {
    loop.push_back(cur);
    const auto& nb = neighbors[cur];
    int next = (nb[0] == prev) ? nb[1] : nb[0];
    prev = cur;
    cur = next;
  }
  if (loop.size() != edge_count)
    throw InvalidMesh("shape region boundary has more than one component");
  return loop;
}

TriMesh deform(const TriMesh& mesh, const VectorField& V, double t) {
  if (V.size() != mesh.nodes.size())
    throw InvalidMesh("deformation field size does not match mesh");
  for (std::size_t n = 0; n < V.size(); ++n)
    if (mesh.node_on_boundary[n] && norm(V[n]) > 1e-9)
      throw InvalidMesh("deformation field is nonzero on the square boundary");

  TriMesh out = mesh;
  for (std::size_t n = 0; n < V.size(); ++n)
    if (!mesh.node_on_boundary[n]) out.nodes[n] = mesh.nodes[n] - t * V[n];
  return out;
}

MeshQualityReport quality_report(const TriMesh& mesh) {
  MeshQualityReport rep;
  rep.min_signed_area = std::numeric_limits<double>::max();
  rep.min_aspect_ratio = std::numeric_limits<double>::max();
  for (int c = 0; c < mesh.num_cells(); ++c) {
    double area = cell_signed_area(mesh, c);
    rep.min_signed_area = std::min(rep.min_signed_area, area);

    const auto& t = mesh.cells[c];
    double la = norm(mesh.nodes[t[1]] - mesh.nodes[t[0]]);
    double lb = norm(mesh.nodes[t[2]] - mesh.nodes[t[1]]);
    double lc = norm(mesh.nodes[t[0]] - mesh.nodes[t[2]]);
    double aspect = 0.0;
    if (area > 0.0) {
      // 2 * inradius / circumradius, equal to 1 for an equilateral triangle
      double s = 0.5 * (la + lb + lc);
      double inradius = area / s;
      double circumradius = la * lb * lc / (4.0 * area);
      aspect = 2.0 * inradius / circumradius;
    }
    if (aspect < rep.min_aspect_ratio) {
      rep.min_aspect_ratio = aspect;
      rep.worst_cell = c;
    }
  }
  return rep;
}

std::vector<unsigned char> interface_node_mask(const TriMesh& mesh) {
  std::vector<unsigned char> mask(mesh.nodes.size(), 0);
  for (const auto& iface : mesh.interfaces)
    for (const auto& e : iface) mask[e[0]] = mask[e[1]] = 1;
  return mask;
}

double interface_length(const TriMesh& mesh, int shape) {
  double len = 0.0;
  for (const auto& e : mesh.interface_edges(shape))
    len += norm(mesh.nodes[e[1]] - mesh.nodes[e[0]]);
  return len;
}

}  // namespace shapeopt
