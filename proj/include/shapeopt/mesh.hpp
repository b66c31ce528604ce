#pragma once

#include <array>
#include <functional>
#include <vector>

#include "shapeopt/fields.hpp"
#include "shapeopt/geometry.hpp"

namespace shapeopt {

using Edge = std::array<int, 2>;  // node pair, stored with first < second

// Conforming triangulation of the unit square with per-cell subdomain labels.
// Label 0 is the outer region; labels 1..num_shapes are the enclosed shapes.
// Interfaces are closed loops of mesh edges separating shape i from region 0.
struct TriMesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> cells;  // CCW vertex triples
  std::vector<int> cell_subdomain;
  std::vector<Edge> boundary_edges;                 // edges on the square boundary
  std::vector<std::vector<Edge>> interfaces;        // interfaces[s-1] bounds shape s
  std::vector<unsigned char> node_on_boundary;
  int num_shapes = 0;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_cells() const { return static_cast<int>(cells.size()); }
  const std::vector<Edge>& interface_edges(int shape) const { return interfaces.at(shape - 1); }
};

struct MeshQualityReport {
  double min_signed_area = 0.0;
  double min_aspect_ratio = 0.0;  // 1 for equilateral, 0 for degenerate
  int worst_cell = -1;
};

// Structured triangulation with `resolution` nodes per side; every grid square
// is split along the same diagonal.
TriMesh build_unit_square_mesh(int resolution);

double cell_signed_area(const TriMesh& mesh, int cell);
Vec2 cell_centroid(const TriMesh& mesh, int cell);
double total_area(const TriMesh& mesh);
double max_cell_diameter(const TriMesh& mesh);
std::size_t count_unique_edges(const TriMesh& mesh);

// Assigns cell labels from closed node loops that follow mesh edges, then
// extracts the interface edge sets.  Loops must be strictly interior, simple,
// and pairwise disjoint.
TriMesh label_subdomains(const TriMesh& mesh, const std::vector<std::vector<int>>& loops);

// Boundary loop of the cells whose centroid satisfies `inside`, as an ordered
// node cycle.  This is how smooth shape descriptions get snapped onto the mesh.
std::vector<int> conforming_loop(const TriMesh& mesh, const std::function<bool(Vec2)>& inside);

// Retraction: moves every node by -t*V.  V must vanish on the square boundary;
// boundary nodes are left untouched bit for bit.
TriMesh deform(const TriMesh& mesh, const VectorField& V, double t);

MeshQualityReport quality_report(const TriMesh& mesh);

// Nodes incident to any interface edge (all shapes).
std::vector<unsigned char> interface_node_mask(const TriMesh& mesh);

double interface_length(const TriMesh& mesh, int shape);

}  // namespace shapeopt
