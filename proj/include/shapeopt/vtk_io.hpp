#pragma once

#include <string>
#include <utility>
#include <vector>

#include "shapeopt/fields.hpp"
#include "shapeopt/mesh.hpp"

namespace shapeopt {

// Optional data attached to a legacy ASCII VTK export.  The subdomain labels
// are always written as cell data.
struct VtkExtras {
  std::vector<std::pair<std::string, const ScalarField*>> point_scalars;
  std::vector<std::pair<std::string, const VectorField*>> point_vectors;
  std::vector<std::pair<std::string, std::vector<double>>> cell_scalars;
};

// Unstructured-grid writer; coordinates use 17 significant digits so a
// write/read/write cycle is byte-identical.
void write_vtk(const std::string& path, const TriMesh& mesh, const VtkExtras& extras = {});

// Reads a mesh written by write_vtk (points, triangles, subdomain labels) and
// re-derives boundary edges and interfaces.  Cells must be CCW and every
// interface a closed edge loop.
TriMesh read_vtk_mesh(const std::string& path);

}  // namespace shapeopt
