#pragma once

#include <string>
#include <vector>

#include "shapeopt/geometry.hpp"

namespace shapeopt {

// Analytic description of one enclosed shape.  Meshes are labeled by snapping
// the region {inside == true} onto mesh cells, so only the containment test
// matters here.
struct ShapeSpec {
  enum class Kind { circle, ellipse, tube, polygon };

  Kind kind = Kind::circle;
  Vec2 center{0.5, 0.5};
  double r1 = 0.1;     // circle radius / ellipse semi-axis x / tube centerline radius
  double r2 = 0.1;     // ellipse semi-axis y / tube half-width
  double angle = 0.0;  // ellipse rotation
  double theta0 = 0.0, theta1 = 0.0;  // tube angular span (theta1 > theta0)
  std::vector<Vec2> points;           // polygon vertices, CCW

  bool inside(Vec2 p) const;
};

// Parses the textual form used in config files, e.g.
//   circle 0.5 0.5 0.15
//   ellipse 0.33 0.62 0.17 0.11 0.55
//   tube 0.62 0.40 0.21 0.065 -1.2 1.4
//   polygon 0.2 0.2 0.8 0.2 0.5 0.8
ShapeSpec parse_shape_spec(const std::string& text);
std::string format_shape_spec(const ShapeSpec& s);

}  // namespace shapeopt
