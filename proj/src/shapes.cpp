#include "shapeopt/shapes.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "shapeopt/errors.hpp"

namespace shapeopt {

bool ShapeSpec::inside(Vec2 p) const {
  Vec2 v = p - center;
  switch (kind) {
    case Kind::circle:
      return dot(v, v) <= r1 * r1;
    case Kind::ellipse: {
      double c = std::cos(angle), s = std::sin(angle);
      Vec2 u{c * v.x + s * v.y, -s * v.x + c * v.y};
      double a = u.x / r1, b = u.y / r2;
      return a * a + b * b <= 1.0;
    }
    case Kind::tube: {
      double rad = norm(v);
      if (std::abs(rad - r1) > r2) return false;
      double span = theta1 - theta0;
      double th = std::atan2(v.y, v.x) - theta0;
      const double two_pi = 2.0 * std::numbers::pi;
      th -= two_pi * std::floor(th / two_pi);
      return th <= span;
    }
    case Kind::polygon: {
      bool in = false;
      std::size_t n = points.size();
      for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = points[j];
        const Vec2& b = points[i];
        if ((b.y > p.y) != (a.y > p.y)) {
          double xi = b.x + (p.y - b.y) / (a.y - b.y) * (a.x - b.x);
          if (p.x < xi) in = !in;
        }
      }
      return in;
    }
  }
  return false;
}

ShapeSpec parse_shape_spec(const std::string& text) {
  std::istringstream in(text);
  std::string kind;
  in >> kind;
  std::vector<double> nums;
  double v;
  while (in >> v) nums.push_back(v);
  if (!in.eof()) throw ConfigError("shape '" + text + "': trailing non-numeric data");

  auto want = [&](std::size_t n) {
    if (nums.size() != n)
      throw ConfigError("shape '" + text + "': expected " + std::to_string(n) +
                        " numbers, got " + std::to_string(nums.size()));
  };

  ShapeSpec s;
  if (kind == "circle") {
    want(3);
    s.kind = ShapeSpec::Kind::circle;
    s.center = {nums[0], nums[1]};
    s.r1 = nums[2];
    if (!(s.r1 > 0.0)) throw ConfigError("shape '" + text + "': radius must be positive");
  } else if (kind == "ellipse") {
    want(5);
    s.kind = ShapeSpec::Kind::ellipse;
    s.center = {nums[0], nums[1]};
    s.r1 = nums[2];
    s.r2 = nums[3];
    s.angle = nums[4];
    if (!(s.r1 > 0.0 && s.r2 > 0.0))
      throw ConfigError("shape '" + text + "': semi-axes must be positive");
  } else if (kind == "tube") {
    want(6);
    s.kind = ShapeSpec::Kind::tube;
    s.center = {nums[0], nums[1]};
    s.r1 = nums[2];
    s.r2 = nums[3];
    s.theta0 = nums[4];
    s.theta1 = nums[5];
    if (!(s.r1 > 0.0 && s.r2 > 0.0 && s.r2 < s.r1))
      throw ConfigError("shape '" + text + "': need 0 < half-width < centerline radius");
    if (!(s.theta1 > s.theta0 && s.theta1 - s.theta0 < 2.0 * std::numbers::pi))
      throw ConfigError("shape '" + text + "': angular span must be in (0, 2*pi)");
  } else if (kind == "polygon") {
    if (nums.size() < 6 || nums.size() % 2 != 0)
      throw ConfigError("shape '" + text + "': polygon needs at least 3 x,y pairs");
    s.kind = ShapeSpec::Kind::polygon;
    for (std::size_t i = 0; i < nums.size(); i += 2) s.points.push_back({nums[i], nums[i + 1]});
  } else {
    throw ConfigError("unknown shape kind '" + kind + "'");
  }
  return s;
}

std::string format_shape_spec(const ShapeSpec& s) {
  auto num = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  switch (s.kind) {
    case ShapeSpec::Kind::circle:
      return "circle " + num(s.center.x) + " " + num(s.center.y) + " " + num(s.r1);
    case ShapeSpec::Kind::ellipse:
      return "ellipse " + num(s.center.x) + " " + num(s.center.y) + " " + num(s.r1) + " " +
             num(s.r2) + " " + num(s.angle);
    case ShapeSpec::Kind::tube:
      return "tube " + num(s.center.x) + " " + num(s.center.y) + " " + num(s.r1) + " " +
             num(s.r2) + " " + num(s.theta0) + " " + num(s.theta1);
    case ShapeSpec::Kind::polygon: {
      std::string out = "polygon";
      for (const auto& p : s.points) out += " " + num(p.x) + " " + num(p.y);
      return out;
    }
  }
  return {};
}

}  // namespace shapeopt
