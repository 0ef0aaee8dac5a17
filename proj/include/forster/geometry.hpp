#pragma once

#include <cmath>

namespace forster {

/// Transverse position (x, y) in um; the beam and the cloud axis run along z.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  double norm() const noexcept { return std::hypot(x, y); }
  friend Point2 operator-(Point2 a, Point2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Point2 transverse() const noexcept { return {x, y}; }
};

}  // namespace forster
