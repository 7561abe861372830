#pragma once

#include <algorithm>
#include <cmath>

namespace quarry {

/// Axis-aligned rectangle in PDF points, origin bottom-left.
struct BBox {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double center_x() const { return 0.5 * (x0 + x1); }
  double center_y() const { return 0.5 * (y0 + y1); }
  bool valid() const { return x0 < x1 && y0 < y1; }

  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  bool contains(const BBox& o) const { return o.x0 >= x0 && o.x1 <= x1 && o.y0 >= y0 && o.y1 <= y1; }
  bool intersects(const BBox& o) const { return o.x0 < x1 && o.x1 > x0 && o.y0 < y1 && o.y1 > y0; }

  BBox united(const BBox& o) const {
    return {std::min(x0, o.x0), std::min(y0, o.y0), std::max(x1, o.x1), std::max(y1, o.y1)};
  }
  BBox inflated(double d) const { return {x0 - d, y0 - d, x1 + d, y1 + d}; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// A straight line segment, e.g. a table ruling.
struct Segment {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  bool horizontal(double tol) const { return std::abs(y1 - y0) <= tol && std::abs(x1 - x0) > tol; }
  bool vertical(double tol) const { return std::abs(x1 - x0) <= tol && std::abs(y1 - y0) > tol; }
  double length() const { return std::hypot(x1 - x0, y1 - y0); }

  friend bool operator==(const Segment&, const Segment&) = default;
};

}  // namespace quarry
