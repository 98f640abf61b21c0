#pragma once

#include <algorithm>

#include <Eigen/Core>

namespace relaybeam {

using Point = Eigen::Vector2d;

/// Axis-aligned closed rectangle in the plane.
struct Rect {
  Point lo{0.0, 0.0};
  Point hi{0.0, 0.0};

  bool contains(const Point& p, double tol = 0.0) const {
    return p.x() >= lo.x() - tol && p.x() <= hi.x() + tol && p.y() >= lo.y() - tol &&
           p.y() <= hi.y() + tol;
  }

  Point clamp(const Point& p) const {
    return {std::clamp(p.x(), lo.x(), hi.x()), std::clamp(p.y(), lo.y(), hi.y())};
  }

  bool valid() const { return lo.x() <= hi.x() && lo.y() <= hi.y(); }
};

inline double distance(const Point& a, const Point& b) { return (a - b).norm(); }

}  // namespace relaybeam
