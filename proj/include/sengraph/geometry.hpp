#pragma once

#include <cmath>

namespace sengraph {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double dist(Point a, Point b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Lexicographic order on (x, y). Used wherever a direction-free canonical
/// orientation is needed, so results cannot depend on node numbering.
inline bool pos_less(Point a, Point b) {
  if (a.x != b.x) return a.x < b.x;
  return a.y < b.y;
}

inline bool pos_eq(Point a, Point b) { return a.x == b.x && a.y == b.y; }

}  // namespace sengraph
