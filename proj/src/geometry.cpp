#include "nanoflow/geometry.hpp"

#include <algorithm>

namespace nanoflow {

double point_segment_distance(const Position3& p, const Position3& a,
                              const Position3& b) {
  const Position3 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + ab * t);
}

}  // namespace nanoflow
