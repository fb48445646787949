#pragma once

#include <cmath>

namespace nanoflow {

/// Point in body coordinates, centimeters, origin at the heart center.
/// x is lateral, y is cranial, z is anterior (arteries) / posterior (veins).
struct Position3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Position3&, const Position3&) = default;
};

inline Position3 operator+(const Position3& a, const Position3& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
inline Position3 operator-(const Position3& a, const Position3& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
inline Position3 operator*(const Position3& a, double s) {
  return {a.x * s, a.y * s, a.z * s};
}
inline Position3 operator*(double s, const Position3& a) { return a * s; }

inline double dot(const Position3& a, const Position3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}
inline double norm(const Position3& a) { return std::sqrt(dot(a, a)); }
inline double distance(const Position3& a, const Position3& b) {
  return norm(a - b);
}
inline bool is_finite(const Position3& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

/// Euclidean distance from p to the closed segment [a, b].
double point_segment_distance(const Position3& p, const Position3& a,
                              const Position3& b);

}  // namespace nanoflow
