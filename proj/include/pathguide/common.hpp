#pragma once

#include <Eigen/Dense>
#include <vector>

namespace pathguide {

using Vec3 = Eigen::Vector3d;
using Vec3i = Eigen::Vector3i;

// Axis-aligned box, closed on both ends.
struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  Aabb intersect(const Aabb& other) const {
    Aabb out;
    out.min = min.cwiseMax(other.min);
    out.max = max.cwiseMin(other.max);
    return out;
  }
};

using Polyline = std::vector<Vec3>;

inline double polyline_length(const Polyline& pts) {
  double len = 0.0;
  for (size_t i = 1; i < pts.size(); ++i) len += (pts[i] - pts[i - 1]).norm();
  return len;
}

}  // namespace pathguide
