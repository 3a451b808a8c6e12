#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pathguide/common.hpp"

namespace pathguide {

struct GridSpec {
  Vec3 origin = Vec3::Zero();
  double voxel_size = 0.1;
  Vec3i dims = Vec3i::Ones();

  size_t cell_count() const {
    return static_cast<size_t>(dims.x()) * dims.y() * dims.z();
  }
  // x-fastest linear index
  size_t linear(const Vec3i& idx) const {
    return static_cast<size_t>(idx.x()) +
           static_cast<size_t>(dims.x()) *
               (static_cast<size_t>(idx.y()) +
                static_cast<size_t>(dims.y()) * static_cast<size_t>(idx.z()));
  }
  bool in_bounds(const Vec3i& idx) const {
    return (idx.array() >= 0).all() && (idx.array() < dims.array()).all();
  }
  Vec3 center_of(const Vec3i& idx) const {
    return origin + voxel_size * (idx.cast<double>() + Vec3(0.5, 0.5, 0.5));
  }
  Vec3i index_of(const Vec3& p) const {
    return ((p - origin) / voxel_size).array().floor().cast<int>();
  }
  Aabb bounds() const {
    return {origin, origin + voxel_size * dims.cast<double>()};
  }
};

struct QueryPolicy {
  double out_of_bounds_distance = 10.0;  // meters, treated as free space
  double margin = 0.0;                   // clearance used by visibility checks
};

struct LineVisibility {
  bool visible = true;
  Vec3i blocking = Vec3i::Zero();  // first blocking voxel when not visible
};

// Occupancy grid with a full-range signed distance field over voxel centers.
// Positive in free space, negative inside obstacles. Immutable after build;
// all queries are read-only and safe for concurrent use.
class VoxelField {
 public:
  VoxelField(std::vector<uint8_t> occupancy, const GridSpec& spec,
             QueryPolicy policy = {});

  const GridSpec& spec() const { return spec_; }
  const QueryPolicy& policy() const { return policy_; }
  bool occupied(const Vec3i& idx) const { return occupancy_[spec_.linear(idx)] != 0; }
  double esdf_at(const Vec3i& idx) const { return esdf_[spec_.linear(idx)]; }
  const std::vector<uint8_t>& occupancy() const { return occupancy_; }

  // Trilinear interpolation of the distance field. Out-of-bounds points get
  // policy.out_of_bounds_distance.
  double distance_at(const Vec3& p) const;

  // Gradient of the interpolated field; zero outside the map.
  Vec3 gradient_at(const Vec3& p) const;

  // True iff every sample along a->b (step <= voxel_size/2) clears `margin`.
  LineVisibility line_visible(const Vec3& a, const Vec3& b, double margin) const;
  LineVisibility line_visible(const Vec3& a, const Vec3& b) const {
    return line_visible(a, b, policy_.margin);
  }

  void save(std::ostream& os) const;
  static VoxelField load(std::istream& is, QueryPolicy policy = {});
  void save_file(const std::string& path) const;
  static VoxelField load_file(const std::string& path, QueryPolicy policy = {});

 private:
  GridSpec spec_;
  QueryPolicy policy_;
  std::vector<uint8_t> occupancy_;
  std::vector<double> esdf_;
};

}  // namespace pathguide
