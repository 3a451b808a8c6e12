#pragma once

#include <cstdint>
#include <vector>

#include "pathguide/common.hpp"
#include "pathguide/pgo.hpp"
#include "pathguide/voxel_map.hpp"

namespace pathguide {

enum class NodeKind { kGuard, kConnector };

struct TopoNode {
  Vec3 position = Vec3::Zero();
  NodeKind kind = NodeKind::kGuard;
  std::vector<int> neighbors;
};

// Undirected guard/connector graph. Node 0 is the start guard, node 1 the
// goal guard.
struct TopoRoadmap {
  std::vector<TopoNode> nodes;
  Aabb sample_region;
  int samples_drawn = 0;
};

struct TopoConfig {
  double t_max = 0.003;        // roadmap sampling wall budget, seconds
  int n_max = 2000;            // sample cap
  int k_uvd = 20;              // UVD discretization count (k_uvd+1 lines)
  int k_max = 5;               // guiding path cap
  double r_max = 3.0;          // length-ratio cap relative to the shortest
  double margin = 0.1;         // clearance for visibility checks, meters
  int max_raw_paths = 100;     // DFS enumeration cap
  bool deterministic = false;  // ignore t_max, rely on n_max only
};

// Discretized uniform visibility deformation test: parameterize both paths
// uniformly by arc length and require a free line at every s_i = i/k_uvd.
// Paths must share endpoints.
bool uvd_equivalent(const Polyline& p1, const Polyline& p2, const VoxelField& field,
                    const TopoConfig& cfg);

// Guard/connector roadmap between s and g, sampled uniformly in `region`.
TopoRoadmap build_roadmap(const VoxelField& field, const Vec3& s, const Vec3& g,
                          const Aabb& region, const TopoConfig& cfg,
                          uint64_t rng_seed);

// Depth-first enumeration of acyclic start-goal paths, capped at
// cfg.max_raw_paths.
std::vector<Polyline> search_paths(const TopoRoadmap& roadmap, const TopoConfig& cfg);

struct ShortenResult {
  Polyline path;
  bool push_away_failed = false;  // input returned unchanged
};

// Shortcut path: walk the discretized input, and where the chord from the
// last kept waypoint is blocked, push the blocking voxel center out along the
// ESDF gradient component orthogonal to the chord.
// With budget_s > 0, fallback attempts stop once the wall budget is spent and
// the input comes back flagged.
ShortenResult shorten_path(const Polyline& path, const VoxelField& field,
                           const TopoConfig& cfg, double budget_s = -1.0);

// Shorten, prune UVD duplicates, sort by length, apply k_max and r_max caps.
// With budget_s > 0, paths beyond the wall budget are skipped (at least the
// first is always processed).
std::vector<GuidingPath> select_guiding_paths(const std::vector<Polyline>& paths,
                                              const VoxelField& field,
                                              const TopoConfig& cfg,
                                              double budget_s = -1.0);

}  // namespace pathguide
