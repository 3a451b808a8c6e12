#pragma once

#include <optional>
#include <vector>

#include "pathguide/bspline.hpp"
#include "pathguide/common.hpp"
#include "pathguide/pgo.hpp"
#include "pathguide/topo.hpp"
#include "pathguide/voxel_map.hpp"

namespace pathguide {

struct ReplanRequest {
  UniformBSpline reference;
  double t_now = 0.0;
  double horizon = 9.0;                       // meters of arc length checked ahead
  Vec3 cube_inflation = Vec3(2.0, 3.0, 1.5);  // (r_x, r_y, r_z)
  double roadmap_budget_s = 0.003;
  double optimize_budget_s = 0.010;
  double ctrl_pt_spacing = 0.4;  // target control point spacing, meters
  PgoWeights weights;
  TopoConfig topo;
  uint64_t rng_seed = 0;
  bool deterministic = false;  // iteration caps only, no wall clocks
};

struct ReplanCandidate {
  GuidingPath guide;
  UniformBSpline trajectory;
  OptimizationReport phase1;
  OptimizationReport phase2;
  double total_cost = 0.0;
  bool failed = false;  // a free control point is still in collision
};

struct ReplanOutcome {
  bool triggered = false;
  std::optional<std::pair<double, double>> segment;  // [t_a, t_b] on reference
  std::optional<UniformBSpline> initial;             // reparameterized segment
  TopoRoadmap roadmap;
  std::vector<ReplanCandidate> candidates;
  std::optional<size_t> best;
  double roadmap_seconds = 0.0;
  double optimize_seconds = 0.0;
};

// Earliest colliding interval of the reference within the arc-length horizon,
// expanded on both sides to samples with clearance > s_f.
std::optional<std::pair<double, double>> check_collision(
    const UniformBSpline& reference, const VoxelField& field, double t_now,
    double horizon, double clearance);

// Bounding box of the two segment endpoints inflated per axis on both sides.
Aabb replan_cube(const Vec3& a, const Vec3& b, const Vec3& inflation);

// Full replanning event: collision check, segment reparameterization,
// roadmap, guiding path selection, one PGO per path (run concurrently), best
// candidate by phase-2 cost.
ReplanOutcome replan(const ReplanRequest& request, const VoxelField& field);

// Unguided baseline: phase-2 refinement directly on the initial spline.
std::optional<std::pair<UniformBSpline, OptimizationReport>> unguided_replan(
    const ReplanRequest& request, const VoxelField& field);

}  // namespace pathguide
