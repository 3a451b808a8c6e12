#pragma once

#include <utility>
#include <vector>

#include "pathguide/bspline.hpp"
#include "pathguide/common.hpp"
#include "pathguide/voxel_map.hpp"

namespace pathguide {

struct PgoWeights {
  double lambda1_s = 1.0;
  double lambda1_g = 10.0;
  double lambda2_s = 1.0;
  double lambda2_c = 10.0;
  double lambda2_d = 1.0;
  double clearance = 0.4;  // s_f, meters
  double v_max = 3.0;
  double a_max = 2.0;
};

// Piecewise-linear collision-free path with cumulative arc lengths.
class GuidingPath {
 public:
  explicit GuidingPath(Polyline waypoints);

  const Polyline& waypoints() const { return waypoints_; }
  const std::vector<double>& cumulative_lengths() const { return cum_len_; }
  double length() const { return cum_len_.back(); }

  // Point at arc-length fraction f in [0, 1].
  Vec3 point_at_fraction(double f) const;

 private:
  Polyline waypoints_;
  std::vector<double> cum_len_;
};

struct OptimizationReport {
  bool converged = false;
  int iterations = 0;
  double final_cost = 0.0;
  double elapsed = 0.0;  // seconds
  int phase = 0;
};

struct Phase2Costs {
  double f_s = 0.0;
  double f_c = 0.0;
  double f_v = 0.0;
  double f_a = 0.0;
  std::vector<Vec3> gradient;  // one per free control point

  double total(const PgoWeights& w) const {
    return w.lambda2_s * f_s + w.lambda2_c * f_c + w.lambda2_d * (f_v + f_a);
  }
};

// Attraction targets G_i for the free control points Q_{p}..Q_{N-p}, uniformly
// sampled along the guiding path by arc-length fraction.
std::vector<Vec3> guide_points(const GuidingPath& path, const UniformBSpline& spline);

// Phase 1: exact minimizer of the smoothness + guiding quadratic over the free
// control points, boundary control points held fixed.
UniformBSpline phase1_solve(const UniformBSpline& init, const GuidingPath& path,
                            const PgoWeights& w);

// Phase 2 objective terms and their analytic gradient per free control point.
Phase2Costs phase2_costs(const UniformBSpline& spline, const VoxelField& field,
                         const PgoWeights& w);

// Phase 2: quasi-Newton refinement under a wall-clock budget (<= 0 returns the
// input unchanged; set deterministic=true to disable the wall clock and rely
// on the iteration cap only).
std::pair<UniformBSpline, OptimizationReport> phase2_refine(
    const UniformBSpline& warmup, const VoxelField& field, const PgoWeights& w,
    double budget_s, bool deterministic = false);

// Both phases in sequence.
struct PgoResult {
  UniformBSpline trajectory;
  OptimizationReport phase1;
  OptimizationReport phase2;
};
PgoResult pgo_replan(const UniformBSpline& init, const GuidingPath& path,
                     const VoxelField& field, const PgoWeights& w, double budget_s,
                     bool deterministic = false);

}  // namespace pathguide
