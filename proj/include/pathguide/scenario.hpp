#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pathguide/replan.hpp"

namespace pathguide {

enum class DensityTier { kLow, kMedium, kHigh };

const char* tier_name(DensityTier tier);
DensityTier tier_from_name(const std::string& name);

// Flat key = value configuration; every field has a default and unknown keys
// are rejected.
struct ScenarioConfig {
  // map generation
  Vec3 map_size = Vec3(20.0, 10.0, 3.0);
  double voxel_size = 0.1;
  int obstacles_low = 10;
  int obstacles_medium = 20;
  int obstacles_high = 35;
  double obstacle_min_xy = 0.3;
  double obstacle_max_xy = 1.2;
  double obstacle_min_height = 1.8;
  double obstacle_max_height = 3.0;
  double reference_speed = 0.5;

  PgoWeights weights;
  TopoConfig topo;

  // replanning
  double horizon = 18.0;
  Vec3 cube_inflation = Vec3(2.0, 3.0, 1.5);
  double roadmap_budget_s = 0.003;
  double optimize_budget_s = 0.010;
  double ctrl_pt_spacing = 0.4;

  // benchmark
  uint64_t rng_seed = 0;
  int tasks = 100;
  bool test_mode = true;  // deterministic: iteration caps, zeroed CSV timings

  void set(const std::string& key, const std::string& value);
  static ScenarioConfig parse(std::istream& is);
  static ScenarioConfig from_file(const std::string& path);
};

struct GeneratedTask {
  VoxelField field;
  Vec3 start;
  Vec3 goal;
  UniformBSpline reference;
};

// Deterministic random map with pillar obstacles and a straight-line
// reference that is guaranteed to collide with at least one obstacle.
GeneratedTask generate_map(const ScenarioConfig& cfg, DensityTier tier,
                           uint64_t seed);

// Per-task seed derived from the scenario seed, shared by bench, replan-one
// and map-gen.
uint64_t task_seed(const ScenarioConfig& cfg, DensityTier tier, int task_id);

struct BenchmarkRecord {
  int task_id = 0;
  std::string tier;
  std::string method;  // "guided" or "unguided"
  bool success = false;
  double smoothness = 0.0;  // valid only on success
  double roadmap_ms = 0.0;
  double optimize_ms = 0.0;
  int candidates = 0;
};

struct BenchmarkResult {
  std::vector<BenchmarkRecord> records;
  std::string csv() const;
  std::string summary() const;
};

ReplanRequest make_request(const ScenarioConfig& cfg, const GeneratedTask& task,
                           uint64_t seed);

// Dense-sample collision and dynamic feasibility audit of a trajectory.
bool trajectory_feasible(const UniformBSpline& traj, const VoxelField& field,
                         const PgoWeights& w);

BenchmarkResult run_benchmark(const ScenarioConfig& cfg,
                              const std::vector<DensityTier>& tiers);

// Writes map/roadmap/guiding paths/candidates/selected trajectory dumps for
// one task into `dir`.
void dump_artifacts(const ScenarioConfig& cfg, DensityTier tier, int task_id,
                    const std::string& dir);

}  // namespace pathguide
