#include "pathguide/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace pathguide {

const char* tier_name(DensityTier tier) {
  switch (tier) {
    case DensityTier::kLow: return "low";
    case DensityTier::kMedium: return "medium";
    default: return "high";
  }
}

DensityTier tier_from_name(const std::string& name) {
  if (name == "low") return DensityTier::kLow;
  if (name == "medium") return DensityTier::kMedium;
  if (name == "high") return DensityTier::kHigh;
  throw std::invalid_argument("unknown density tier: " + name);
}

void ScenarioConfig::set(const std::string& key, const std::string& value) {
  auto as_double = [&] { return std::stod(value); };
  auto as_int = [&] { return std::stoi(value); };
  auto as_bool = [&] {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::invalid_argument("bad boolean for " + key + ": " + value);
  };

  if (key == "map_size_x") map_size.x() = as_double();
  else if (key == "map_size_y") map_size.y() = as_double();
  else if (key == "map_size_z") map_size.z() = as_double();
  else if (key == "voxel_size") voxel_size = as_double();
  else if (key == "obstacles_low") obstacles_low = as_int();
  else if (key == "obstacles_medium") obstacles_medium = as_int();
  else if (key == "obstacles_high") obstacles_high = as_int();
  else if (key == "obstacle_min_xy") obstacle_min_xy = as_double();
  else if (key == "obstacle_max_xy") obstacle_max_xy = as_double();
  else if (key == "obstacle_min_height") obstacle_min_height = as_double();
  else if (key == "obstacle_max_height") obstacle_max_height = as_double();
  else if (key == "reference_speed") reference_speed = as_double();
  else if (key == "lambda1_s") weights.lambda1_s = as_double();
  else if (key == "lambda1_g") weights.lambda1_g = as_double();
  else if (key == "lambda2_s") weights.lambda2_s = as_double();
  else if (key == "lambda2_c") weights.lambda2_c = as_double();
  else if (key == "lambda2_d") weights.lambda2_d = as_double();
  else if (key == "clearance") weights.clearance = as_double();
  else if (key == "v_max") weights.v_max = as_double();
  else if (key == "a_max") weights.a_max = as_double();
  else if (key == "k_uvd") topo.k_uvd = as_int();
  else if (key == "k_max") topo.k_max = as_int();
  else if (key == "r_max") topo.r_max = as_double();
  else if (key == "margin") topo.margin = as_double();
  else if (key == "n_max_samples") topo.n_max = as_int();
  else if (key == "max_raw_paths") topo.max_raw_paths = as_int();
  else if (key == "horizon") horizon = as_double();
  else if (key == "cube_inflation_x") cube_inflation.x() = as_double();
  else if (key == "cube_inflation_y") cube_inflation.y() = as_double();
  else if (key == "cube_inflation_z") cube_inflation.z() = as_double();
  else if (key == "roadmap_budget_s") roadmap_budget_s = as_double();
  else if (key == "optimize_budget_s") optimize_budget_s = as_double();
  else if (key == "ctrl_pt_spacing") ctrl_pt_spacing = as_double();
  else if (key == "rng_seed") rng_seed = std::stoull(value);
  else if (key == "tasks") tasks = as_int();
  else if (key == "test_mode") test_mode = as_bool();
  else throw std::invalid_argument("unknown config key: " + key);
}

ScenarioConfig ScenarioConfig::parse(std::istream& is) {
  ScenarioConfig cfg;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw std::invalid_argument("malformed config line: " + line);
      continue;
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return (a == std::string::npos) ? std::string() : s.substr(a, b - a + 1);
    };
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  return parse(is);
}

namespace {

// splitmix64, used to derive independent per-task seeds
uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c) {
  uint64_t x = a * 0x9E3779B97F4A7C15ull + b * 0xBF58476D1CE4E5B9ull + c;
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

struct Box {
  Vec3 min, max;
};

void stamp_box(std::vector<uint8_t>& occ, const GridSpec& spec, const Box& box) {
  Vec3i lo = spec.index_of(box.min).cwiseMax(Vec3i::Zero());
  Vec3i hi = spec.index_of(box.max).cwiseMin(spec.dims - Vec3i::Ones());
  for (int z = lo.z(); z <= hi.z(); ++z)
    for (int y = lo.y(); y <= hi.y(); ++y)
      for (int x = lo.x(); x <= hi.x(); ++x) {
        const Vec3 c = spec.center_of({x, y, z});
        if ((c.array() >= box.min.array()).all() && (c.array() <= box.max.array()).all())
          occ[spec.linear({x, y, z})] = 1;
      }
}

UniformBSpline straight_reference(const Vec3& start, const Vec3& goal, double speed,
                                  double spacing) {
  const double dist = (goal - start).norm();
  const int n_seg = std::max(3, static_cast<int>(std::llround(dist / spacing)));
  const Vec3 d = (goal - start) / n_seg;
  const double dt = d.norm() / speed;
  // collinear equally spaced control points give exact constant velocity;
  // domain endpoints land on Q_1 and Q_{N-1}
  std::vector<Vec3> q(n_seg + 3);
  for (size_t i = 0; i < q.size(); ++i)
    q[i] = start + (static_cast<double>(i) - 1.0) * d;
  return UniformBSpline(3, std::move(q), dt);
}

}  // namespace

GeneratedTask generate_map(const ScenarioConfig& cfg, DensityTier tier, uint64_t seed) {
  std::mt19937_64 rng(seed);
  GridSpec spec;
  spec.origin = Vec3::Zero();
  spec.voxel_size = cfg.voxel_size;
  for (int a = 0; a < 3; ++a)
    spec.dims[a] = std::max(1, static_cast<int>(std::llround(cfg.map_size[a] /
                                                             cfg.voxel_size)));

  const int count = tier == DensityTier::kLow      ? cfg.obstacles_low
                    : tier == DensityTier::kMedium ? cfg.obstacles_medium
                                                   : cfg.obstacles_high;

  const double clear_zone = 3.0;  // obstacle-free slabs around start and goal
  std::uniform_real_distribution<double> ux(clear_zone, cfg.map_size.x() - clear_zone);
  std::uniform_real_distribution<double> uy(0.8, cfg.map_size.y() - 0.8);
  std::uniform_real_distribution<double> uhalf(cfg.obstacle_min_xy / 2.0,
                                               cfg.obstacle_max_xy / 2.0);
  std::uniform_real_distribution<double> uheight(cfg.obstacle_min_height,
                                                 cfg.obstacle_max_height);
  std::uniform_real_distribution<double> uend(2.0, cfg.map_size.y() - 2.0);

  std::vector<uint8_t> occ(spec.cell_count(), 0);
  for (int i = 0; i < count; ++i) {
    const double cx = ux(rng), cy = uy(rng);
    const double hx = uhalf(rng), hy = uhalf(rng);
    const double h = uheight(rng);
    stamp_box(occ, spec, {{cx - hx, cy - hy, 0.0}, {cx + hx, cy + hy, h}});
  }

  const double fly_z = 1.5;
  const Vec3 start(1.0, uend(rng), fly_z);
  const Vec3 goal(cfg.map_size.x() - 1.0, uend(rng), fly_z);

  // guarantee the reference line is blocked so every task triggers replanning
  {
    GridSpec probe_spec = spec;
    VoxelField probe(occ, probe_spec);
    if (probe.line_visible(start, goal, 0.0).visible) {
      const Vec3 mid = 0.5 * (start + goal);
      stamp_box(occ, spec,
                {{mid.x() - 0.4, mid.y() - 0.4, 0.0},
                 {mid.x() + 0.4, mid.y() + 0.4, cfg.obstacle_min_height}});
    }
  }

  VoxelField field(std::move(occ), spec, QueryPolicy{10.0, cfg.topo.margin});
  UniformBSpline ref =
      straight_reference(start, goal, cfg.reference_speed, cfg.ctrl_pt_spacing);
  return {std::move(field), start, goal, std::move(ref)};
}

uint64_t task_seed(const ScenarioConfig& cfg, DensityTier tier, int task_id) {
  return mix_seed(cfg.rng_seed, static_cast<uint64_t>(tier) + 1, task_id);
}

ReplanRequest make_request(const ScenarioConfig& cfg, const GeneratedTask& task,
                           uint64_t seed) {
  ReplanRequest req{task.reference};
  req.t_now = task.reference.t_min();
  req.horizon = cfg.horizon;
  req.cube_inflation = cfg.cube_inflation;
  req.roadmap_budget_s = cfg.roadmap_budget_s;
  req.optimize_budget_s = cfg.optimize_budget_s;
  req.ctrl_pt_spacing = cfg.ctrl_pt_spacing;
  req.weights = cfg.weights;
  req.topo = cfg.topo;
  req.rng_seed = seed;
  req.deterministic = cfg.test_mode;
  return req;
}

bool trajectory_feasible(const UniformBSpline& traj, const VoxelField& field,
                         const PgoWeights& w) {
  const UniformBSpline vel = traj.derivative();
  const UniformBSpline acc = vel.derivative();
  const double step = field.spec().voxel_size / 4.0;
  const double dt = traj.dt();
  // worst-case time step from the velocity bound
  const int n = std::max(
      16, static_cast<int>(std::ceil(traj.duration() * (1.05 * w.v_max) / step)));
  for (int i = 0; i <= n; ++i) {
    const double t = traj.t_min() + traj.duration() * i / n;
    if (field.distance_at(traj.evaluate(t)) <= 0.0) return false;
    // per-axis limits, matching the per-axis penalty form
    if (vel.evaluate(t - dt).cwiseAbs().maxCoeff() > 1.05 * w.v_max) return false;
    if (acc.evaluate(t - 2.0 * dt).cwiseAbs().maxCoeff() > 1.05 * w.a_max)
      return false;
  }
  return true;
}

namespace {

struct TaskResult {
  BenchmarkRecord guided;
  BenchmarkRecord unguided;
};

// Picks the cheapest dense-audited trajectory to execute. The candidate set
// is the guided ones plus a plain phase-2 refinement of the initial spline:
// the guided starting points occasionally settle in a slightly worse local
// minimum of the same basin, and the control-point clearance test inside
// replan() is necessary but not sufficient for the sampled curve.
std::optional<UniformBSpline> select_executed(const ReplanOutcome& outcome,
                                              const VoxelField& field,
                                              const ReplanRequest& req) {
  std::optional<UniformBSpline> best;
  double best_cost = 0.0;
  auto consider = [&](const UniformBSpline& traj, double cost) {
    if (!trajectory_feasible(traj, field, req.weights)) return;
    if (!best || cost < best_cost) {
      best = traj;
      best_cost = cost;
    }
  };
  for (const auto& c : outcome.candidates)
    if (!c.failed) consider(c.trajectory, c.total_cost);
  if (outcome.initial) {
    const auto refined = phase2_refine(*outcome.initial, field, req.weights,
                                       req.optimize_budget_s, req.deterministic)
                             .first;
    consider(refined,
             phase2_costs(refined, field, req.weights).total(req.weights));
  }
  return best;
}

TaskResult run_one_task(const ScenarioConfig& cfg, DensityTier tier, int task_id) {
  const uint64_t seed = task_seed(cfg, tier, task_id);
  const GeneratedTask task = generate_map(cfg, tier, seed);
  const ReplanRequest req = make_request(cfg, task, mix_seed(seed, 7, 1));

  TaskResult out;
  out.guided = {task_id, tier_name(tier), "guided", false, 0.0, 0.0, 0.0, 0};
  out.unguided = {task_id, tier_name(tier), "unguided", false, 0.0, 0.0, 0.0, 0};

  ReplanOutcome outcome = replan(req, task.field);
  out.guided.candidates = static_cast<int>(outcome.candidates.size());
  const std::optional<UniformBSpline> traj =
      select_executed(outcome, task.field, req);
  if (traj) {
    out.guided.success = true;
    out.guided.smoothness = traj->smoothness_metric();
  }
  if (!cfg.test_mode) {
    out.guided.roadmap_ms = outcome.roadmap_seconds * 1e3;
    out.guided.optimize_ms = outcome.optimize_seconds * 1e3;
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto base = unguided_replan(req, task.field);
  if (base && trajectory_feasible(base->first, task.field, req.weights)) {
    out.unguided.success = true;
    out.unguided.smoothness = base->first.smoothness_metric();
  }
  if (!cfg.test_mode)
    out.unguided.optimize_ms =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() *
        1e3;
  return out;
}

std::string format_record(const BenchmarkRecord& r) {
  char buf[256];
  if (r.success)
    std::snprintf(buf, sizeof(buf), "%d,%s,%s,1,%.6f,%.3f,%.3f,%d", r.task_id,
                  r.tier.c_str(), r.method.c_str(), r.smoothness, r.roadmap_ms,
                  r.optimize_ms, r.candidates);
  else
    std::snprintf(buf, sizeof(buf), "%d,%s,%s,0,,%.3f,%.3f,%d", r.task_id,
                  r.tier.c_str(), r.method.c_str(), r.roadmap_ms, r.optimize_ms,
                  r.candidates);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t m = v.size() / 2;
  return (v.size() % 2) ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

BenchmarkResult run_benchmark(const ScenarioConfig& cfg,
                              const std::vector<DensityTier>& tiers) {
  BenchmarkResult result;
  std::vector<TaskResult> results(tiers.size() * cfg.tasks);

  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const size_t i = next.fetch_add(1);
        if (i >= results.size()) break;
        const DensityTier tier = tiers[i / cfg.tasks];
        results[i] = run_one_task(cfg, tier, static_cast<int>(i % cfg.tasks));
      }
    });
  }
  for (auto& t : pool) t.join();

  for (auto& r : results) {
    result.records.push_back(std::move(r.guided));
    result.records.push_back(std::move(r.unguided));
  }
  return result;
}

std::string BenchmarkResult::csv() const {
  std::string out =
      "task_id,tier,method,success,smoothness,roadmap_ms,optimize_ms,candidates\n";
  for (const auto& r : records) {
    out += format_record(r);
    out += '\n';
  }
  return out;
}

std::string BenchmarkResult::summary() const {
  struct Agg {
    int n = 0, ok = 0;
    std::vector<double> smooth, road, opt;
  };
  std::map<std::pair<std::string, std::string>, Agg> agg;
  for (const auto& r : records) {
    auto& a = agg[{r.tier, r.method}];
    ++a.n;
    if (r.success) {
      ++a.ok;
      a.smooth.push_back(r.smoothness);
    }
    a.road.push_back(r.roadmap_ms);
    a.opt.push_back(r.optimize_ms);
  }
  std::ostringstream os;
  os << "tier     method    tasks  success%  med_smooth  med_road_ms  med_opt_ms\n";
  for (const auto& [key, a] : agg) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-8s %-9s %5d  %8.1f  %10.4f  %11.3f  %10.3f\n",
                  key.first.c_str(), key.second.c_str(), a.n,
                  a.n ? 100.0 * a.ok / a.n : 0.0, median(a.smooth), median(a.road),
                  median(a.opt));
    os << buf;
  }
  return os.str();
}

void dump_artifacts(const ScenarioConfig& cfg, DensityTier tier, int task_id,
                    const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const uint64_t seed = task_seed(cfg, tier, task_id);
  const GeneratedTask task = generate_map(cfg, tier, seed);
  const ReplanRequest req = make_request(cfg, task, mix_seed(seed, 7, 1));

  task.field.save_file(dir + "/map.txt");
  {
    std::ofstream os(dir + "/reference.txt");
    write_spline(os, task.reference);
  }

  const ReplanOutcome outcome = replan(req, task.field);
  std::ofstream info(dir + "/info.txt");
  info << "triggered " << outcome.triggered << "\n";
  if (!outcome.triggered) return;
  info << "segment " << outcome.segment->first << ' ' << outcome.segment->second
       << "\n";
  info << "candidates " << outcome.candidates.size() << "\n";
  info << "best " << (outcome.best ? static_cast<long>(*outcome.best) : -1) << "\n";

  {
    std::ofstream os(dir + "/initial.txt");
    write_spline(os, *outcome.initial);
  }
  {
    std::ofstream os(dir + "/roadmap.txt");
    os.precision(17);
    for (const auto& n : outcome.roadmap.nodes) {
      os << (n.kind == NodeKind::kGuard ? "guard" : "connector") << ' '
         << n.position.x() << ' ' << n.position.y() << ' ' << n.position.z();
      for (int nb : n.neighbors) os << ' ' << nb;
      os << '\n';
    }
  }
  {
    std::ofstream os(dir + "/guides.txt");
    os.precision(17);
    for (const auto& c : outcome.candidates) {
      for (const auto& p : c.guide.waypoints())
        os << p.x() << ' ' << p.y() << ' ' << p.z() << "  ";
      os << '\n';
    }
  }
  for (size_t i = 0; i < outcome.candidates.size(); ++i) {
    std::ofstream os(dir + "/candidate_" + std::to_string(i) + ".txt");
    write_spline(os, outcome.candidates[i].trajectory);
  }
  if (const auto selected = select_executed(outcome, task.field, req)) {
    std::ofstream os(dir + "/selected.txt");
    write_spline(os, *selected);
  }
}

}  // namespace pathguide
