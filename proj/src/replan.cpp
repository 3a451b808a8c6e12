#include "pathguide/replan.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>

namespace pathguide {

namespace {

double now_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Segment {
  double t_a, t_b;
  UniformBSpline init;
};

std::optional<Segment> prepare_segment(const ReplanRequest& req,
                                       const VoxelField& field) {
  const auto interval = check_collision(req.reference, field, req.t_now, req.horizon,
                                        req.weights.clearance);
  if (!interval) return std::nullopt;
  const auto [t_a, t_b] = *interval;

  const int n_samples = 50;
  std::vector<TimedSample> samples(n_samples);
  double arc = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const double t = t_a + (t_b - t_a) * i / (n_samples - 1);
    samples[i] = {t, req.reference.evaluate(t)};
    if (i > 0) arc += (samples[i].position - samples[i - 1].position).norm();
  }

  constexpr int p = 3;
  // short segments still get enough free control points to shape a detour:
  // with p anchored points per side, the lateral maneuver only spans
  // (n - 2p + 2) of the n knot intervals, so keep n well above 2p
  const int n_spans =
      std::max(4 * p, static_cast<int>(std::llround(arc / req.ctrl_pt_spacing)));
  const double dt = (t_b - t_a) / n_spans;

  BoundaryState start{req.reference.evaluate(t_a), req.reference.velocity(t_a),
                      req.reference.acceleration(t_a)};
  BoundaryState end{req.reference.evaluate(t_b), req.reference.velocity(t_b),
                    req.reference.acceleration(t_b)};
  return Segment{t_a, t_b, fit_cubic_segment(samples, dt, start, end)};
}

bool candidate_in_collision(const UniformBSpline& spline, const VoxelField& field) {
  const int p = spline.degree();
  const int n = spline.num_ctrl_pts() - 1;
  for (int i = p; i <= n - p; ++i)
    if (field.distance_at(spline.ctrl_pt(i)) <= 0.0) return true;
  return false;
}

}  // namespace

std::optional<std::pair<double, double>> check_collision(
    const UniformBSpline& reference, const VoxelField& field, double t_now,
    double horizon, double clearance) {
  const double step_len = field.spec().voxel_size / 2.0;
  const UniformBSpline vel = reference.derivative();

  struct Sample {
    double t, arc, dist;
  };
  std::vector<Sample> samples;
  double t = std::max(t_now, reference.t_min());
  double arc = 0.0;
  Vec3 prev = reference.evaluate(t);
  while (true) {
    const Vec3 pos = reference.evaluate(t);
    arc += (pos - prev).norm();
    prev = pos;
    samples.push_back({t, arc, field.distance_at(pos)});
    if (t >= reference.t_max()) break;
    const double speed = std::max(vel.evaluate(t - reference.dt()).norm(), 0.2);
    t = std::min(t + step_len / speed, reference.t_max());
  }

  int first = -1;
  for (size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].arc > horizon) break;
    if (samples[i].dist <= 0.0) {
      first = static_cast<int>(i);
      break;
    }
  }
  if (first < 0) return std::nullopt;

  int last = first;
  while (last + 1 < static_cast<int>(samples.size()) && samples[last + 1].dist <= 0.0)
    ++last;

  // expand to safely anchored boundary states
  int ia = first;
  while (ia > 0 && samples[ia].dist <= clearance) --ia;
  int ib = last;
  while (ib + 1 < static_cast<int>(samples.size()) && samples[ib].dist <= clearance)
    ++ib;
  return std::make_pair(samples[ia].t, samples[ib].t);
}

Aabb replan_cube(const Vec3& a, const Vec3& b, const Vec3& inflation) {
  Aabb box;
  box.min = a.cwiseMin(b) - inflation;
  box.max = a.cwiseMax(b) + inflation;
  return box;
}

ReplanOutcome replan(const ReplanRequest& req, const VoxelField& field) {
  ReplanOutcome out;
  const auto seg = prepare_segment(req, field);
  if (!seg) return out;
  out.triggered = true;
  out.segment = {seg->t_a, seg->t_b};
  out.initial = seg->init;

  const Vec3 pa = req.reference.evaluate(seg->t_a);
  const Vec3 pb = req.reference.evaluate(seg->t_b);
  Aabb region = replan_cube(pa, pb, req.cube_inflation).intersect(field.spec().bounds());

  TopoConfig topo = req.topo;
  topo.deterministic = req.deterministic;
  // split the roadmap budget between sampling and shorten/prune
  topo.t_max = 0.5 * req.roadmap_budget_s;

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<GuidingPath> guides;
  try {
    out.roadmap = build_roadmap(field, pa, pb, region, topo, req.rng_seed);
    std::vector<Polyline> raw = search_paths(out.roadmap, topo);
    std::stable_sort(raw.begin(), raw.end(), [](const Polyline& a, const Polyline& b) {
      return polyline_length(a) < polyline_length(b);
    });
    // leave headroom for the granularity of the budget checks inside
    const double prune_budget =
        req.deterministic ? -1.0 : 0.8 * (req.roadmap_budget_s - now_seconds(t0));
    guides = select_guiding_paths(raw, field, topo, prune_budget);
  } catch (const std::invalid_argument&) {
    // anchors too close to obstacles for the roadmap margin; fall back below
  }
  out.roadmap_seconds = now_seconds(t0);

  if (guides.empty()) return out;  // caller may fall back to unguided refinement

  const auto t1 = std::chrono::steady_clock::now();
  std::vector<std::future<ReplanCandidate>> jobs;
  jobs.reserve(guides.size());
  for (const auto& guide : guides) {
    jobs.push_back(std::async(std::launch::async, [&, guide]() {
      ReplanCandidate cand{guide, seg->init, {}, {}, 0.0, false};
      auto res = pgo_replan(seg->init, guide, field, req.weights,
                            req.optimize_budget_s, req.deterministic);
      cand.trajectory = std::move(res.trajectory);
      cand.phase1 = res.phase1;
      cand.phase2 = res.phase2;
      cand.total_cost = res.phase2.final_cost;
      cand.failed = candidate_in_collision(cand.trajectory, field);
      return cand;
    }));
  }
  for (auto& job : jobs) out.candidates.push_back(job.get());
  out.optimize_seconds = now_seconds(t1);

  for (size_t i = 0; i < out.candidates.size(); ++i) {
    if (out.candidates[i].failed) continue;
    if (!out.best || out.candidates[i].total_cost < out.candidates[*out.best].total_cost)
      out.best = i;
  }
  return out;
}

std::optional<std::pair<UniformBSpline, OptimizationReport>> unguided_replan(
    const ReplanRequest& req, const VoxelField& field) {
  const auto seg = prepare_segment(req, field);
  if (!seg) return std::nullopt;
  return phase2_refine(seg->init, field, req.weights, req.optimize_budget_s,
                       req.deterministic);
}

}  // namespace pathguide
