#include "pathguide/topo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>

namespace pathguide {

namespace {

Vec3 polyline_at_fraction(const Polyline& pts, const std::vector<double>& cum,
                          double f) {
  const double total = cum.back();
  if (total <= 0.0) return pts.front();
  const double target = std::clamp(f, 0.0, 1.0) * total;
  auto it = std::lower_bound(cum.begin(), cum.end(), target);
  size_t i = std::min<size_t>(it - cum.begin(), cum.size() - 1);
  if (i == 0) return pts.front();
  const double seg = cum[i] - cum[i - 1];
  if (seg <= 0.0) return pts[i];
  return pts[i - 1] + (target - cum[i - 1]) / seg * (pts[i] - pts[i - 1]);
}

std::vector<double> cumulative(const Polyline& pts) {
  std::vector<double> cum(pts.size());
  cum[0] = 0.0;
  for (size_t i = 1; i < pts.size(); ++i)
    cum[i] = cum[i - 1] + (pts[i] - pts[i - 1]).norm();
  return cum;
}

// deterministic unit vector orthogonal to l, built from its smallest axis
Vec3 orthogonal_fallback(const Vec3& l) {
  int ax = 0;
  for (int a = 1; a < 3; ++a)
    if (std::abs(l[a]) < std::abs(l[ax])) ax = a;
  Vec3 e = Vec3::Zero();
  e[ax] = 1.0;
  return (e - e.dot(l) * l).normalized();
}

}  // namespace

bool uvd_equivalent(const Polyline& p1, const Polyline& p2, const VoxelField& field,
                    const TopoConfig& cfg) {
  if (p1.empty() || p2.empty()) throw std::invalid_argument("empty path");
  if ((p1.front() - p2.front()).norm() > 1e-9 || (p1.back() - p2.back()).norm() > 1e-9)
    throw std::invalid_argument("paths must share endpoints");
  const auto c1 = cumulative(p1);
  const auto c2 = cumulative(p2);
  for (int i = 0; i <= cfg.k_uvd; ++i) {
    const double s = static_cast<double>(i) / cfg.k_uvd;
    const Vec3 a = polyline_at_fraction(p1, c1, s);
    const Vec3 b = polyline_at_fraction(p2, c2, s);
    if (!field.line_visible(a, b, cfg.margin).visible) return false;
  }
  return true;
}

TopoRoadmap build_roadmap(const VoxelField& field, const Vec3& s, const Vec3& g,
                          const Aabb& region, const TopoConfig& cfg,
                          uint64_t rng_seed) {
  if (!region.contains(s) || !region.contains(g))
    throw std::invalid_argument("start/goal outside sample region");
  if (field.distance_at(s) <= cfg.margin || field.distance_at(g) <= cfg.margin)
    throw std::invalid_argument("start or goal in collision");

  TopoRoadmap map;
  map.sample_region = region;
  map.nodes.push_back({s, NodeKind::kGuard, {}});
  map.nodes.push_back({g, NodeKind::kGuard, {}});

  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> ux(region.min.x(), region.max.x());
  std::uniform_real_distribution<double> uy(region.min.y(), region.max.y());
  std::uniform_real_distribution<double> uz(region.min.z(), region.max.z());

  const auto start_time = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time)
        .count();
  };

  while (map.samples_drawn < cfg.n_max &&
         (cfg.deterministic || elapsed() <= cfg.t_max)) {
    ++map.samples_drawn;
    const Vec3 ps(ux(rng), uy(rng), uz(rng));
    if (field.distance_at(ps) <= cfg.margin) continue;

    std::vector<int> visible;
    for (int i = 0; i < static_cast<int>(map.nodes.size()); ++i) {
      if (map.nodes[i].kind != NodeKind::kGuard) continue;
      if (field.line_visible(ps, map.nodes[i].position, cfg.margin).visible)
        visible.push_back(i);
    }

    if (visible.empty()) {
      map.nodes.push_back({ps, NodeKind::kGuard, {}});
    } else if (visible.size() == 2) {
      const int g0 = visible[0], g1 = visible[1];
      const Polyline path1 = {map.nodes[g0].position, ps, map.nodes[g1].position};
      bool distinct = true;
      for (int ni : map.nodes[g0].neighbors) {
        auto& node = map.nodes[ni];
        if (node.kind != NodeKind::kConnector) continue;
        if (std::find(node.neighbors.begin(), node.neighbors.end(), g1) ==
            node.neighbors.end())
          continue;
        const Polyline path2 = {map.nodes[g0].position, node.position,
                                map.nodes[g1].position};
        if (uvd_equivalent(path1, path2, field, cfg)) {
          distinct = false;
          if (polyline_length(path1) < polyline_length(path2)) node.position = ps;
          break;
        }
      }
      if (distinct) {
        const int idx = static_cast<int>(map.nodes.size());
        map.nodes.push_back({ps, NodeKind::kConnector, {g0, g1}});
        map.nodes[g0].neighbors.push_back(idx);
        map.nodes[g1].neighbors.push_back(idx);
      }
    }
    // samples seeing exactly one or three-plus guards are discarded
  }
  return map;
}

std::vector<Polyline> search_paths(const TopoRoadmap& roadmap, const TopoConfig& cfg) {
  std::vector<Polyline> paths;
  std::vector<char> visited(roadmap.nodes.size(), 0);
  std::vector<int> stack;

  std::function<void(int)> dfs = [&](int node) {
    if (static_cast<int>(paths.size()) >= cfg.max_raw_paths) return;
    visited[node] = 1;
    stack.push_back(node);
    if (node == 1) {
      Polyline p;
      p.reserve(stack.size());
      for (int i : stack) p.push_back(roadmap.nodes[i].position);
      paths.push_back(std::move(p));
    } else {
      for (int nb : roadmap.nodes[node].neighbors)
        if (!visited[nb]) dfs(nb);
    }
    stack.pop_back();
    visited[node] = 0;
  };
  if (!roadmap.nodes.empty()) dfs(0);
  return paths;
}

namespace {

// One shortcut pass: walk the discretized path, and whenever the line from
// the last kept waypoint is blocked, push the blocking voxel center out of
// the margin band along the gradient component orthogonal to the line.
// `window` > 0 force-appends on-path samples so the output cannot run far
// ahead of the input; `prune` drops waypoints whose neighbors see each other.
// `out_of_time`, when set, aborts the pass between samples.
using Deadline = std::function<bool()>;
std::optional<Polyline> shortcut_pass(const Polyline& path, const VoxelField& field,
                                      double margin, double window, bool prune,
                                      const Deadline& out_of_time = {}) {
  const double step = field.spec().voxel_size;
  // half a voxel of headroom, otherwise the voxel-granular visibility test
  // can re-report a freshly pushed waypoint's own voxel as the blocker
  const double clear = margin + 0.5 * step + 1e-9;
  const auto cum = cumulative(path);
  const double total = cum.back();
  const int n = std::max(1, static_cast<int>(std::ceil(total / step)));

  Polyline kept = {path.front()};
  auto clear_to = [&](const Vec3& target) -> bool {
    for (int round = 0; round < 20; ++round) {
      const auto vis = field.line_visible(kept.back(), target, margin);
      if (vis.visible) return true;
      const Vec3 pb = field.spec().center_of(vis.blocking);
      const Vec3 l = (target - kept.back()).normalized();
      const Vec3 grad = field.gradient_at(pb);
      Vec3 dir = grad - grad.dot(l) * l;
      dir = (dir.norm() < 1e-6) ? orthogonal_fallback(l) : dir.normalized();

      Vec3 po = pb;
      int pushes = 0;
      while (field.distance_at(po) <= clear && pushes < 50) {
        po += dir * step;
        ++pushes;
      }
      if (field.distance_at(po) <= clear) return false;
      // keep pushing until the chord from the previous waypoint clears too
      while (!field.line_visible(kept.back(), po, margin).visible && pushes < 50) {
        po += dir * step;
        ++pushes;
      }
      if (!field.line_visible(kept.back(), po, margin).visible) return false;
      kept.push_back(po);
    }
    return field.line_visible(kept.back(), target, margin).visible;
  };

  for (int i = 1; i <= n; ++i) {
    if (out_of_time && out_of_time()) return std::nullopt;
    const Vec3 pd = polyline_at_fraction(path, cum, static_cast<double>(i) / n);
    if (!clear_to(pd)) return std::nullopt;
    if (window > 0.0 && (pd - kept.back()).norm() > window) kept.push_back(pd);
  }
  if (!clear_to(path.back())) return std::nullopt;
  kept.push_back(path.back());

  bool changed = prune;
  while (changed && kept.size() > 2) {
    if (out_of_time && out_of_time()) return std::nullopt;
    changed = false;
    for (size_t i = 1; i + 1 < kept.size(); ++i)
      if (field.line_visible(kept[i - 1], kept[i + 1], margin).visible) {
        kept.erase(kept.begin() + i);
        changed = true;
        break;
      }
  }
  return kept;
}

}  // namespace

ShortenResult shorten_path(const Polyline& path, const VoxelField& field,
                           const TopoConfig& cfg, double budget_s) {
  if (path.size() < 2) return {path, false};
  const auto t0 = std::chrono::steady_clock::now();
  auto out_of_time = [&] {
    return budget_s > 0.0 &&
           std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                   .count() > budget_s;
  };
  const double margin = cfg.margin;
  const double in_len = polyline_length(path);
  const bool detoured =
      !field.line_visible(path.front(), path.back(), margin).visible;

  // contract guarantees: collision-free chords, same UVD class, not longer,
  // and strictly shorter when the endpoints cannot see each other
  auto valid = [&](const Polyline& out) {
    for (size_t i = 1; i < out.size(); ++i)
      if (!field.line_visible(out[i - 1], out[i], 0.0).visible) return false;
    const double len = polyline_length(out);
    if (len > in_len + 1e-9) return false;
    if (detoured && !(len < in_len - 1e-9)) return false;
    return uvd_equivalent(path, out, field, cfg);
  };

  // progressively gentler attempts; the first contract-satisfying output wins
  for (const double window : {0.0, 1.5, 0.8, 0.4}) {
    if (window > 0.0 && out_of_time()) return {path, true};
    auto out = shortcut_pass(path, field, margin, window, true, out_of_time);
    if (out && polyline_length(*out) > in_len + 1e-9 && !out_of_time())
      if (auto again = shortcut_pass(*out, field, margin, window, true, out_of_time))
        out = std::move(again);
    if (out && valid(*out)) return {std::move(*out), false};
  }

  // drop redundant waypoints while equivalence to the original survives;
  // zig-zag inputs often carry retractable detours that defeat the walk
  Polyline base = path;
  for (bool changed = true; changed && base.size() > 2;) {
    changed = false;
    for (size_t i = 1; i + 1 < base.size(); ++i) {
      if (out_of_time()) return {path, true};
      if (!field.line_visible(base[i - 1], base[i + 1], margin).visible) continue;
      Polyline trial = base;
      trial.erase(trial.begin() + i);
      if (!uvd_equivalent(path, trial, field, cfg)) continue;
      base = std::move(trial);
      changed = true;
      break;
    }
  }

  // gentle mode: tightly windowed passes without pruning stay aligned with
  // the input; iterate, keeping the last output still equivalent to it
  for (const double window : {0.3, field.spec().voxel_size}) {
    Polyline cur = base;
    for (int it = 0; it < 40; ++it) {
      if (out_of_time()) return {path, true};
      auto next = shortcut_pass(cur, field, margin, window, false, out_of_time);
      if (!next || !uvd_equivalent(path, *next, field, cfg)) break;
      const bool stalled =
          polyline_length(*next) >= polyline_length(cur) - 1e-9;
      cur = std::move(*next);
      if (stalled) break;
    }
    if (valid(cur)) return {std::move(cur), false};
  }
  return {path, true};
}

std::vector<GuidingPath> select_guiding_paths(const std::vector<Polyline>& paths,
                                              const VoxelField& field,
                                              const TopoConfig& cfg,
                                              double budget_s) {
  struct Entry {
    Polyline path;
    double length;
    size_t order;
  };
  const auto start_time = std::chrono::steady_clock::now();
  std::vector<Entry> kept;
  size_t order = 0;
  for (const auto& raw : paths) {
    double remaining = -1.0;
    if (budget_s > 0.0) {
      remaining =
          budget_s -
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time)
              .count();
      if (!kept.empty() && remaining <= 0.0) break;
      // the first path always gets its primary pass, fallbacks only on budget
      remaining = std::max(remaining, 1e-6);
    }
    Polyline p = shorten_path(raw, field, cfg, remaining).path;
    const double len = polyline_length(p);
    bool matched = false;
    for (auto& rep : kept) {
      if (uvd_equivalent(p, rep.path, field, cfg)) {
        matched = true;
        if (len < rep.length) {
          rep.path = std::move(p);
          rep.length = len;
        }
        break;
      }
    }
    if (!matched) kept.push_back({std::move(p), len, order++});
  }

  std::stable_sort(kept.begin(), kept.end(), [](const Entry& a, const Entry& b) {
    return a.length < b.length;
  });
  if (static_cast<int>(kept.size()) > cfg.k_max) kept.resize(cfg.k_max);
  if (!kept.empty()) {
    const double shortest = kept.front().length;
    kept.erase(std::remove_if(kept.begin(), kept.end(),
                              [&](const Entry& e) {
                                return e.length > cfg.r_max * shortest;
                              }),
               kept.end());
  }

  std::vector<GuidingPath> out;
  out.reserve(kept.size());
  for (auto& e : kept) out.emplace_back(std::move(e.path));
  return out;
}

}  // namespace pathguide
