#include "pathguide/pgo.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "pathguide/lbfgs.hpp"

namespace pathguide {

GuidingPath::GuidingPath(Polyline waypoints) : waypoints_(std::move(waypoints)) {
  if (waypoints_.empty()) throw std::invalid_argument("empty guiding path");
  cum_len_.resize(waypoints_.size());
  cum_len_[0] = 0.0;
  for (size_t i = 1; i < waypoints_.size(); ++i)
    cum_len_[i] = cum_len_[i - 1] + (waypoints_[i] - waypoints_[i - 1]).norm();
}

Vec3 GuidingPath::point_at_fraction(double f) const {
  f = std::clamp(f, 0.0, 1.0);
  const double target = f * cum_len_.back();
  if (cum_len_.back() <= 0.0) return waypoints_.front();
  auto it = std::lower_bound(cum_len_.begin(), cum_len_.end(), target);
  size_t i = std::min<size_t>(it - cum_len_.begin(), cum_len_.size() - 1);
  if (i == 0) return waypoints_.front();
  const double seg = cum_len_[i] - cum_len_[i - 1];
  if (seg <= 0.0) return waypoints_[i];
  const double a = (target - cum_len_[i - 1]) / seg;
  return waypoints_[i - 1] + a * (waypoints_[i] - waypoints_[i - 1]);
}

std::vector<Vec3> guide_points(const GuidingPath& path, const UniformBSpline& spline) {
  const int p = spline.degree();
  const int n = spline.num_ctrl_pts() - 1;
  const int m = n - 2 * p + 1;  // free control point count
  if (m < 1) throw std::invalid_argument("spline has no free control points");
  std::vector<Vec3> g(m);
  for (int i = 0; i < m; ++i) {
    const double f = (m == 1) ? 0.5 : static_cast<double>(i) / (m - 1);
    g[i] = path.point_at_fraction(f);
  }
  return g;
}

UniformBSpline phase1_solve(const UniformBSpline& init, const GuidingPath& path,
                            const PgoWeights& w) {
  const int p = init.degree();
  const int n = init.num_ctrl_pts() - 1;
  const int m = n - 2 * p + 1;
  if (m < 1) throw std::invalid_argument("spline has no free control points");
  const auto g = guide_points(path, init);

  // full smoothness quadratic S = D^T D over all control points, spans
  // i = p-1 .. n-p+1 with stencil [1, -2, 1]
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int i = p - 1; i <= n - p + 1; ++i) {
    const int c[3] = {i - 1, i, i + 1};
    const double v[3] = {1.0, -2.0, 1.0};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) s(c[a], c[b]) += v[a] * v[b];
  }

  Eigen::MatrixXd x_all(n + 1, 3);
  for (int i = 0; i <= n; ++i) x_all.row(i) = init.ctrl_pt(i).transpose();

  const auto free_of = [p](int i) { return i - p; };
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, 3);
  for (int i = p; i <= n - p; ++i) {
    for (int j = 0; j <= n; ++j) {
      if (j >= p && j <= n - p)
        h(free_of(i), free_of(j)) += w.lambda1_s * s(i, j);
      else
        rhs.row(free_of(i)) -= w.lambda1_s * s(i, j) * x_all.row(j);
    }
    h(free_of(i), free_of(i)) += w.lambda1_g;
    rhs.row(free_of(i)) += w.lambda1_g * g[i - p].transpose();
  }

  const Eigen::MatrixXd sol = h.ldlt().solve(rhs);
  std::vector<Vec3> q = init.ctrl_pts();
  for (int i = p; i <= n - p; ++i) q[i] = sol.row(free_of(i)).transpose();
  return init.with_ctrl_pts(std::move(q));
}

Phase2Costs phase2_costs(const UniformBSpline& spline, const VoxelField& field,
                         const PgoWeights& w) {
  const int p = spline.degree();
  const int n = spline.num_ctrl_pts() - 1;
  const int m = n - 2 * p + 1;
  const double dt = spline.dt();
  const auto& q = spline.ctrl_pts();

  Phase2Costs out;
  out.gradient.assign(std::max(m, 0), Vec3::Zero());
  auto add_grad = [&](int i, const Vec3& g) {
    if (i >= p && i <= n - p) out.gradient[i - p] += g;
  };

  // smoothness (elastic band over second differences)
  for (int i = p - 1; i <= n - p + 1; ++i) {
    const Vec3 d2 = q[i + 1] - 2.0 * q[i] + q[i - 1];
    out.f_s += d2.squaredNorm();
    add_grad(i + 1, w.lambda2_s * 2.0 * d2);
    add_grad(i, w.lambda2_s * -4.0 * d2);
    add_grad(i - 1, w.lambda2_s * 2.0 * d2);
  }

  // collision band penalty on free control points
  for (int i = p; i <= n - p; ++i) {
    const double d = field.distance_at(q[i]);
    if (d < w.clearance) {
      const double e = d - w.clearance;
      out.f_c += e * e;
      add_grad(i, w.lambda2_c * 2.0 * e * field.gradient_at(q[i]));
    }
  }

  // quartic one-sided velocity/acceleration penalties on control points
  for (int i = 0; i < n; ++i) {
    const Vec3 v = (q[i + 1] - q[i]) / dt;
    for (int ax = 0; ax < 3; ++ax) {
      const double excess = v[ax] * v[ax] - w.v_max * w.v_max;
      if (excess > 0.0) {
        out.f_v += excess * excess;
        const double dfdv = 4.0 * excess * v[ax];
        Vec3 g = Vec3::Zero();
        g[ax] = w.lambda2_d * dfdv / dt;
        add_grad(i + 1, g);
        add_grad(i, -g);
      }
    }
  }
  for (int i = 0; i + 1 < n; ++i) {
    const Vec3 a = (q[i + 2] - 2.0 * q[i + 1] + q[i]) / (dt * dt);
    for (int ax = 0; ax < 3; ++ax) {
      const double excess = a[ax] * a[ax] - w.a_max * w.a_max;
      if (excess > 0.0) {
        out.f_a += excess * excess;
        const double dfda = 4.0 * excess * a[ax];
        Vec3 g = Vec3::Zero();
        g[ax] = w.lambda2_d * dfda / (dt * dt);
        add_grad(i + 2, g);
        add_grad(i + 1, -2.0 * g);
        add_grad(i, g);
      }
    }
  }
  return out;
}

std::pair<UniformBSpline, OptimizationReport> phase2_refine(
    const UniformBSpline& warmup, const VoxelField& field, const PgoWeights& w,
    double budget_s, bool deterministic) {
  const auto t0 = std::chrono::steady_clock::now();
  OptimizationReport report;
  report.phase = 2;
  if (budget_s <= 0.0) {
    report.final_cost = phase2_costs(warmup, field, w).total(w);
    return {warmup, report};
  }

  const int p = warmup.degree();
  const int n = warmup.num_ctrl_pts() - 1;
  const int m = n - 2 * p + 1;
  if (m < 1) throw std::invalid_argument("spline has no free control points");

  std::vector<Vec3> q = warmup.ctrl_pts();
  Eigen::VectorXd x0(3 * m);
  for (int i = 0; i < m; ++i) x0.segment<3>(3 * i) = q[p + i];

  auto cost = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    for (int i = 0; i < m; ++i) q[p + i] = x.segment<3>(3 * i);
    const auto c = phase2_costs(warmup.with_ctrl_pts(q), field, w);
    for (int i = 0; i < m; ++i) grad.segment<3>(3 * i) = c.gradient[i];
    return c.total(w);
  };

  LbfgsOptions opts;
  opts.wall_budget_s = deterministic ? -1.0 : budget_s;
  const auto res = lbfgs_minimize(cost, x0, opts);

  for (int i = 0; i < m; ++i) q[p + i] = res.x.segment<3>(3 * i);
  report.converged = res.converged;
  report.iterations = res.iterations;
  report.final_cost = res.cost;
  report.elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {warmup.with_ctrl_pts(std::move(q)), report};
}

PgoResult pgo_replan(const UniformBSpline& init, const GuidingPath& path,
                     const VoxelField& field, const PgoWeights& w, double budget_s,
                     bool deterministic) {
  const auto t0 = std::chrono::steady_clock::now();
  UniformBSpline warm = phase1_solve(init, path, w);
  OptimizationReport p1;
  p1.phase = 1;
  p1.converged = true;
  p1.elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    const auto g = guide_points(path, warm);
    const int p = warm.degree();
    const int n = warm.num_ctrl_pts() - 1;
    double fs = 0.0, fg = 0.0;
    for (int i = p - 1; i <= n - p + 1; ++i)
      fs += (warm.ctrl_pt(i + 1) - 2.0 * warm.ctrl_pt(i) + warm.ctrl_pt(i - 1))
                .squaredNorm();
    for (int i = p; i <= n - p; ++i) fg += (warm.ctrl_pt(i) - g[i - p]).squaredNorm();
    p1.final_cost = w.lambda1_s * fs + w.lambda1_g * fg;
  }
  auto [refined, p2] = phase2_refine(warm, field, w, budget_s, deterministic);
  return {std::move(refined), p1, std::move(p2)};
}

}  // namespace pathguide
