#include "pathguide/bspline.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace pathguide {

UniformBSpline::UniformBSpline(int degree, std::vector<Vec3> ctrl_pts, double dt)
    : degree_(degree), ctrl_pts_(std::move(ctrl_pts)), dt_(dt) {
  if (degree_ < 0) throw std::invalid_argument("degree must be >= 0");
  if (dt_ <= 0.0) throw std::invalid_argument("dt must be > 0");
  if (static_cast<int>(ctrl_pts_.size()) < degree_ + 1)
    throw std::invalid_argument("need at least degree+1 control points");
}

Vec3 UniformBSpline::evaluate(double t) const {
  constexpr double kEps = 1e-9;
  if (t < t_min() - kEps || t > t_max() + kEps)
    throw std::domain_error("evaluation time outside spline domain");
  t = std::clamp(t, t_min(), t_max());
  const int n = num_ctrl_pts() - 1;
  int k = std::clamp(static_cast<int>(std::floor(t / dt_)), degree_, n);

  std::vector<Vec3> d(degree_ + 1);
  for (int j = 0; j <= degree_; ++j) d[j] = ctrl_pts_[k - degree_ + j];
  for (int r = 1; r <= degree_; ++r) {
    for (int j = degree_; j >= r; --j) {
      const int i = k - degree_ + j;
      const double alpha = (t - i * dt_) / ((degree_ - r + 1) * dt_);
      d[j] = (1.0 - alpha) * d[j - 1] + alpha * d[j];
    }
  }
  return d[degree_];
}

void UniformBSpline::basis_at(double t, int& span, std::vector<double>& w) const {
  t = std::clamp(t, t_min(), t_max());
  const int n = num_ctrl_pts() - 1;
  span = std::clamp(static_cast<int>(std::floor(t / dt_)), degree_, n);

  // Cox-de Boor triangular scheme on the uniform knot vector t_i = i*dt.
  w.assign(degree_ + 1, 0.0);
  std::vector<double> left(degree_ + 1), right(degree_ + 1);
  w[0] = 1.0;
  for (int j = 1; j <= degree_; ++j) {
    left[j] = t - (span + 1 - j) * dt_;
    right[j] = (span + j) * dt_ - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = w[r] / (right[r + 1] + left[j - r]);
      w[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    w[j] = saved;
  }
}

UniformBSpline UniformBSpline::derivative() const {
  if (degree_ < 1 || num_ctrl_pts() < 2)
    throw std::invalid_argument("cannot differentiate a degree-0 spline");
  std::vector<Vec3> v(ctrl_pts_.size() - 1);
  for (size_t i = 0; i + 1 < ctrl_pts_.size(); ++i)
    v[i] = (ctrl_pts_[i + 1] - ctrl_pts_[i]) / dt_;
  return UniformBSpline(degree_ - 1, std::move(v), dt_);
}

Vec3 UniformBSpline::velocity(double t) const { return derivative().evaluate(t - dt_); }

Vec3 UniformBSpline::acceleration(double t) const {
  return derivative().derivative().evaluate(t - 2.0 * dt_);
}

Vec3 UniformBSpline::jerk(double t) const {
  return derivative().derivative().derivative().evaluate(t - 3.0 * dt_);
}

DerivativeCtrlPts UniformBSpline::derivative_ctrl_pts() const {
  const int n = num_ctrl_pts() - 1;
  if (n < 2) throw std::invalid_argument("need at least 3 control points");
  DerivativeCtrlPts out;
  out.velocity.resize(n);
  for (int i = 0; i < n; ++i) out.velocity[i] = (ctrl_pts_[i + 1] - ctrl_pts_[i]) / dt_;
  out.acceleration.resize(n - 1);
  for (int i = 0; i + 1 < n; ++i)
    out.acceleration[i] = (out.velocity[i + 1] - out.velocity[i]) / dt_;
  return out;
}

double UniformBSpline::smoothness_metric() const {
  if (degree_ < 3 || num_ctrl_pts() < 4)
    throw std::invalid_argument("smoothness needs a degree >= 3 spline");
  const UniformBSpline j3 = derivative().derivative().derivative();
  const double h = dt_ / 20.0;
  const int n = std::max(1, static_cast<int>(std::llround(duration() / h)));
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = t_min() + (i + 0.5) * duration() / n;
    acc += j3.evaluate(t - 3.0 * dt_).squaredNorm();
  }
  return acc * duration() / n;
}

namespace {

// Q0..Q2 of a cubic uniform B-spline from the boundary state at the domain
// start; mirrored for the end.
void solve_cubic_boundary(const BoundaryState& s, double dt, Vec3& q0, Vec3& q1,
                          Vec3& q2) {
  q1 = s.position - dt * dt / 6.0 * s.acceleration;
  q0 = q1 + dt * dt / 2.0 * s.acceleration - dt * s.velocity;
  q2 = q1 + dt * dt / 2.0 * s.acceleration + dt * s.velocity;
}

}  // namespace

UniformBSpline fit_cubic_segment(const std::vector<TimedSample>& samples, double dt,
                                 const BoundaryState& start, const BoundaryState& end) {
  constexpr int p = 3;
  if (static_cast<int>(samples.size()) < p + 1)
    throw std::invalid_argument("need at least degree+1 samples");
  for (size_t i = 1; i < samples.size(); ++i)
    if (samples[i].t <= samples[i - 1].t)
      throw std::invalid_argument("timestamps must be strictly increasing");
  if (dt <= 0.0) throw std::invalid_argument("dt must be > 0");

  const double t0 = samples.front().t;
  const double duration = samples.back().t - t0;
  const int n_spans = std::max(p, static_cast<int>(std::llround(duration / dt)));
  const double dt_eff = duration / n_spans;
  const int num_pts = n_spans + p;  // N + 1
  const int n_idx = num_pts - 1;

  std::vector<Vec3> q(num_pts, Vec3::Zero());
  solve_cubic_boundary(start, dt_eff, q[0], q[1], q[2]);
  // mirrored end solve: reuse start formulas with negated velocity, then swap
  BoundaryState rev = end;
  rev.velocity = -rev.velocity;
  solve_cubic_boundary(rev, dt_eff, q[n_idx], q[n_idx - 1], q[n_idx - 2]);

  const int n_free = num_pts - 2 * p;
  UniformBSpline shape(p, std::vector<Vec3>(num_pts, Vec3::Zero()), dt_eff);
  if (n_free > 0) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(samples.size(), n_free);
    Eigen::MatrixXd b(samples.size(), 3);
    std::vector<double> w;
    int span;
    for (size_t j = 0; j < samples.size(); ++j) {
      const double u = shape.t_min() + (samples[j].t - t0);
      shape.basis_at(u, span, w);
      Vec3 rhs = samples[j].position;
      for (int r = 0; r <= p; ++r) {
        const int i = span - p + r;
        if (i >= p && i <= n_idx - p)
          a(j, i - p) = w[r];
        else
          rhs -= w[r] * q[i];
      }
      b.row(j) = rhs.transpose();
    }
    const Eigen::MatrixXd h =
        a.transpose() * a + 1e-8 * Eigen::MatrixXd::Identity(n_free, n_free);
    const Eigen::MatrixXd x = h.ldlt().solve(a.transpose() * b);
    for (int i = 0; i < n_free; ++i) q[p + i] = x.row(i).transpose();
  }
  return UniformBSpline(p, std::move(q), dt_eff);
}

UniformBSpline fit_cubic_segment(const std::vector<TimedSample>& samples, double dt) {
  if (samples.size() < 4) throw std::invalid_argument("need at least degree+1 samples");
  auto est = [&](size_t i0, size_t i1, size_t i2) {
    BoundaryState s;
    s.position = samples[i0].position;
    const double h1 = samples[i1].t - samples[i0].t;
    const double h2 = samples[i2].t - samples[i1].t;
    const Vec3 v1 = (samples[i1].position - samples[i0].position) / h1;
    const Vec3 v2 = (samples[i2].position - samples[i1].position) / h2;
    s.velocity = v1;
    s.acceleration = (v2 - v1) / (0.5 * (h1 + h2));
    return s;
  };
  const size_t m = samples.size();
  BoundaryState start = est(0, 1, 2);
  // negative step sizes cancel, so est() is sign-correct at the tail too
  BoundaryState end = est(m - 1, m - 2, m - 3);
  return fit_cubic_segment(samples, dt, start, end);
}

void write_spline(std::ostream& os, const UniformBSpline& spline) {
  os.precision(17);
  os << spline.degree() << ' ' << spline.dt() << ' ' << spline.num_ctrl_pts() - 1
     << '\n';
  for (const auto& q : spline.ctrl_pts())
    os << q.x() << ' ' << q.y() << ' ' << q.z() << '\n';
}

UniformBSpline read_spline(std::istream& is) {
  int degree, n;
  double dt;
  if (!(is >> degree >> dt >> n)) throw std::invalid_argument("malformed spline header");
  std::vector<Vec3> q(n + 1);
  for (auto& pt : q)
    if (!(is >> pt.x() >> pt.y() >> pt.z()))
      throw std::invalid_argument("malformed control point");
  return UniformBSpline(degree, std::move(q), dt);
}

}  // namespace pathguide
