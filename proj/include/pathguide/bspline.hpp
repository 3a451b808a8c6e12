#pragma once

#include <iosfwd>
#include <vector>

#include "pathguide/common.hpp"

namespace pathguide {

struct DerivativeCtrlPts {
  std::vector<Vec3> velocity;      // V_i = (Q_{i+1} - Q_i)/dt
  std::vector<Vec3> acceleration;  // A_i = (V_{i+1} - V_i)/dt
};

// Boundary state of a trajectory segment.
struct BoundaryState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
};

struct TimedSample {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
};

// Uniform B-spline of degree p over knots t_i = i*dt. The valid domain is
// [p*dt, (N+1)*dt] for N+1 control points. Immutable value type.
class UniformBSpline {
 public:
  UniformBSpline(int degree, std::vector<Vec3> ctrl_pts, double dt);

  int degree() const { return degree_; }
  double dt() const { return dt_; }
  int num_ctrl_pts() const { return static_cast<int>(ctrl_pts_.size()); }
  const std::vector<Vec3>& ctrl_pts() const { return ctrl_pts_; }
  const Vec3& ctrl_pt(int i) const { return ctrl_pts_[i]; }

  double t_min() const { return degree_ * dt_; }
  double t_max() const { return ctrl_pts_.size() * dt_; }
  double duration() const { return t_max() - t_min(); }

  // de Boor evaluation; throws std::domain_error outside [t_min, t_max].
  Vec3 evaluate(double t) const;
  Vec3 velocity(double t) const;
  Vec3 acceleration(double t) const;
  Vec3 jerk(double t) const;

  DerivativeCtrlPts derivative_ctrl_pts() const;

  // Spline of degree p-1 whose value at (t - dt) is the time derivative of
  // this spline at t.
  UniformBSpline derivative() const;

  UniformBSpline with_ctrl_pts(std::vector<Vec3> pts) const {
    return UniformBSpline(degree_, std::move(pts), dt_);
  }

  // Integral of squared jerk over the domain, dense midpoint sampling at
  // step dt/20.
  double smoothness_metric() const;

  // Basis values N_{k-p..k,p}(t) of the active control points and the span k.
  void basis_at(double t, int& span, std::vector<double>& weights) const;

 private:
  int degree_;
  std::vector<Vec3> ctrl_pts_;
  double dt_;
};

// Least-squares fit of a cubic uniform B-spline to timestamped samples, with
// the first/last 3 control points solved so boundary position/velocity/
// acceleration match `start`/`end` exactly.
UniformBSpline fit_cubic_segment(const std::vector<TimedSample>& samples,
                                 double dt, const BoundaryState& start,
                                 const BoundaryState& end);

// Convenience overload estimating boundary states from sample differences.
UniformBSpline fit_cubic_segment(const std::vector<TimedSample>& samples,
                                 double dt);

// Plain-text dump: header "degree dt N" then one "x y z" line per control
// point.
void write_spline(std::ostream& os, const UniformBSpline& spline);
UniformBSpline read_spline(std::istream& is);

}  // namespace pathguide
