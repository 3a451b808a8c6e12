#include <doctest.h>

#include <random>
#include <sstream>

#include "pathguide/bspline.hpp"

using namespace pathguide;

namespace {

// Cox-de Boor recursion straight from the definition, knots t_i = i*dt.
double basis_recursive(int i, int p, double t, double dt) {
  if (p == 0) return (t >= i * dt && t < (i + 1) * dt) ? 1.0 : 0.0;
  const double a = (t - i * dt) / (p * dt);
  const double b = ((i + p + 1) * dt - t) / (p * dt);
  return a * basis_recursive(i, p - 1, t, dt) + b * basis_recursive(i + 1, p - 1, t, dt);
}

Vec3 eval_oracle(const UniformBSpline& s, double t) {
  Vec3 out = Vec3::Zero();
  for (int i = 0; i < s.num_ctrl_pts(); ++i)
    out += basis_recursive(i, s.degree(), t, s.dt()) * s.ctrl_pt(i);
  return out;
}

UniformBSpline random_spline(int n_pts, double dt, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Vec3> q(n_pts);
  for (auto& p : q) p = Vec3(u(rng), u(rng), u(rng));
  return UniformBSpline(3, std::move(q), dt);
}

}  // namespace

TEST_CASE("identical control points collapse to a constant curve") {
  const Vec3 c(1.0, -2.0, 0.5);
  UniformBSpline s(3, std::vector<Vec3>(6, c), 0.5);
  for (double t = s.t_min(); t <= s.t_max(); t += 0.11)
    CHECK((s.evaluate(t) - c).norm() < 1e-12);
}

TEST_CASE("collinear control points stay on the line") {
  std::vector<Vec3> q;
  for (int i = 0; i < 7; ++i) q.push_back(Vec3(i * 0.3, i * 0.6, -i * 0.1));
  const Vec3 dir = q[1].normalized();
  UniformBSpline s(3, q, 0.25);
  for (double t = s.t_min(); t <= s.t_max(); t += 0.07) {
    const Vec3 p = s.evaluate(t);
    CHECK((p - p.dot(dir) * dir).norm() < 1e-12);
  }
}

TEST_CASE("evaluation matches the basis-summation oracle") {
  std::vector<Vec3> q = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}, {4, 0, 0}};
  UniformBSpline s(3, q, 1.0);
  const double mid = 0.5 * (s.t_min() + s.t_max());
  CHECK((s.evaluate(mid) - eval_oracle(s, mid)).norm() < 1e-12);

  const auto r = random_spline(9, 0.4, 123);
  for (double t = r.t_min(); t < r.t_max(); t += 0.173)
    CHECK((r.evaluate(t) - eval_oracle(r, t)).norm() < 1e-10);
}

TEST_CASE("domain errors are rejected") {
  const auto s = random_spline(6, 0.5, 1);
  CHECK_THROWS_AS(s.evaluate(s.t_min() - 0.1), std::domain_error);
  CHECK_THROWS_AS(s.evaluate(s.t_max() + 0.1), std::domain_error);
}

TEST_CASE("derivative control points") {
  SUBCASE("constant curve has zero derivatives") {
    UniformBSpline s(3, std::vector<Vec3>(6, Vec3(1, 2, 3)), 0.5);
    const auto d = s.derivative_ctrl_pts();
    for (const auto& v : d.velocity) CHECK(v.norm() == 0.0);
    for (const auto& a : d.acceleration) CHECK(a.norm() == 0.0);
  }
  SUBCASE("uniformly spaced points give constant velocity") {
    std::vector<Vec3> q;
    for (int i = 0; i < 6; ++i) q.push_back(Vec3(i, 0, 0));
    UniformBSpline s(3, q, 0.5);
    for (const auto& v : s.derivative_ctrl_pts().velocity)
      CHECK((v - Vec3(2, 0, 0)).norm() < 1e-12);
  }
  SUBCASE("too few control points rejected") {
    UniformBSpline s(1, {Vec3::Zero(), Vec3::Ones()}, 0.5);
    CHECK_THROWS_AS(s.derivative_ctrl_pts(), std::invalid_argument);
  }
}

TEST_CASE("derivative spline matches finite differences of evaluate") {
  const auto s = random_spline(8, 0.5, 77);
  const double h = 1e-6;
  for (int i = 0; i < 50; ++i) {
    const double t =
        s.t_min() + (s.duration() - 2 * h) * (i + 0.5) / 50.0 + h;
    const Vec3 fd = (s.evaluate(t + h) - s.evaluate(t - h)) / (2 * h);
    const Vec3 v = s.velocity(t);
    CHECK((v - fd).norm() < 1e-5 * std::max(1.0, fd.norm()));
  }
}

TEST_CASE("convex hull property at random times") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto s = random_spline(8, 0.3, trial);
    const double t = s.t_min() + u(rng) * s.duration();
    const Vec3 p = s.evaluate(t);

    int span;
    std::vector<double> w;
    s.basis_at(t, span, w);
    // weights are a convex combination; verify explicitly
    double sum = 0.0;
    Vec3 combo = Vec3::Zero();
    for (int j = 0; j <= 3; ++j) {
      CHECK(w[j] >= -1e-9);
      sum += w[j];
      combo += w[j] * s.ctrl_pt(span - 3 + j);
    }
    CHECK(sum == doctest::Approx(1.0));
    CHECK((combo - p).norm() < 1e-9);
  }
}

TEST_CASE("translation equivariance") {
  const auto s = random_spline(7, 0.4, 9);
  const Vec3 c(0.7, -1.3, 2.2);
  std::vector<Vec3> shifted = s.ctrl_pts();
  for (auto& q : shifted) q += c;
  const auto s2 = s.with_ctrl_pts(shifted);
  for (double t = s.t_min(); t < s.t_max(); t += 0.21)
    CHECK((s2.evaluate(t) - s.evaluate(t) - c).norm() < 1e-12);
  CHECK(s2.smoothness_metric() == doctest::Approx(s.smoothness_metric()));
}

TEST_CASE("segment fitting") {
  SUBCASE("straight line at constant speed is recovered exactly") {
    std::vector<TimedSample> samples;
    const Vec3 a(0, 0, 0), dir(1.0, 0.5, 0.2);
    for (int i = 0; i <= 40; ++i) {
      const double t = i * 0.05;
      samples.push_back({t, a + t * dir});
    }
    BoundaryState s0{a, dir, Vec3::Zero()};
    BoundaryState s1{a + 2.0 * dir, dir, Vec3::Zero()};
    const auto fit = fit_cubic_segment(samples, 0.25, s0, s1);
    CHECK((fit.evaluate(fit.t_min()) - a).norm() < 1e-6);
    CHECK((fit.evaluate(fit.t_max()) - (a + 2.0 * dir)).norm() < 1e-6);
    CHECK((fit.velocity(fit.t_min()) - dir).norm() < 1e-9);
  }

  SUBCASE("round-trip of an existing cubic spline") {
    const auto orig = random_spline(10, 0.5, 31);
    std::vector<TimedSample> samples;
    for (int i = 0; i <= 200; ++i) {
      const double t = orig.t_min() + orig.duration() * i / 200.0;
      samples.push_back({t, orig.evaluate(t)});
    }
    BoundaryState s0{orig.evaluate(orig.t_min()), orig.velocity(orig.t_min()),
                     orig.acceleration(orig.t_min())};
    BoundaryState s1{orig.evaluate(orig.t_max()), orig.velocity(orig.t_max()),
                     orig.acceleration(orig.t_max())};
    const auto fit = fit_cubic_segment(samples, orig.dt(), s0, s1);
    REQUIRE(fit.num_ctrl_pts() == orig.num_ctrl_pts());
    for (int i = 0; i < fit.num_ctrl_pts(); ++i)
      CHECK((fit.ctrl_pt(i) - orig.ctrl_pt(i)).norm() < 1e-4);
  }

  SUBCASE("degenerate inputs rejected") {
    std::vector<TimedSample> two = {{0.0, Vec3::Zero()}, {1.0, Vec3::Ones()}};
    CHECK_THROWS_AS(fit_cubic_segment(two, 0.5), std::invalid_argument);
    std::vector<TimedSample> bad = {{0.0, Vec3::Zero()},
                                    {0.5, Vec3::Ones()},
                                    {0.5, Vec3::Ones()},
                                    {1.0, Vec3::Zero()}};
    CHECK_THROWS_AS(fit_cubic_segment(bad, 0.5), std::invalid_argument);
  }
}

TEST_CASE("smoothness metric") {
  SUBCASE("constant-velocity line has zero jerk") {
    std::vector<Vec3> q;
    for (int i = 0; i < 8; ++i) q.push_back(Vec3(0.4 * i, 0.2 * i, 0));
    CHECK(UniformBSpline(3, q, 0.5).smoothness_metric() ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("non-negative and matches quadrature of finite-differenced jerk") {
    const auto s = random_spline(9, 0.4, 55);
    const double m = s.smoothness_metric();
    CHECK(m >= 0.0);

    // numerical quadrature of ||x'''||^2 via finite differences of acceleration
    const double h = 1e-5;
    const int n = 4000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t = s.t_min() + (i + 0.5) * s.duration() / n;
      const Vec3 j =
          (s.acceleration(std::min(t + h, s.t_max())) -
           s.acceleration(std::max(t - h, s.t_min()))) /
          (std::min(t + h, s.t_max()) - std::max(t - h, s.t_min()));
      acc += j.squaredNorm();
    }
    acc *= s.duration() / n;
    CHECK(m == doctest::Approx(acc).epsilon(0.01));
  }
}

TEST_CASE("spline dump round-trips") {
  const auto s = random_spline(7, 0.35, 99);
  std::stringstream ss;
  write_spline(ss, s);
  const auto r = read_spline(ss);
  CHECK(r.degree() == s.degree());
  CHECK(r.dt() == s.dt());
  REQUIRE(r.num_ctrl_pts() == s.num_ctrl_pts());
  for (int i = 0; i < r.num_ctrl_pts(); ++i)
    CHECK((r.ctrl_pt(i) - s.ctrl_pt(i)).norm() == 0.0);
}
