#include "pathguide/lbfgs.hpp"

#include <chrono>
#include <cmath>
#include <deque>

namespace pathguide {

LbfgsResult lbfgs_minimize(const CostFunction& cost, Eigen::VectorXd x0,
                           const LbfgsOptions& opts) {
  using clock = std::chrono::steady_clock;
  const auto start_time = clock::now();
  auto out_of_budget = [&] {
    if (opts.wall_budget_s <= 0.0) return false;
    return std::chrono::duration<double>(clock::now() - start_time).count() >=
           opts.wall_budget_s;
  };

  const int n = static_cast<int>(x0.size());
  LbfgsResult res;
  res.x = std::move(x0);
  Eigen::VectorXd grad(n), grad_new(n);
  res.cost = cost(res.x, grad);

  struct Pair {
    Eigen::VectorXd s, y;
    double rho;
  };
  std::deque<Pair> mem;
  std::vector<double> alpha(opts.history);

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    if (grad.norm() < opts.gradient_tolerance) {
      res.converged = true;
      break;
    }
    if (out_of_budget()) break;

    // two-loop recursion
    Eigen::VectorXd dir = -grad;
    for (int i = static_cast<int>(mem.size()) - 1; i >= 0; --i) {
      alpha[i] = mem[i].rho * mem[i].s.dot(dir);
      dir -= alpha[i] * mem[i].y;
    }
    if (!mem.empty()) {
      const auto& last = mem.back();
      dir *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (size_t i = 0; i < mem.size(); ++i)
      dir += (alpha[i] - mem[i].rho * mem[i].y.dot(dir)) * mem[i].s;

    double slope = grad.dot(dir);
    if (slope >= 0.0) {  // not a descent direction, reset to steepest descent
      dir = -grad;
      slope = -grad.squaredNorm();
      mem.clear();
    }

    // Armijo backtracking
    constexpr double c1 = 1e-4;
    double step = 1.0;
    double f_new = res.cost;
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = res.x + step * dir;
      f_new = cost(x_new, grad_new);
      if (std::isfinite(f_new) && f_new <= res.cost + c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // line search failed, gradient likely at noise floor

    Pair p;
    p.s = x_new - res.x;
    p.y = grad_new - grad;
    const double sy = p.s.dot(p.y);
    if (sy > 1e-12 * p.s.norm() * p.y.norm()) {
      p.rho = 1.0 / sy;
      mem.push_back(std::move(p));
      if (static_cast<int>(mem.size()) > opts.history) mem.pop_front();
    }

    const double decrease = res.cost - f_new;
    res.x = std::move(x_new);
    res.cost = f_new;
    grad.swap(grad_new);
    ++res.iterations;
    if (decrease < opts.relative_cost_tolerance * std::max(1.0, std::abs(res.cost))) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace pathguide
