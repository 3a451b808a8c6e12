#pragma once

#include <Eigen/Dense>
#include <functional>

namespace pathguide {

struct LbfgsOptions {
  int history = 8;
  int max_iterations = 1000;
  double gradient_tolerance = 1e-6;
  double relative_cost_tolerance = 1e-8;
  double wall_budget_s = -1.0;  // <= 0 disables the wall clock cutoff
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;  // tolerance hit, as opposed to budget/iteration cap
};

// cost(x, grad) fills grad and returns the objective value.
using CostFunction =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

// Limited-memory BFGS with Armijo backtracking line search.
LbfgsResult lbfgs_minimize(const CostFunction& cost, Eigen::VectorXd x0,
                           const LbfgsOptions& opts = {});

}  // namespace pathguide
