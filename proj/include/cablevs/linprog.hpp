#pragma once

#include <Eigen/Core>

namespace cablevs::linprog {

/// Find any x with A x = b and lower <= x <= upper (componentwise).
struct BoxEqualityProblem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct Solution {
  bool feasible = false;
  Eigen::VectorXd x;      // valid when feasible
  double residual = 0.0;  // ||A x - b||_inf at termination
  int iterations = 0;
};

/// Phase-I bounded-variable simplex with Bland's rule. Feasible iff the
/// artificial objective reaches zero and the equality residual is within tol.
Solution solve_feasibility(const BoxEqualityProblem& problem,
                           double tol = 1e-7);

}  // namespace cablevs::linprog
