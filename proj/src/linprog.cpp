#include "cablevs/linprog.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace cablevs::linprog {

namespace {

constexpr double kEps = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarState { basic, at_lower, at_upper };

}  // namespace

// Variables are shifted to x' = x - lower so every structural variable has
// span [0, upper - lower]. One artificial per row (signed to match the
// shifted rhs) gives the identity starting basis; minimizing their sum to
// zero certifies feasibility.
Solution solve_feasibility(const BoxEqualityProblem& problem, double tol) {
  const int m = static_cast<int>(problem.A.rows());
  const int n = static_cast<int>(problem.A.cols());

  Solution out;

  for (int j = 0; j < n; ++j) {
    if (problem.lower[j] > problem.upper[j] + kEps) return out;
  }

  const Eigen::VectorXd span = problem.upper - problem.lower;
  const Eigen::VectorXd rhs = problem.b - problem.A * problem.lower;

  const int total = n + m;
  Eigen::MatrixXd T(m, total);
  T.leftCols(n) = problem.A;
  T.rightCols(m).setZero();
  for (int i = 0; i < m; ++i) {
    T(i, n + i) = rhs[i] >= 0.0 ? 1.0 : -1.0;
  }

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(total);
  cost.tail(m).setOnes();

  Eigen::VectorXd ub(total);
  ub.head(n) = span.cwiseMax(0.0);
  ub.tail(m).setConstant(kInf);

  std::vector<VarState> state(total, VarState::at_lower);
  std::vector<int> basis(m);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(total);
  for (int i = 0; i < m; ++i) {
    basis[i] = n + i;
    state[n + i] = VarState::basic;
    x[n + i] = std::abs(rhs[i]);
  }

  const int max_iterations = 200 * (total + 1);
  int iter = 0;

  Eigen::MatrixXd B(m, m);
  for (; iter < max_iterations; ++iter) {
    for (int i = 0; i < m; ++i) B.col(i) = T.col(basis[i]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);

    Eigen::VectorXd cb(m);
    for (int i = 0; i < m; ++i) cb[i] = cost[basis[i]];
    const Eigen::VectorXd y = lu.transpose().solve(cb);

    // Bland: first improving nonbasic index.
    int entering = -1;
    double direction = 0.0;  // +1 enters rising from lower, -1 falling from upper
    for (int j = 0; j < total && entering < 0; ++j) {
      if (state[j] == VarState::basic) continue;
      const double reduced = cost[j] - T.col(j).dot(y);
      if (state[j] == VarState::at_lower && reduced < -kEps) {
        entering = j;
        direction = 1.0;
      } else if (state[j] == VarState::at_upper && reduced > kEps) {
        entering = j;
        direction = -1.0;
      }
    }
    if (entering < 0) break;  // optimal

    const Eigen::VectorXd w = lu.solve(T.col(entering));

    // Largest step before a basic variable hits a bound or the entering
    // variable spans its own interval. Ties pick the smallest basic index
    // (Bland) so the method terminates.
    double step = ub[entering];
    int leaving = -1;
    double leaving_target = 0.0;
    for (int i = 0; i < m; ++i) {
      const double delta = direction * w[i];
      const int bi = basis[i];
      double room;
      double target;
      if (delta > kEps) {
        room = std::max(x[bi], 0.0) / delta;
        target = 0.0;  // leaves at its lower bound (shifted zero)
      } else if (delta < -kEps && std::isfinite(ub[bi])) {
        room = std::max(ub[bi] - x[bi], 0.0) / (-delta);
        target = ub[bi];
      } else {
        continue;
      }
      const bool better = room < step - kEps;
      const bool tie = !better && room < step + kEps &&
                       (leaving < 0 || bi < basis[leaving]);
      if (better || tie) {
        step = std::min(step, room);
        leaving = i;
        leaving_target = target;
      }
    }

    if (!std::isfinite(step)) break;  // cannot happen with bounded objective

    for (int i = 0; i < m; ++i) x[basis[i]] -= step * direction * w[i];
    x[entering] = state[entering] == VarState::at_lower
                      ? step * direction
                      : ub[entering] + step * direction;

    if (leaving < 0) {
      // Bound flip: entering variable crossed its own span.
      state[entering] =
          state[entering] == VarState::at_lower ? VarState::at_upper
                                                : VarState::at_lower;
      x[entering] = state[entering] == VarState::at_upper ? ub[entering] : 0.0;
    } else {
      const int out_var = basis[leaving];
      state[out_var] = leaving_target == 0.0 ? VarState::at_lower
                                             : VarState::at_upper;
      x[out_var] = leaving_target;
      basis[leaving] = entering;
      state[entering] = VarState::basic;
    }
  }

  out.iterations = iter;
  const double artificial_sum = x.tail(m).cwiseAbs().sum();

  Eigen::VectorXd structural = x.head(n) + problem.lower;
  structural = structural.cwiseMax(problem.lower).cwiseMin(problem.upper);
  out.x = structural;
  out.residual = (problem.A * structural - problem.b).cwiseAbs().maxCoeff();
  out.feasible = artificial_sum <= tol && out.residual <= tol;
  return out;
}

}  // namespace cablevs::linprog
