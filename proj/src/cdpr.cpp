#include "cablevs/cdpr.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "cablevs/linprog.hpp"

namespace cablevs {

void RobotDescription::validate() const {
  if (tension_min < 0.0) throw Error("tension_min must be >= 0");
  if (tension_max <= tension_min) {
    throw Error("tension_max must exceed tension_min");
  }
  if (platform_mass <= 0.0) throw Error("platform_mass must be > 0");
  if (!is_rotation(camera_mount.R)) {
    throw Error("camera_mount rotation is not orthonormal");
  }
}

RobotDescription make_default_robot() {
  RobotDescription robot;

  const double half = 0.6;    // cube half-width
  const double top = 1.2;     // exit plane height
  const double off = 0.05;    // exit pair separation along each edge
  const double ax = 0.05;     // platform half-width
  const double az = 0.035;    // platform half-height

  // Corner order: (+,+), (-,+), (-,-), (+,-). Each corner feeds two cables,
  // one exit shifted inward along x, the other along y; each attaches to the
  // platform corner adjacent in its shift direction. The crossed assignment
  // keeps the yaw direction of the Jacobian well away from singular
  // (sigma_min ~0.1 versus ~0.005 when both cables land on the corner
  // below) and leaves all eight lengths equal at the centered pose.
  const double cx[4] = {+half, -half, -half, +half};
  const double cy[4] = {+half, +half, -half, -half};
  const double sx[4] = {-1.0, +1.0, +1.0, -1.0};
  const double sy[4] = {-1.0, -1.0, +1.0, +1.0};
  const Vec3 corner[4] = {Vec3(+ax, +ax, az), Vec3(-ax, +ax, az),
                          Vec3(-ax, -ax, az), Vec3(+ax, -ax, az)};
  const int x_neighbor[4] = {1, 0, 3, 2};
  const int y_neighbor[4] = {3, 2, 1, 0};

  for (int k = 0; k < 4; ++k) {
    robot.exit_points[2 * k] = Vec3(cx[k] + sx[k] * off, cy[k], top);
    robot.exit_points[2 * k + 1] = Vec3(cx[k], cy[k] + sy[k] * off, top);
    robot.anchor_points[2 * k] = corner[x_neighbor[k]];
    robot.anchor_points[2 * k + 1] = corner[y_neighbor[k]];
  }

  robot.tension_min = 1.0;
  robot.tension_max = 200.0;
  robot.platform_mass = 1.5;
  robot.gravity = Vec3(0.0, 0.0, -9.81);
  // Camera on the bottom face, optical axis down (180 degrees about y).
  robot.camera_mount = Pose(rot_y(3.14159265358979323846), Vec3(0.0, 0.0, -az));
  return robot;
}

CableState cable_state(const RobotDescription& robot, const Pose& platform_pose) {
  const Pose p_from_b = platform_pose.inverse();
  CableState state;
  for (int i = 0; i < kNumCables; ++i) {
    const Vec3 exit_in_p = p_from_b * robot.exit_points[i];
    const Vec3 v = robot.anchor_points[i] - exit_in_p;
    const double len = v.norm();
    if (len < 1e-6) {
      throw DegenerateCable("cable " + std::to_string(i + 1) +
                            " length underflows 1e-6 m");
    }
    state.lengths[i] = len;
    state.units[i] = v / len;
  }
  return state;
}

JacobianMatrix jacobian(const RobotDescription& robot, const CableState& state) {
  JacobianMatrix A;
  for (int i = 0; i < kNumCables; ++i) {
    A.row(i).head<3>() = state.units[i].transpose();
    A.row(i).tail<3>() = robot.anchor_points[i].cross(state.units[i]).transpose();
  }
  return A;
}

double min_singular_value(const JacobianMatrix& A) {
  Eigen::SelfAdjointEigenSolver<Mat6> eig(A.transpose() * A);
  const double lambda_min = eig.eigenvalues().minCoeff();
  return lambda_min > 0.0 ? std::sqrt(lambda_min) : 0.0;
}

Eigen::Matrix<double, 6, kNumCables> pseudo_inverse(const JacobianMatrix& A) {
  const Mat6 gram = A.transpose() * A;
  Eigen::SelfAdjointEigenSolver<Mat6> eig(gram);
  const double lambda_min = eig.eigenvalues().minCoeff();
  if (lambda_min <= 0.0 || std::sqrt(lambda_min) < 1e-8) {
    throw RankDeficient("jacobian is rank deficient (sigma_min < 1e-8)");
  }
  return gram.ldlt().solve(A.transpose());
}

Eigen::Matrix<double, 6, kNumCables> wrench_matrix(const JacobianMatrix& A) {
  return -A.transpose();
}

Vec6 gravity_wrench(const RobotDescription& robot, const Pose& platform_pose) {
  Vec6 w = Vec6::Zero();
  w.head<3>() =
      platform_pose.R.transpose() * (robot.platform_mass * robot.gravity);
  return w;
}

bool static_feasible(const RobotDescription& robot, const Pose& platform_pose) {
  const CableState state = cable_state(robot, platform_pose);
  const JacobianMatrix A = jacobian(robot, state);

  linprog::BoxEqualityProblem lp;
  lp.A = wrench_matrix(A);
  lp.b = -gravity_wrench(robot, platform_pose);
  lp.lower = Eigen::VectorXd::Constant(kNumCables, robot.tension_min);
  lp.upper = Eigen::VectorXd::Constant(kNumCables, robot.tension_max);
  return linprog::solve_feasibility(lp).feasible;
}

}  // namespace cablevs
