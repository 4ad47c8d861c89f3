#pragma once

#include <array>

#include <Eigen/Core>

#include "cablevs/geometry.hpp"

namespace cablevs {

inline constexpr int kNumCables = 8;

using CablePoints = std::array<Vec3, kNumCables>;
using JacobianMatrix = Eigen::Matrix<double, kNumCables, 6>;
using CableVector = Eigen::Matrix<double, kNumCables, 1>;

/// Geometry and limits of an 8-cable suspended robot. Exit points live in
/// the base frame, anchor points in the platform frame.
struct RobotDescription {
  CablePoints exit_points = zero_points();    // A_i in frame b, meters
  CablePoints anchor_points = zero_points();  // B_i in frame p, meters
  double tension_min = 1.0;     // N
  double tension_max = 200.0;   // N
  double platform_mass = 1.5;   // kg
  Pose camera_mount;            // pTc, constant
  Vec3 gravity{0.0, 0.0, -9.81};  // m/s^2 in frame b

  /// Throws Error when limits or mass are inconsistent.
  void validate() const;

  static CablePoints zero_points() {
    CablePoints p;
    p.fill(Vec3::Zero());
    return p;
  }
};

/// Default description of the 1.2 m cube prototype: exit points in pairs at
/// the four top corners (0.05 m apart), anchors at the top corners of the
/// 0.1 x 0.1 x 0.07 m platform, camera centered on the bottom face looking
/// down. Base frame origin is on the floor under the cube center.
RobotDescription make_default_robot();

/// Cable lengths and unit vectors (platform frame) at a platform pose.
struct CableState {
  CableVector lengths;                  // meters
  std::array<Vec3, kNumCables> units;   // p_u_i, from exit toward anchor
};

/// Lengths l_i = |p_b_i - p_R_b b_a_i - p_t_b| and their unit vectors.
/// Throws DegenerateCable below 1e-6 m.
CableState cable_state(const RobotDescription& robot, const Pose& platform_pose);

/// Forward Jacobian A with rows [u_i', (b_i x u_i)'] mapping the platform
/// twist (in frame p) to cable length rates.
JacobianMatrix jacobian(const RobotDescription& robot, const CableState& state);

/// Moore-Penrose pseudo-inverse of a full-column-rank A. Throws
/// RankDeficient when the smallest singular value is below 1e-8.
Eigen::Matrix<double, 6, kNumCables> pseudo_inverse(const JacobianMatrix& A);

/// Smallest singular value of A.
double min_singular_value(const JacobianMatrix& A);

/// Wrench matrix W = -A'.
Eigen::Matrix<double, 6, kNumCables> wrench_matrix(const JacobianMatrix& A);

/// Gravity wrench of the platform expressed in frame p (force only, applied
/// at the platform origin).
Vec6 gravity_wrench(const RobotDescription& robot, const Pose& platform_pose);

/// True when some tension vector within [tension_min, tension_max]^8
/// balances gravity: W tau + w_g = 0.
bool static_feasible(const RobotDescription& robot, const Pose& platform_pose);

}  // namespace cablevs
