#pragma once

#include <Eigen/Core>

#include "cablevs/errors.hpp"

namespace cablevs {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// 3x3 orthonormal matrix with determinant +1.
using Rotation = Mat3;

/// Skew-symmetric matrix [u]x such that skew(u) * v == u.cross(v).
Mat3 skew(const Vec3& u);

/// True when R'R = I and det R = 1 within tol.
bool is_rotation(const Rotation& R, double tol = 1e-9);

Rotation rot_x(double angle);
Rotation rot_y(double angle);
Rotation rot_z(double angle);

/// Roll-pitch-yaw convention: R = Rz(yaw) * Ry(pitch) * Rx(roll).
Rotation rotation_rpy(double roll, double pitch, double yaw);

/// Intrinsic x-y-z Euler angles: R = Rx(rx) * Ry(ry) * Rz(rz).
Rotation rotation_xyz(double rx, double ry, double rz);

/// Unit axis and angle in [0, pi].
struct AxisAngle {
  Vec3 axis{0.0, 0.0, 1.0};
  double angle = 0.0;

  /// The theta*u vector.
  Vec3 theta_u() const { return axis * angle; }
};

/// Extract axis-angle from a rotation. Angle is in [0, pi]; a zero rotation
/// returns the fixed axis [0,0,1].
AxisAngle axis_angle(const Rotation& R);

/// Rodrigues formula: rotation of aa.angle about aa.axis.
Rotation rodrigues(const AxisAngle& aa);

/// The matrix L_w relating the rate of the theta*u parameterization to the
/// angular velocity:
///   L_w = I - (theta/2)[u]x + (1 - sinc(theta)/sinc^2(theta/2)) [u]x^2
/// Evaluated by Taylor expansion below theta = 1e-4. Throws SingularRotation
/// for theta at or beyond pi.
Mat3 rotation_log_matrix(const AxisAngle& aa);

/// Maps a body-frame angular velocity of R = exp([theta*u]x) to the rate of
/// its theta*u vector (the inverse right Jacobian of the rotation group):
/// the skew term of rotation_log_matrix with opposite sign.
Mat3 rotation_rate_matrix(const AxisAngle& aa);

/// Rigid transform: x_out = R * x_in + t.
struct Pose {
  Rotation R = Rotation::Identity();
  Vec3 t = Vec3::Zero();

  Pose() = default;
  Pose(const Rotation& rot, const Vec3& trans) : R(rot), t(trans) {}

  static Pose identity() { return Pose(); }

  Pose operator*(const Pose& other) const {
    return Pose(R * other.R, R * other.t + t);
  }

  Vec3 operator*(const Vec3& p) const { return R * p + t; }

  Pose inverse() const {
    const Rotation Rt = R.transpose();
    return Pose(Rt, -(Rt * t));
  }
};

/// Velocity twist, linear part first.
struct Twist {
  Vec3 linear = Vec3::Zero();
  Vec3 angular = Vec3::Zero();

  Twist() = default;
  Twist(const Vec3& lin, const Vec3& ang) : linear(lin), angular(ang) {}

  Vec6 vector() const {
    Vec6 v;
    v << linear, angular;
    return v;
  }

  static Twist from_vector(const Vec6& v) {
    return Twist(v.head<3>(), v.tail<3>());
  }
};

/// Exponential of a constant twist applied for dt seconds.
Pose se3_exp(const Twist& v, double dt);

/// Frame-change matrix for twists: adjoint(pTc) maps a twist expressed in
/// frame c to the same motion expressed in frame p.
///   [[R, [t]x R], [0, R]]
Mat6 adjoint(const Pose& T);

}  // namespace cablevs
