#include "cablevs/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace cablevs {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Mat3 skew(const Vec3& u) {
  Mat3 s;
  // clang-format off
  s <<    0.0, -u.z(),  u.y(),
        u.z(),    0.0, -u.x(),
       -u.y(),  u.x(),    0.0;
  // clang-format on
  return s;
}

bool is_rotation(const Rotation& R, double tol) {
  const Mat3 err = R.transpose() * R - Mat3::Identity();
  return err.cwiseAbs().maxCoeff() <= tol &&
         std::abs(R.determinant() - 1.0) <= tol;
}

Rotation rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Rotation R;
  R << 1, 0, 0, 0, c, -s, 0, s, c;
  return R;
}

Rotation rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Rotation R;
  R << c, 0, s, 0, 1, 0, -s, 0, c;
  return R;
}

Rotation rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Rotation R;
  R << c, -s, 0, s, c, 0, 0, 0, 1;
  return R;
}

Rotation rotation_rpy(double roll, double pitch, double yaw) {
  return rot_z(yaw) * rot_y(pitch) * rot_x(roll);
}

Rotation rotation_xyz(double rx, double ry, double rz) {
  return rot_x(rx) * rot_y(ry) * rot_z(rz);
}

AxisAngle axis_angle(const Rotation& R) {
  const Vec3 w(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  const double s = 0.5 * w.norm();                               // sin(theta)
  const double c = std::clamp((R.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double theta = std::atan2(s, c);

  if (theta < 1e-12) return AxisAngle{Vec3(0.0, 0.0, 1.0), 0.0};

  if (s > 1e-6) {
    return AxisAngle{w / (2.0 * s), theta};
  }

  // Within ~1e-6 of pi the skew part cancels to noise. Use
  // R = c I + (1-c) u u' + s [u]x: the diagonal gives the squared axis
  // components, the symmetric off-diagonals give their relative signs.
  const double one_minus_c = 1.0 - c;
  Vec3 u2;
  for (int i = 0; i < 3; ++i) {
    u2[i] = std::max(0.0, (R(i, i) - c) / one_minus_c);
  }
  int j = 0;
  u2.maxCoeff(&j);
  Vec3 u;
  u[j] = std::sqrt(u2[j]);
  for (int k = 0; k < 3; ++k) {
    if (k != j) u[k] = (R(j, k) + R(k, j)) / (2.0 * one_minus_c * u[j]);
  }
  u.normalize();
  if (w.dot(u) < 0.0) u = -u;
  return AxisAngle{u, theta};
}

Rotation rodrigues(const AxisAngle& aa) {
  const Mat3 S = skew(aa.axis);
  return Mat3::Identity() + std::sin(aa.angle) * S +
         (1.0 - std::cos(aa.angle)) * (S * S);
}

Mat3 rotation_log_matrix(const AxisAngle& aa) {
  const double theta = aa.angle;
  if (theta >= kPi - 1e-9) {
    throw SingularRotation("rotation_log_matrix: angle at representation "
                           "singularity (theta = pi)");
  }
  if (theta < 0.0) {
    throw SingularRotation("rotation_log_matrix: negative angle");
  }

  // sinc(theta)/sinc^2(theta/2) == (theta/2) * cot(theta/2); the Taylor form
  // takes over below 1e-4 where the trigonometric quotient loses digits.
  double coeff;  // 1 - sinc(theta)/sinc^2(theta/2)
  if (theta < 1e-4) {
    const double t2 = theta * theta;
    coeff = t2 / 12.0 + t2 * t2 / 720.0;
  } else {
    const double half = theta / 2.0;
    coeff = 1.0 - half * std::cos(half) / std::sin(half);
  }

  const Mat3 S = skew(aa.axis);
  return Mat3::Identity() - (theta / 2.0) * S + coeff * (S * S);
}

Mat3 rotation_rate_matrix(const AxisAngle& aa) {
  return rotation_log_matrix(AxisAngle{-aa.axis, aa.angle});
}

Pose se3_exp(const Twist& v, double dt) {
  const Vec3 w = v.angular * dt;
  const Vec3 u = v.linear * dt;
  const double theta = w.norm();

  if (theta < 1e-10) {
    const Mat3 W = skew(w);
    // Second-order series; the dropped terms are below double precision here.
    const Mat3 R = Mat3::Identity() + W + 0.5 * (W * W);
    const Mat3 V = Mat3::Identity() + 0.5 * W + (W * W) / 6.0;
    return Pose(R, V * u);
  }

  const Vec3 axis = w / theta;
  const Mat3 R = rodrigues(AxisAngle{axis, theta});
  const Mat3 W = skew(w);
  const double t2 = theta * theta;
  const Mat3 V = Mat3::Identity() + ((1.0 - std::cos(theta)) / t2) * W +
                 ((theta - std::sin(theta)) / (t2 * theta)) * (W * W);
  return Pose(R, V * u);
}

Mat6 adjoint(const Pose& T) {
  Mat6 ad = Mat6::Zero();
  ad.topLeftCorner<3, 3>() = T.R;
  ad.topRightCorner<3, 3>() = skew(T.t) * T.R;
  ad.bottomRightCorner<3, 3>() = T.R;
  return ad;
}

}  // namespace cablevs
