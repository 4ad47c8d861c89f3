#include "cablevs/vision.hpp"

#include <cmath>

namespace cablevs {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Observation observe(const Pose& true_object_pose, const NoiseSpec& noise,
                    Rng& rng) {
  if (true_object_pose.t.z() <= 0.0) {
    throw ObjectBehindCamera("object z = " +
                             std::to_string(true_object_pose.t.z()));
  }

  // The stream is consumed even at zero sigma (the perturbations multiply to
  // exact zeros), so runs differing only in noise levels stay rng-aligned.
  Pose measured = true_object_pose;
  measured.t += noise.translation_sigma * rng.gaussian3();
  const Vec3 axis = rng.unit_vector();
  const double angle = noise.rotation_sigma * rng.gaussian();
  measured.R = measured.R * rodrigues(AxisAngle{axis, angle});
  Vec2 center_noise;
  center_noise << noise.center_sigma * rng.gaussian(),
      noise.center_sigma * rng.gaussian();

  if (measured.t.z() <= 0.0) {
    throw ObjectBehindCamera("measured object depth is non-positive");
  }

  Observation obs;
  obs.object_pose = measured;
  obs.center = measured.t.head<2>() / measured.t.z() + center_noise;
  obs.depth = measured.t.z();
  return obs;
}

FeatureState compute_features(const Observation& obs,
                              const Pose& desired_object_pose) {
  const Pose rel = desired_object_pose * obs.object_pose.inverse();

  FeatureState fs;
  fs.rot_rel = rel.R;
  fs.rel_axis_angle = axis_angle(rel.R);
  fs.depth = obs.depth;
  fs.s.t = rel.t;
  fs.s.xo = obs.center.x();
  fs.s.yo = obs.center.y();
  fs.s.theta_u_z = fs.rel_axis_angle.angle * fs.rel_axis_angle.axis.z();
  return fs;
}

FeatureVector desired_features(const Pose& desired_object_pose) {
  if (desired_object_pose.t.z() <= 0.0) {
    throw ObjectBehindCamera("desired object depth is non-positive");
  }
  FeatureVector s;
  s.t.setZero();
  s.xo = desired_object_pose.t.x() / desired_object_pose.t.z();
  s.yo = desired_object_pose.t.y() / desired_object_pose.t.z();
  s.theta_u_z = 0.0;
  return s;
}

Mat6 interaction_matrix(const FeatureState& fs) {
  if (fs.depth <= 0.0) {
    throw NonpositiveDepth("interaction matrix needs Z > 0, got " +
                           std::to_string(fs.depth));
  }
  if (fs.rel_axis_angle.angle >= kPi - 1e-6) {
    throw SingularRotation("interaction matrix undefined at theta = pi");
  }

  const double xo = fs.s.xo;
  const double yo = fs.s.yo;

  Mat3 lv;
  // clang-format off
  lv << -1.0,  0.0, xo,
         0.0, -1.0, yo,
         0.0,  0.0, 0.0;
  // clang-format on

  // Third row: rate of theta_u under the camera's body-frame angular
  // velocity, so the whole matrix is the exact Jacobian of the feature map.
  const Mat3 lw = rotation_rate_matrix(fs.rel_axis_angle);
  Mat3 lvw;
  // clang-format off
  lvw << xo * yo,        -(1.0 + xo * xo),  yo,
         1.0 + yo * yo,  -xo * yo,         -xo,
         lw(2, 0),        lw(2, 1),         lw(2, 2);
  // clang-format on

  Mat6 ls = Mat6::Zero();
  ls.topLeftCorner<3, 3>() = fs.rot_rel;
  ls.bottomLeftCorner<3, 3>() = lv / fs.depth;
  ls.bottomRightCorner<3, 3>() = lvw;
  return ls;
}

}  // namespace cablevs
