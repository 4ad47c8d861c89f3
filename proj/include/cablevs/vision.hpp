#pragma once

#include <Eigen/Core>

#include "cablevs/geometry.hpp"
#include "cablevs/rng.hpp"

namespace cablevs {

/// Pinhole intrinsics, used only to report image quantities in pixels.
struct CameraModel {
  double focal = 800.0;                     // px
  Vec2 principal_point{320.0, 240.0};       // px
  Vec2 image_size{640.0, 480.0};            // px

  Vec2 to_pixels(const Vec2& normalized) const {
    return focal * normalized + principal_point;
  }
};

/// Zero-mean Gaussian measurement noise applied to the simulated detection.
struct NoiseSpec {
  double translation_sigma = 0.0;  // m, per axis of the object translation
  double rotation_sigma = 0.0;     // rad, angle about a random axis
  double center_sigma = 0.0;       // normalized units, per axis of the center
};

/// Simulated detection of the tagged object.
struct Observation {
  Pose object_pose;           // cTo as measured
  Vec2 center = Vec2::Zero();  // normalized image coordinates of the center
  double depth = 0.0;          // Z, meters
};

/// Perturb the true object pose per the noise spec and project its center.
/// Throws ObjectBehindCamera when the (measured) object is not in front of
/// the camera.
Observation observe(const Pose& true_object_pose, const NoiseSpec& noise,
                    Rng& rng);

/// The 2.5D feature vector s = [c*_t_c ; x_o ; y_o ; theta_u_z].
struct FeatureVector {
  Vec3 t = Vec3::Zero();    // translation of the desired camera frame w.r.t.
                            // the current one, meters
  double xo = 0.0;          // normalized image coordinates of the center
  double yo = 0.0;
  double theta_u_z = 0.0;   // rad

  Vec6 vector() const {
    Vec6 v;
    v << t, xo, yo, theta_u_z;
    return v;
  }
};

/// Feature vector plus the auxiliary quantities the interaction matrix
/// needs: the relative rotation c*_R_c, its axis-angle, and the depth.
struct FeatureState {
  FeatureVector s;
  Rotation rot_rel = Rotation::Identity();  // c*_R_c
  AxisAngle rel_axis_angle;
  double depth = 0.0;  // Z, meters
};

/// Build the feature state by comparing the observation against the desired
/// object pose: c*_T_c = c*_T_o * (c_T_o)^-1.
FeatureState compute_features(const Observation& obs,
                              const Pose& desired_object_pose);

/// Feature vector at the goal: zero relative translation and rotation, the
/// center at the projection of the desired object position.
FeatureVector desired_features(const Pose& desired_object_pose);

/// Interaction matrix L_s mapping the camera twist to the feature rate:
///   [[ c*_R_c        0     ]
///    [ (1/Z) L_v   L_v_omega ]]
/// Throws NonpositiveDepth and SingularRotation.
Mat6 interaction_matrix(const FeatureState& fs);

}  // namespace cablevs
