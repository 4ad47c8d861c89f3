#pragma once

#include <vector>

#include <Eigen/Core>

#include "cablevs/cdpr.hpp"
#include "cablevs/geometry.hpp"
#include "cablevs/vision.hpp"

namespace cablevs {

/// Adaptive gain profile lambda(x) = (l0 - linf) exp(-(slope0/(l0-linf)) x)
/// + linf, with x the error 2-norm.
struct GainSchedule {
  double lambda0 = 2.0;    // gain at zero error, 1/s
  double lambda_inf = 0.4; // gain at large error, 1/s
  double slope0 = 30.0;    // |d lambda / dx| at x = 0
};

double adaptive_gain(const GainSchedule& g, double error_norm);

/// What the controller believes about the robot: a (possibly perturbed)
/// description and platform pose. The hand-eye estimate is the description's
/// camera_mount.
struct EstimatedModel {
  RobotDescription robot;
  Pose platform_pose;  // bT̂p
};

/// The three estimated matrices every command needs.
struct ControlMatrices {
  Mat6 interaction;         // L̂s
  Mat6 adjoint_mount;       // Âd = adjoint(pT̂c)
  JacobianMatrix jacobian;  // Â at the estimated pose
};

/// Evaluate L̂s, Âd, Â for a model and the measured feature state.
ControlMatrices control_matrices(const EstimatedModel& model,
                                 const FeatureState& features);

using CableCommand = CableVector;

/// Camera velocity c_v_c = L̂s^-1 (-lambda e + ds*). Throws
/// SingularInteraction.
Vec6 camera_velocity(const Vec6& error, const Vec6& desired_rate,
                     const Mat6& interaction, double gain);

/// Cable velocity command l̇ = Â Âd L̂s^-1 (-lambda e + ds*). Throws
/// SingularInteraction and RankDeficient.
CableCommand tracking_command(const Vec6& error, const Vec6& desired_rate,
                              const ControlMatrices& m, double gain);

/// Fixed-goal command l̇ = -lambda Â Âd L̂s^-1 e (the tracking law with a
/// zero desired rate).
CableCommand classic_command(const Vec6& error, const ControlMatrices& m,
                             double gain);

/// Sampled straight-line feature trajectory from s_init to s_fin.
struct Plan {
  Vec6 s_init = Vec6::Zero();
  Vec6 s_fin = Vec6::Zero();
  double t_full = 0.0;  // s
  double dt = 0.0;      // s
  Vec6 c = Vec6::Zero();  // constant feature velocity
  std::vector<Vec6> samples;  // s*(i dt), i = 0..k
};

/// Plan with the horizon from per-component desired average speeds:
/// t_full = max_n |e_full_n| / v_n. All speeds must be positive. Throws
/// ZeroHorizon when s_init == s_fin.
Plan plan_trajectory(const FeatureVector& s_init, const FeatureVector& s_fin,
                     const Vec6& velocity, double dt);

/// Plan with an explicit horizon.
Plan plan_trajectory_timed(const FeatureVector& s_init,
                           const FeatureVector& s_fin, double t_full,
                           double dt);

struct PlanSample {
  Vec6 s_star;       // s*(t)
  Vec6 s_star_rate;  // ds*(t): c before t_full, zero after
};

/// Desired feature vector and rate at time t; clamps to (s_fin, 0) for
/// t >= t_full and interpolates linearly between recorded samples otherwise.
PlanSample desired_feature_at(const Plan& plan, double t);

}  // namespace cablevs
