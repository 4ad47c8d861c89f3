#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cablevs/cdpr.hpp"
#include "cablevs/control.hpp"
#include "cablevs/geometry.hpp"
#include "cablevs/rng.hpp"
#include "cablevs/stability.hpp"
#include "cablevs/vision.hpp"

namespace cablevs {

enum class ControllerMode { classic, tracking };
enum class GainMode { adaptive, constant };

/// Everything one experiment needs. Defaults reproduce the reference task:
/// the platform starts tilted above the tag and lands directly over it.
struct ExperimentConfig {
  RobotDescription robot = make_default_robot();
  Pose initial_platform_pose;     // bTp(0), true
  Pose initial_object_in_camera;  // cTo(0), true
  Pose desired_object_pose;       // c*To

  ControllerMode controller = ControllerMode::classic;
  GainMode gain_mode = GainMode::adaptive;
  GainSchedule gains;
  double constant_gain = 2.0;  // used when gain_mode == constant

  NoiseSpec noise;
  PerturbationDraw perturbation;
  std::string perturbation_name = "none";
  CameraModel camera;

  Vec6 plan_velocity = default_plan_velocity();
  std::optional<double> plan_t_full;

  double dt = 0.05;           // s
  double max_duration = 60.0; // s
  double threshold = 1e-3;    // convergence on ||s - s*_fin||
  double actuator_time_constant = 0.0;  // s, first-order lag on the command; 0 = off
  std::uint64_t seed = 1;

  static Vec6 default_plan_velocity() {
    // Careful desk-scale speeds: 1 cm/s translation, matching normalized
    // image speed, 0.05 rad/s rotation. The reference task then plans a
    // ~30 s trajectory.
    Vec6 v;
    v << 0.01, 0.01, 0.01, 0.01, 0.01, 0.05;
    return v;
  }
};

/// Reference task values: initial platform pose, initial and desired object
/// poses as published for the cube prototype.
ExperimentConfig make_reference_experiment(ControllerMode mode);

/// Plant + estimator state.
struct SimState {
  Pose true_pose;           // bTp
  Pose est_pose;            // bT̂p
  double t = 0.0;           // s
  CableVector cable_lengths;  // consistent with true_pose
};

struct SimRecord {
  double t = 0.0;
  Pose true_pose, est_pose;
  Vec6 s = Vec6::Zero();
  Vec6 s_star = Vec6::Zero();
  Vec6 error = Vec6::Zero();
  CableCommand command = CableCommand::Zero();
  Vec3 camera_position = Vec3::Zero();  // frame b, true
  Vec2 center_pixels = Vec2::Zero();    // measured object center
  double gain = 0.0;
  double tracking_diagnostic = 0.0;  // ||(Pi - I) ds*||
  double error_norm = 0.0;           // ||s - s*(t)||
};

struct SimLog {
  std::vector<SimRecord> records;
  bool converged = false;
  int iterations = 0;
  double duration = 0.0;        // time of the last record
  double final_error_norm = 0.0;  // ||s - s*_fin|| at the last record
  std::uint64_t seed = 0;

  /// Fixed column order; trailing metadata line prefixed '#'.
  std::string to_csv() const;
};

/// Kinematic plant: integrates the true pose from the cable command through
/// the true Jacobian pseudo-inverse and the pose estimate through the
/// estimated one, both by the twist exponential.
class Simulator {
public:
  Simulator(RobotDescription true_robot, EstimatedModel est_model,
            const Pose& true_initial_pose);

  const SimState& state() const { return state_; }
  const EstimatedModel& estimated_model() const { return est_model_; }

  void step(const CableCommand& cable_rates, double dt);

private:
  RobotDescription true_robot_;
  EstimatedModel est_model_;
  SimState state_;
};

/// Closed-loop run: observe, build features, command, integrate, until
/// ||s - s*_fin|| reaches the threshold or max_duration elapses (converged
/// flag false in that case; the log is still complete).
SimLog run(const ExperimentConfig& config);

/// Straight-chord deviation metrics of a logged run.
struct DeviationMetrics {
  double image_max_px = 0.0;
  double image_mean_px = 0.0;
  double space_max_m = 0.0;
  double space_mean_m = 0.0;
};

/// Distance of every logged center point (pixels) and camera position
/// (meters) from the segment joining the first and last logged points.
/// Throws DegenerateLine when an endpoint pair coincides.
DeviationMetrics deviation_metrics(const SimLog& log);

/// Published perturbation sets. "none" is the zero draw. V2's per-point
/// offsets use a fixed internal stream so the named sets are constants.
/// Throws UnknownSet.
PerturbationDraw load_perturbation_set(const std::string& name);

/// Random unit directions for per-point offsets, from a fixed internal
/// stream keyed by `kind` so exit and anchor draws differ.
std::array<Vec3, kNumCables> point_offset_directions(int kind);

}  // namespace cablevs
