#include "cablevs/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace cablevs {

namespace {

constexpr double kDegree = 3.14159265358979323846 / 180.0;

Rotation xyz_deg(double rx, double ry, double rz) {
  return rotation_xyz(rx * kDegree, ry * kDegree, rz * kDegree);
}

}  // namespace

ExperimentConfig make_reference_experiment(ControllerMode mode) {
  ExperimentConfig config;
  config.controller = mode;
  config.gain_mode =
      mode == ControllerMode::classic ? GainMode::adaptive : GainMode::constant;

  config.initial_platform_pose =
      Pose(xyz_deg(20.0, -20.0, 0.0), Vec3(0.107, -0.026, 0.35));
  config.initial_object_in_camera =
      Pose(xyz_deg(-157.0, -18.0, -176.0), Vec3(-0.022, 0.136, 0.449));
  config.desired_object_pose =
      Pose(xyz_deg(-180.0, 0.0, -180.0), Vec3(0.0, 0.0, 0.09));
  return config;
}

Simulator::Simulator(RobotDescription true_robot, EstimatedModel est_model,
                     const Pose& true_initial_pose)
    : true_robot_(std::move(true_robot)), est_model_(std::move(est_model)) {
  state_.true_pose = true_initial_pose;
  state_.est_pose = est_model_.platform_pose;
  state_.t = 0.0;
  state_.cable_lengths = cable_state(true_robot_, true_initial_pose).lengths;
}

void Simulator::step(const CableCommand& cable_rates, double dt) {
  const CableState true_state = cable_state(true_robot_, state_.true_pose);
  const auto true_pinv = pseudo_inverse(jacobian(true_robot_, true_state));
  const Twist true_twist = Twist::from_vector(true_pinv * cable_rates);
  state_.true_pose = state_.true_pose * se3_exp(true_twist, dt);

  // The estimate integrates the same command through the believed model, so
  // it recovers the commanded camera twist exactly when the command was
  // built from these matrices.
  const CableState est_state =
      cable_state(est_model_.robot, est_model_.platform_pose);
  const auto est_pinv = pseudo_inverse(jacobian(est_model_.robot, est_state));
  const Twist est_twist = Twist::from_vector(est_pinv * cable_rates);
  est_model_.platform_pose = est_model_.platform_pose * se3_exp(est_twist, dt);

  state_.est_pose = est_model_.platform_pose;
  state_.cable_lengths = cable_state(true_robot_, state_.true_pose).lengths;
  state_.t += dt;
}

namespace {

Observation exact_observation(const Pose& object_pose) {
  Observation obs;
  obs.object_pose = object_pose;
  obs.center = object_pose.t.head<2>() / object_pose.t.z();
  obs.depth = object_pose.t.z();
  return obs;
}

}  // namespace

SimLog run(const ExperimentConfig& config) {
  config.robot.validate();
  if (config.dt <= 0.0) throw Error("dt must be positive");

  Rng rng(config.seed);

  // The object is fixed in the base frame; its location follows from the
  // true initial pose and the true initial observation.
  const Pose object_in_base = config.initial_platform_pose *
                              config.robot.camera_mount *
                              config.initial_object_in_camera;

  const Vec6 s_fin = desired_features(config.desired_object_pose).vector();

  EstimatedModel est_model =
      apply_perturbation(config.robot, config.initial_platform_pose,
                         config.perturbation);
  Simulator sim(config.robot, est_model, config.initial_platform_pose);

  auto observe_current = [&](const Pose& true_pose) {
    const Pose cam_in_base = true_pose * config.robot.camera_mount;
    const Pose object_in_camera = cam_in_base.inverse() * object_in_base;
    return observe(object_in_camera, config.noise, rng);
  };

  // Tracking plans from the recorded initial observation (a separate
  // measurement from iteration zero's).
  std::optional<Plan> plan;
  if (config.controller == ControllerMode::tracking) {
    const Observation first = observe_current(config.initial_platform_pose);
    const FeatureState fs = compute_features(first, config.desired_object_pose);
    FeatureVector goal;
    goal.t.setZero();
    goal.xo = s_fin[3];
    goal.yo = s_fin[4];
    goal.theta_u_z = 0.0;
    plan = config.plan_t_full
               ? plan_trajectory_timed(fs.s, goal, *config.plan_t_full, config.dt)
               : plan_trajectory(fs.s, goal, config.plan_velocity, config.dt);
  }

  SimLog log;
  log.seed = config.seed;

  const int max_iterations =
      static_cast<int>(std::ceil(config.max_duration / config.dt)) + 1;
  CableCommand filtered = CableCommand::Zero();
  bool filter_primed = false;

  for (int i = 0; i < max_iterations; ++i) {
    const SimState& state = sim.state();
    const Observation obs = observe_current(state.true_pose);
    const FeatureState fs = compute_features(obs, config.desired_object_pose);
    const Vec6 s = fs.s.vector();

    SimRecord rec;
    rec.t = state.t;
    rec.true_pose = state.true_pose;
    rec.est_pose = state.est_pose;
    rec.s = s;
    rec.camera_position = (state.true_pose * config.robot.camera_mount).t;
    rec.center_pixels = config.camera.to_pixels(obs.center);

    Vec6 s_star = s_fin;
    Vec6 s_star_rate = Vec6::Zero();
    if (plan) {
      const PlanSample sample = desired_feature_at(*plan, state.t);
      s_star = sample.s_star;
      s_star_rate = sample.s_star_rate;
    }
    rec.s_star = s_star;
    rec.error = s - s_star;
    rec.error_norm = rec.error.norm();

    const double goal_distance = (s - s_fin).norm();
    if (goal_distance <= config.threshold) {
      log.records.push_back(rec);
      log.converged = true;
      break;
    }

    const double gain = config.gain_mode == GainMode::adaptive
                            ? adaptive_gain(config.gains, rec.error_norm)
                            : config.constant_gain;
    rec.gain = gain;

    const ControlMatrices est_matrices =
        control_matrices(sim.estimated_model(), fs);
    CableCommand command =
        tracking_command(rec.error, s_star_rate, est_matrices, gain);

    if (config.actuator_time_constant > 0.0) {
      if (!filter_primed) {
        filtered = command;
        filter_primed = true;
      } else {
        filtered += (config.dt / config.actuator_time_constant) *
                    (command - filtered);
      }
      command = filtered;
    }
    rec.command = command;

    // Tracking-error diagnostic: ||(Pi - I) ds*|| with the true-side
    // matrices from a noise-free observation.
    {
      const Pose cam_in_base = state.true_pose * config.robot.camera_mount;
      const Observation exact =
          exact_observation(cam_in_base.inverse() * object_in_base);
      const FeatureState true_fs =
          compute_features(exact, config.desired_object_pose);
      const ControlMatrices true_matrices =
          control_matrices({config.robot, state.true_pose}, true_fs);
      const Mat6 pi = stability_matrix(true_matrices, est_matrices);
      rec.tracking_diagnostic =
          ((pi - Mat6::Identity()) * s_star_rate).norm();
    }

    log.records.push_back(rec);
    sim.step(command, config.dt);
  }

  log.iterations = static_cast<int>(log.records.size());
  if (!log.records.empty()) {
    log.duration = log.records.back().t;
    log.final_error_norm = (log.records.back().s - s_fin).norm();
  }
  return log;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void append_pose(std::string& out, const Pose& pose) {
  const AxisAngle aa = axis_angle(pose.R);
  const Vec3 tu = aa.theta_u();
  for (int i = 0; i < 3; ++i) {
    append_number(out, pose.t[i]);
    out += ',';
  }
  for (int i = 0; i < 3; ++i) {
    append_number(out, tu[i]);
    out += ',';
  }
}

}  // namespace

std::string SimLog::to_csv() const {
  std::string out;
  out.reserve(records.size() * 512 + 1024);
  out +=
      "t,true_tx,true_ty,true_tz,true_rx,true_ry,true_rz,"
      "est_tx,est_ty,est_tz,est_rx,est_ry,est_rz,"
      "s_tx,s_ty,s_tz,s_xo,s_yo,s_tuz,"
      "sstar_tx,sstar_ty,sstar_tz,sstar_xo,sstar_yo,sstar_tuz,"
      "e_tx,e_ty,e_tz,e_xo,e_yo,e_tuz,"
      "ldot_1,ldot_2,ldot_3,ldot_4,ldot_5,ldot_6,ldot_7,ldot_8,"
      "cam_x,cam_y,cam_z,center_u,center_v,gain,track_diag,err_norm\n";

  for (const SimRecord& rec : records) {
    append_number(out, rec.t);
    out += ',';
    append_pose(out, rec.true_pose);
    append_pose(out, rec.est_pose);
    for (int i = 0; i < 6; ++i) {
      append_number(out, rec.s[i]);
      out += ',';
    }
    for (int i = 0; i < 6; ++i) {
      append_number(out, rec.s_star[i]);
      out += ',';
    }
    for (int i = 0; i < 6; ++i) {
      append_number(out, rec.error[i]);
      out += ',';
    }
    for (int i = 0; i < kNumCables; ++i) {
      append_number(out, rec.command[i]);
      out += ',';
    }
    for (int i = 0; i < 3; ++i) {
      append_number(out, rec.camera_position[i]);
      out += ',';
    }
    append_number(out, rec.center_pixels.x());
    out += ',';
    append_number(out, rec.center_pixels.y());
    out += ',';
    append_number(out, rec.gain);
    out += ',';
    append_number(out, rec.tracking_diagnostic);
    out += ',';
    append_number(out, rec.error_norm);
    out += '\n';
  }

  out += "# converged=";
  out += converged ? '1' : '0';
  out += " iterations=" + std::to_string(iterations);
  out += " duration=";
  append_number(out, duration);
  out += " final_error=";
  append_number(out, final_error_norm);
  out += " seed=" + std::to_string(seed);
  out += '\n';
  return out;
}

namespace {

double point_segment_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& a,
                              const Eigen::VectorXd& b) {
  const Eigen::VectorXd ab = b - a;
  const double len2 = ab.squaredNorm();
  double u = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  return (p - (a + u * ab)).norm();
}

}  // namespace

DeviationMetrics deviation_metrics(const SimLog& log) {
  if (log.records.size() < 2) {
    throw Error("deviation metrics need at least 2 iterations");
  }

  const SimRecord& first = log.records.front();
  const SimRecord& last = log.records.back();
  if ((last.center_pixels - first.center_pixels).norm() < 1e-12) {
    throw DegenerateLine("image path endpoints coincide");
  }
  if ((last.camera_position - first.camera_position).norm() < 1e-12) {
    throw DegenerateLine("camera path endpoints coincide");
  }

  DeviationMetrics m;
  double img_sum = 0.0, space_sum = 0.0;
  for (const SimRecord& rec : log.records) {
    const double img = point_segment_distance(
        rec.center_pixels, first.center_pixels, last.center_pixels);
    const double sp = point_segment_distance(
        rec.camera_position, first.camera_position, last.camera_position);
    m.image_max_px = std::max(m.image_max_px, img);
    m.space_max_m = std::max(m.space_max_m, sp);
    img_sum += img;
    space_sum += sp;
  }
  const double n = static_cast<double>(log.records.size());
  m.image_mean_px = img_sum / n;
  m.space_mean_m = space_sum / n;
  return m;
}

std::array<Vec3, kNumCables> point_offset_directions(int kind) {
  Rng rng(Rng::mix(0xacc0b07bULL, static_cast<std::uint64_t>(kind)));
  std::array<Vec3, kNumCables> dirs;
  for (int i = 0; i < kNumCables; ++i) dirs[i] = rng.unit_vector();
  return dirs;
}

PerturbationDraw load_perturbation_set(const std::string& name) {
  auto unit = [](double x, double y, double z) {
    return Vec3(x, y, z).normalized();
  };

  PerturbationDraw draw;
  if (name == "none" || name.empty()) {
    return draw;
  }
  if (name == "V1" || name == "v1") {
    draw.mp_translation = 0.19 * unit(0.56, 0.64, 0.52);
    draw.mp_rotation = rodrigues({unit(0.73, 0.67, -0.14), 8.4 * kDegree});
    draw.hand_eye_rotation =
        rodrigues({unit(0.61, -0.51, -0.61), 18.0 * kDegree});
    return draw;
  }
  if (name == "V2" || name == "v2") {
    draw.mp_translation = 0.13 * unit(-0.57, -0.52, 0.63);
    draw.mp_rotation = rodrigues({unit(-0.52, 0.85, -0.04), 9.5 * kDegree});
    draw.hand_eye_translation = Vec3(0.0, 0.05, 0.0);
    draw.hand_eye_rotation =
        rodrigues({unit(0.78, -0.51, -0.35), 12.5 * kDegree});
    const auto exit_dirs = point_offset_directions(0);
    const auto anchor_dirs = point_offset_directions(1);
    for (int i = 0; i < kNumCables; ++i) {
      draw.exit_offsets[i] = 0.005 * exit_dirs[i];
      draw.anchor_offsets[i] = 0.005 * anchor_dirs[i];
    }
    return draw;
  }
  throw UnknownSet("unknown perturbation set '" + name + "'");
}

}  // namespace cablevs
