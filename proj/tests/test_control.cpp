#include "cablevs/control.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "cablevs/rng.hpp"
#include "cablevs/sim.hpp"
#include "doctest.h"

using namespace cablevs;

namespace {

Observation exact_observation(const Pose& object_pose) {
  Observation obs;
  obs.object_pose = object_pose;
  obs.center = object_pose.t.head<2>() / object_pose.t.z();
  obs.depth = object_pose.t.z();
  return obs;
}

struct ReferenceSetup {
  ExperimentConfig config = make_reference_experiment(ControllerMode::classic);
  FeatureState features;
  ControlMatrices matrices;
  Vec6 s_fin;

  ReferenceSetup() {
    const Observation obs = exact_observation(config.initial_object_in_camera);
    features = compute_features(obs, config.desired_object_pose);
    matrices =
        control_matrices({config.robot, config.initial_platform_pose}, features);
    s_fin = desired_features(config.desired_object_pose).vector();
  }
};

}  // namespace

TEST_CASE("adaptive gain hits the published endpoints") {
  GainSchedule g;  // 2.0 / 0.4 / 30
  CHECK(adaptive_gain(g, 0.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(adaptive_gain(g, 1e9) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("adaptive gain at the characteristic error scale") {
  GainSchedule g;
  const double x = (g.lambda0 - g.lambda_inf) / g.slope0;  // 1.6 / 30
  const double expected = 0.4 + 1.6 * std::exp(-1.0);
  CHECK(adaptive_gain(g, x) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.9886071058743077));
}

TEST_CASE("adaptive gain decreases strictly and stays within bounds") {
  // Strict decrease until the exponential term underflows to lambda_inf.
  GainSchedule g;
  double prev = adaptive_gain(g, 0.0);
  for (double x = 0.01; x < 3.0; x += 0.01) {
    const double val = adaptive_gain(g, x);
    if (prev > g.lambda_inf + 1e-12) {
      CHECK(val < prev);
    } else {
      CHECK(val <= prev);
    }
    CHECK(val >= g.lambda_inf);
    CHECK(val <= g.lambda0);
    prev = val;
  }
}

TEST_CASE("zero error commands zero cable rates") {
  ReferenceSetup ref;
  const CableCommand cmd = classic_command(Vec6::Zero(), ref.matrices, 1.7);
  CHECK(cmd.cwiseAbs().maxCoeff() == 0.0);
  const CableCommand cmd2 =
      tracking_command(Vec6::Zero(), Vec6::Zero(), ref.matrices, 1.7);
  CHECK(cmd2.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("command is homogeneous of degree one in the gain") {
  ReferenceSetup ref;
  const Vec6 e = ref.features.s.vector() - ref.s_fin;
  const CableCommand once = classic_command(e, ref.matrices, 0.8);
  const CableCommand twice = classic_command(e, ref.matrices, 1.6);
  CHECK((twice - 2.0 * once).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("classic command equals the written-out control law") {
  ReferenceSetup ref;
  const Vec6 e = ref.features.s.vector() - ref.s_fin;
  const double gain = 1.3;
  const CableCommand cmd = classic_command(e, ref.matrices, gain);
  const CableCommand direct = -gain * (ref.matrices.jacobian *
                                       ref.matrices.adjoint_mount *
                                       ref.matrices.interaction.inverse() * e);
  CHECK((cmd - direct).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("tracking command with zero rate is bitwise the classic command") {
  ReferenceSetup ref;
  const Vec6 e = ref.features.s.vector() - ref.s_fin;
  const CableCommand track = tracking_command(e, Vec6::Zero(), ref.matrices, 0.9);
  const CableCommand classic = classic_command(e, ref.matrices, 0.9);
  for (int i = 0; i < kNumCables; ++i) {
    CHECK(track[i] == classic[i]);
  }
}

TEST_CASE("one plant step realizes the commanded error rate") {
  // Exact model, tiny step: the achieved feature rate must match -gain * e.
  ReferenceSetup ref;
  const double dt = 1e-4;
  const double gain = 1.0;
  const Vec6 e = ref.features.s.vector() - ref.s_fin;
  const CableCommand cmd = classic_command(e, ref.matrices, gain);

  EstimatedModel est{ref.config.robot, ref.config.initial_platform_pose};
  Simulator sim(ref.config.robot, est, ref.config.initial_platform_pose);
  const Pose object_in_base = ref.config.initial_platform_pose *
                              ref.config.robot.camera_mount *
                              ref.config.initial_object_in_camera;
  sim.step(cmd, dt);

  const Pose cam = sim.state().true_pose * ref.config.robot.camera_mount;
  const FeatureState after = compute_features(
      exact_observation(cam.inverse() * object_in_base),
      ref.config.desired_object_pose);
  const Vec6 achieved_rate = (after.s.vector() - ref.features.s.vector()) / dt;
  const Vec6 target_rate = -gain * e;
  CHECK((achieved_rate - target_rate).norm() < 0.02 * target_rate.norm());
}

TEST_CASE("one plant step follows a pure desired-rate command") {
  ReferenceSetup ref;
  const double dt = 1e-4;
  Vec6 rate;
  rate << 0.01, -0.02, 0.015, 0.01, -0.005, 0.02;

  // e = 0: command realizes ds* alone.
  const CableCommand cmd = tracking_command(Vec6::Zero(), rate, ref.matrices, 2.0);

  EstimatedModel est{ref.config.robot, ref.config.initial_platform_pose};
  Simulator sim(ref.config.robot, est, ref.config.initial_platform_pose);
  const Pose object_in_base = ref.config.initial_platform_pose *
                              ref.config.robot.camera_mount *
                              ref.config.initial_object_in_camera;
  sim.step(cmd, dt);

  const Pose cam = sim.state().true_pose * ref.config.robot.camera_mount;
  const FeatureState after = compute_features(
      exact_observation(cam.inverse() * object_in_base),
      ref.config.desired_object_pose);
  const Vec6 achieved_rate = (after.s.vector() - ref.features.s.vector()) / dt;
  CHECK((achieved_rate - rate).norm() < 0.01 * rate.norm());
}

TEST_CASE("singular interaction matrix is rejected") {
  ReferenceSetup ref;
  ControlMatrices bad = ref.matrices;
  bad.interaction.row(3).setZero();
  CHECK_THROWS_AS(classic_command(Vec6::Ones(), bad, 1.0), SingularInteraction);
}

TEST_CASE("rank-deficient estimated jacobian is rejected") {
  ReferenceSetup ref;
  ControlMatrices bad = ref.matrices;
  bad.jacobian.setZero();
  CHECK_THROWS_AS(classic_command(Vec6::Ones(), bad, 1.0), RankDeficient);
}

TEST_CASE("planning between identical features is a zero horizon") {
  FeatureVector s;
  s.t = Vec3(0.1, 0.2, 0.3);
  CHECK_THROWS_AS(plan_trajectory(s, s, Vec6::Ones(), 0.05), ZeroHorizon);
}

TEST_CASE("planner rejects non-positive velocities") {
  FeatureVector a, b;
  b.t = Vec3(0.6, 0.0, 0.0);
  Vec6 v = Vec6::Ones();
  v[2] = 0.0;
  CHECK_THROWS_AS(plan_trajectory(a, b, v, 0.05), Error);
}

TEST_CASE("horizon comes from the slowest component") {
  FeatureVector s_init, s_fin;
  s_init.t = Vec3(0.6, 0.0, 0.0);  // e_full = s_init - s_fin = +0.6 in x
  Vec6 v = Vec6::Constant(0.1);
  const Plan plan = plan_trajectory(s_init, s_fin, v, 0.05);
  CHECK(plan.t_full == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(std::abs(plan.c[0]) == doctest::Approx(0.1).epsilon(1e-12));
  // c points from s_init toward s_fin.
  CHECK(plan.c[0] < 0.0);
  CHECK(plan.samples.back()[0] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("samples advance by exactly dt * c") {
  FeatureVector s_init, s_fin;
  s_init.t = Vec3(0.4, -0.2, 0.1);
  s_fin.xo = 0.3;
  s_fin.theta_u_z = -0.2;
  const Plan plan = plan_trajectory(s_init, s_fin, Vec6::Constant(0.05), 0.05);
  for (size_t i = 0; i + 1 < plan.samples.size(); ++i) {
    const Vec6 diff = plan.samples[i + 1] - plan.samples[i];
    CHECK((diff - plan.dt * plan.c).cwiseAbs().maxCoeff() < 1e-15);
  }
  CHECK((plan.samples.front() - s_init.vector()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((plan.samples.back() - s_fin.vector()).cwiseAbs().maxCoeff() <=
        plan.dt * plan.c.cwiseAbs().maxCoeff() + 1e-12);
}

TEST_CASE("desired features interpolate and clamp") {
  FeatureVector s_init, s_fin;
  s_init.t = Vec3(0.4, -0.2, 0.1);
  s_fin.xo = 0.3;
  const Plan plan = plan_trajectory(s_init, s_fin, Vec6::Constant(0.05), 0.05);

  const PlanSample at0 = desired_feature_at(plan, 0.0);
  CHECK((at0.s_star - s_init.vector()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((at0.s_star_rate - plan.c).cwiseAbs().maxCoeff() == 0.0);

  const PlanSample mid = desired_feature_at(plan, plan.t_full / 2.0);
  const Vec6 midpoint = 0.5 * (s_init.vector() + s_fin.vector());
  CHECK((mid.s_star - midpoint).norm() <= plan.dt * plan.c.norm() + 1e-12);

  const PlanSample past = desired_feature_at(plan, plan.t_full + 1.0);
  CHECK((past.s_star - s_fin.vector()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(past.s_star_rate.cwiseAbs().maxCoeff() == 0.0);

  const PlanSample off_grid = desired_feature_at(plan, 0.42 * plan.t_full);
  const Vec6 exact = s_init.vector() + (0.42 * plan.t_full) * plan.c;
  CHECK((off_grid.s_star - exact).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("timed planner spreads the same line over a chosen horizon") {
  FeatureVector s_init, s_fin;
  s_init.t = Vec3(0.3, 0.0, -0.1);
  const Plan plan = plan_trajectory_timed(s_init, s_fin, 12.0, 0.05);
  CHECK(plan.t_full == 12.0);
  CHECK((plan.c - (s_fin.vector() - s_init.vector()) / 12.0)
            .cwiseAbs()
            .maxCoeff() < 1e-15);
}

TEST_CASE("error norm under classic control decays exponentially") {
  // Constant gain, exact model: ||e(t)|| must track ||e0|| exp(-gain t)
  // within 5% over the first two seconds.
  ExperimentConfig config = make_reference_experiment(ControllerMode::classic);
  config.gain_mode = GainMode::constant;
  config.constant_gain = 2.0;
  config.dt = 0.005;
  config.max_duration = 2.0;

  const SimLog log = run(config);
  REQUIRE(log.records.size() > 100);
  const double e0 = log.records.front().error_norm;
  for (const SimRecord& rec : log.records) {
    if (rec.t > 2.0) break;
    const double model = e0 * std::exp(-2.0 * rec.t);
    CHECK(std::abs(rec.error_norm - model) / model < 0.05);
  }
}
