#include "cablevs/control.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace cablevs {

double adaptive_gain(const GainSchedule& g, double error_norm) {
  const double spread = g.lambda0 - g.lambda_inf;
  return spread * std::exp(-(g.slope0 / spread) * error_norm) + g.lambda_inf;
}

ControlMatrices control_matrices(const EstimatedModel& model,
                                 const FeatureState& features) {
  ControlMatrices m;
  m.interaction = interaction_matrix(features);
  m.adjoint_mount = adjoint(model.robot.camera_mount);
  m.jacobian = jacobian(model.robot, cable_state(model.robot, model.platform_pose));
  return m;
}

Vec6 camera_velocity(const Vec6& error, const Vec6& desired_rate,
                     const Mat6& interaction, double gain) {
  Eigen::FullPivLU<Mat6> lu(interaction);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) {
    throw SingularInteraction("interaction matrix is singular");
  }
  return lu.solve(-gain * error + desired_rate);
}

CableCommand tracking_command(const Vec6& error, const Vec6& desired_rate,
                              const ControlMatrices& m, double gain) {
  if (min_singular_value(m.jacobian) < 1e-8) {
    throw RankDeficient("estimated jacobian is rank deficient");
  }
  const Vec6 cam_vel = camera_velocity(error, desired_rate, m.interaction, gain);
  return m.jacobian * (m.adjoint_mount * cam_vel);
}

CableCommand classic_command(const Vec6& error, const ControlMatrices& m,
                             double gain) {
  return tracking_command(error, Vec6::Zero(), m, gain);
}

namespace {

Plan make_plan(const Vec6& s_init, const Vec6& s_fin, double t_full, double dt) {
  if (t_full <= 0.0) throw Error("plan horizon must be positive");
  if (dt <= 0.0) throw Error("plan dt must be positive");

  Plan plan;
  plan.s_init = s_init;
  plan.s_fin = s_fin;
  plan.t_full = t_full;
  plan.dt = dt;
  plan.c = (s_fin - s_init) / t_full;

  const int k = static_cast<int>(std::floor(t_full / dt + 1e-12));
  plan.samples.reserve(k + 1);
  for (int i = 0; i <= k; ++i) {
    plan.samples.push_back(s_init + (i * dt) * plan.c);
  }
  return plan;
}

}  // namespace

Plan plan_trajectory(const FeatureVector& s_init, const FeatureVector& s_fin,
                     const Vec6& velocity, double dt) {
  const Vec6 si = s_init.vector();
  const Vec6 sf = s_fin.vector();
  const Vec6 e_full = si - sf;

  if (e_full.cwiseAbs().maxCoeff() == 0.0) {
    throw ZeroHorizon("initial and final feature vectors coincide");
  }
  if ((velocity.array() <= 0.0).any()) {
    throw Error("desired average velocity components must be positive");
  }

  // The time budget is set by the slowest component; error components can be
  // negative so the ratio uses magnitudes.
  const double t_full = (e_full.cwiseAbs().array() / velocity.array()).maxCoeff();
  return make_plan(si, sf, t_full, dt);
}

Plan plan_trajectory_timed(const FeatureVector& s_init,
                           const FeatureVector& s_fin, double t_full,
                           double dt) {
  const Vec6 si = s_init.vector();
  const Vec6 sf = s_fin.vector();
  if ((si - sf).cwiseAbs().maxCoeff() == 0.0) {
    throw ZeroHorizon("initial and final feature vectors coincide");
  }
  return make_plan(si, sf, t_full, dt);
}

PlanSample desired_feature_at(const Plan& plan, double t) {
  if (t < 0.0) t = 0.0;
  if (t >= plan.t_full) {
    return PlanSample{plan.s_fin, Vec6::Zero()};
  }

  const double pos = t / plan.dt;
  const auto last = static_cast<double>(plan.samples.size() - 1);
  if (pos >= last) {
    const Vec6 base = plan.samples.back();
    return PlanSample{base + (t - last * plan.dt) * plan.c, plan.c};
  }
  const int idx = static_cast<int>(pos);
  const double frac = pos - idx;
  const Vec6 s =
      (1.0 - frac) * plan.samples[idx] + frac * plan.samples[idx + 1];
  return PlanSample{s, plan.c};
}

}  // namespace cablevs
