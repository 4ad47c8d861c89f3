#include "cablevs/stability.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "cablevs/rng.hpp"
#include "cablevs/sim.hpp"
#include "doctest.h"

using namespace cablevs;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;

Pose reference_goal() {
  return make_reference_experiment(ControllerMode::classic).desired_object_pose;
}

// Canonical observation for workspace sweeps: the object at a representative
// task distance rather than the near-field goal.
Pose workspace_goal() {
  Pose goal = reference_goal();
  goal.t = Vec3(0.0, 0.0, 0.45);
  return goal;
}

FeatureState goal_features(const Pose& desired) {
  Observation obs;
  obs.object_pose = desired;
  obs.center = desired.t.head<2>() / desired.t.z();
  obs.depth = desired.t.z();
  return compute_features(obs, desired);
}

Mat6 pi_for_draw(const RobotDescription& robot, const Pose& pose,
                 const PerturbationDraw& draw) {
  const FeatureState fs = goal_features(reference_goal());
  const ControlMatrices true_m = control_matrices({robot, pose}, fs);
  const EstimatedModel est = apply_perturbation(robot, pose, draw);
  const ControlMatrices est_m = control_matrices(est, fs);
  return stability_matrix(true_m, est_m);
}

Pose random_feasible_pose(Rng& rng) {
  return Pose(rodrigues(AxisAngle{rng.unit_vector(), rng.uniform(0.0, 0.3)}),
              Vec3(rng.uniform(-0.35, 0.35), rng.uniform(-0.35, 0.35),
                   rng.uniform(0.25, 0.9)));
}

// Quadratic-form scan: positive definiteness probed with random directions.
bool quadratic_form_positive(const Mat6& M, Rng& rng, int samples = 10000) {
  for (int i = 0; i < samples; ++i) {
    Vec6 x;
    for (int k = 0; k < 6; ++k) x[k] = rng.gaussian();
    x.normalize();
    if (x.dot(M * x) <= 0.0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("stability matrix is the identity under exact estimates") {
  const RobotDescription robot = make_default_robot();
  Rng rng(301);
  int tested = 0;
  while (tested < 50) {
    const Pose pose = random_feasible_pose(rng);
    if (!static_feasible(robot, pose)) continue;
    ++tested;
    const Mat6 pi = pi_for_draw(robot, pose, PerturbationDraw{});
    CHECK((pi - Mat6::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("moderate estimate errors keep the criterion positive definite") {
  // Hand-eye 3 degrees, pose error 0.05 m / 10 degrees at the center,
  // evaluated at the workspace canonical observation state.
  const RobotDescription robot = make_default_robot();
  const Pose center(Rotation::Identity(), Vec3(0.0, 0.0, 0.6));
  const FeatureState fs = goal_features(workspace_goal());

  Rng rng(307);
  for (int trial = 0; trial < 20; ++trial) {
    PerturbationDraw draw;
    draw.hand_eye_rotation = rodrigues({rng.unit_vector(), 3.0 * kDeg});
    draw.mp_translation = 0.05 * rng.unit_vector();
    draw.mp_rotation = rodrigues({rng.unit_vector(), 10.0 * kDeg});
    const ControlMatrices true_m = control_matrices({robot, center}, fs);
    const EstimatedModel est = apply_perturbation(robot, center, draw);
    const ControlMatrices est_m = control_matrices(est, fs);
    const Mat6 pi = stability_matrix(true_m, est_m);
    CHECK(is_positive_definite(pi));
    Rng scan(rng.next_u64());
    CHECK(quadratic_form_positive(pi, scan, 2000));
  }
}

TEST_CASE("a reversed hand-eye estimate breaks positive definiteness") {
  const RobotDescription robot = make_default_robot();
  const Pose center(Rotation::Identity(), Vec3(0.0, 0.0, 0.6));
  PerturbationDraw draw;
  draw.hand_eye_rotation = rodrigues({Vec3(0, 0, 1), 180.0 * kDeg});
  const Mat6 pi = pi_for_draw(robot, center, draw);
  CHECK_FALSE(is_positive_definite(pi));
}

TEST_CASE("is_positive_definite on fixed matrices") {
  CHECK(is_positive_definite(Mat6::Identity()));

  Mat6 indefinite = Mat6::Identity();
  indefinite(5, 5) = -1.0;
  CHECK_FALSE(is_positive_definite(indefinite));

  // Non-symmetric with positive diagonal but a strongly indefinite
  // symmetric part: [[1, 10], [0, 1]] padded with identity.
  Mat6 shear = Mat6::Identity();
  shear(0, 1) = 10.0;
  CHECK_FALSE(is_positive_definite(shear));
}

TEST_CASE("is_positive_definite agrees with a quadratic-form scan") {
  Rng rng(311);
  for (int trial = 0; trial < 100; ++trial) {
    // Symmetric part with eigenvalues kept away from zero, plus skew noise.
    Mat6 Q;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) Q(i, j) = rng.gaussian();
    const Eigen::HouseholderQR<Mat6> qr(Q);
    Mat6 basis = qr.householderQ();
    Vec6 eigs;
    for (int k = 0; k < 6; ++k) {
      double mag = rng.uniform(0.2, 2.0);
      eigs[k] = rng.uniform() < 0.5 ? -mag : mag;
    }
    Mat6 sym = basis * eigs.asDiagonal() * basis.transpose();
    Mat6 skew_part;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) skew_part(i, j) = rng.gaussian();
    const Mat6 M = sym + 0.5 * (skew_part - skew_part.transpose());

    Rng scan(rng.next_u64());
    CHECK(is_positive_definite(M) == quadratic_form_positive(M, scan));
  }
}

TEST_CASE("zero bounds draw the zero perturbation") {
  Rng rng(313);
  const PerturbationDraw draw =
      sample_perturbation(PerturbationBounds{}, rng, SampleMode::interior);
  CHECK(draw.is_zero());
}

TEST_CASE("draws are reproducible for a fixed seed") {
  PerturbationBounds bounds;
  bounds.mp_pose_trans = 0.05;
  bounds.mp_pose_rot = 0.2;
  bounds.hand_eye_trans = 0.01;
  bounds.hand_eye_rot = 0.05;
  bounds.exit_point = 0.004;
  bounds.anchor_point = 0.002;

  Rng a(42), b(42);
  const PerturbationDraw da = sample_perturbation(bounds, a, SampleMode::interior);
  const PerturbationDraw db = sample_perturbation(bounds, b, SampleMode::interior);
  CHECK((da.mp_translation - db.mp_translation).norm() == 0.0);
  CHECK((da.mp_rotation - db.mp_rotation).cwiseAbs().maxCoeff() == 0.0);
  CHECK((da.exit_offsets[5] - db.exit_offsets[5]).norm() == 0.0);
}

TEST_CASE("draw magnitudes respect the bounds") {
  PerturbationBounds bounds;
  bounds.mp_pose_trans = 0.05;
  bounds.mp_pose_rot = 0.2;
  bounds.hand_eye_trans = 0.01;
  bounds.hand_eye_rot = 0.05;
  bounds.exit_point = 0.004;
  bounds.anchor_point = 0.002;

  Rng rng(317);
  double max_trans = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const PerturbationDraw d =
        sample_perturbation(bounds, rng, SampleMode::interior);
    const double trans = d.mp_translation.norm();
    CHECK(trans <= bounds.mp_pose_trans + 1e-12);
    CHECK(axis_angle(d.mp_rotation).angle <= bounds.mp_pose_rot + 1e-9);
    CHECK(d.hand_eye_translation.norm() <= bounds.hand_eye_trans + 1e-12);
    for (int k = 0; k < kNumCables; ++k) {
      CHECK(d.exit_offsets[k].norm() <= bounds.exit_point + 1e-12);
      CHECK(d.anchor_offsets[k].norm() <= bounds.anchor_point + 1e-12);
    }
    max_trans = std::max(max_trans, trans);
  }
  CHECK(max_trans > 0.99 * bounds.mp_pose_trans);

  for (int i = 0; i < 100; ++i) {
    const PerturbationDraw d =
        sample_perturbation(bounds, rng, SampleMode::boundary);
    CHECK(d.mp_translation.norm() ==
          doctest::Approx(bounds.mp_pose_trans).epsilon(1e-12));
    CHECK(axis_angle(d.mp_rotation).angle ==
          doctest::Approx(bounds.mp_pose_rot).epsilon(1e-9));
  }
}

TEST_CASE("csw verdict is true everywhere Pi is defined when bounds vanish") {
  const RobotDescription robot = make_default_robot();
  Rng rng(331);
  CswParams params;
  params.interior_samples = 8;
  params.boundary_samples = 2;
  for (int i = 0; i < 10; ++i) {
    const Pose pose = random_feasible_pose(rng);
    CHECK(csw_verdict(robot, pose, workspace_goal(), PerturbationBounds{},
                      params));
  }
}

TEST_CASE("csw verdict is monotone over nested bounds with shared seeds") {
  const RobotDescription robot = make_default_robot();
  PerturbationBounds big;
  big.mp_pose_trans = 0.19;
  big.mp_pose_rot = 8.5 * kDeg;
  big.hand_eye_trans = 0.01;
  big.hand_eye_rot = 30.0 * kDeg;

  PerturbationBounds small = big;
  small.mp_pose_trans *= 0.4;
  small.mp_pose_rot *= 0.4;
  small.hand_eye_trans *= 0.4;
  small.hand_eye_rot *= 0.4;

  CswParams params;
  params.interior_samples = 24;
  params.boundary_samples = 8;

  Rng rng(337);
  int big_true = 0, small_true = 0;
  for (int i = 0; i < 40; ++i) {
    const Pose pose = random_feasible_pose(rng);
    params.seed = 1000 + i;
    const bool verdict_big = csw_verdict(robot, pose, workspace_goal(), big, params);
    const bool verdict_small =
        csw_verdict(robot, pose, workspace_goal(), small, params);
    if (verdict_big) CHECK(verdict_small);
    big_true += verdict_big;
    small_true += verdict_small;
  }
  CHECK(small_true >= big_true);
}

TEST_CASE("workspace cells obey the intersection identity") {
  const RobotDescription robot = make_default_robot();
  GridSpec grid;
  grid.x_min = -0.45;
  grid.x_max = 0.45;
  grid.y_min = -0.45;
  grid.y_max = 0.45;
  grid.z_min = 0.1;
  grid.z_max = 1.3;
  grid.nx = 5;
  grid.ny = 5;
  grid.nz = 5;

  WorkspaceParams params;
  params.bounds.mp_pose_trans = 0.05;
  params.bounds.mp_pose_rot = 10.0 * kDeg;
  params.bounds.hand_eye_trans = 0.01;
  params.bounds.hand_eye_rot = 3.0 * kDeg;
  params.csw.interior_samples = 12;
  params.csw.boundary_samples = 4;
  params.csw.seed = 7;
  params.desired_object_pose = workspace_goal();
  params.workers = 2;

  const WorkspaceGrid ws = compute_workspaces(robot, grid, params);
  CHECK(ws.counts.cells_total == 125);
  long fc = 0, sfw = 0, csw = 0;
  for (const WorkspaceCell& cell : ws.cells) {
    CHECK(cell.fc == (cell.sfw && cell.csw));
    fc += cell.fc;
    sfw += cell.sfw;
    csw += cell.csw;
  }
  CHECK(fc == ws.counts.fc);
  CHECK(sfw == ws.counts.sfw);
  CHECK(csw == ws.counts.csw);
  CHECK(ws.counts.fc <= std::min(ws.counts.sfw, ws.counts.csw));
  CHECK(ws.counts.sfw > 0);

  // Static feasibility only below the exit plane for the suspended robot.
  for (const WorkspaceCell& cell : ws.cells) {
    if (cell.position.z() > 1.2) CHECK_FALSE(cell.sfw);
  }
}

TEST_CASE("workspace results are independent of the worker count") {
  const RobotDescription robot = make_default_robot();
  GridSpec grid;
  grid.x_min = -0.3;
  grid.x_max = 0.3;
  grid.y_min = -0.3;
  grid.y_max = 0.3;
  grid.z_min = 0.2;
  grid.z_max = 1.0;
  grid.nx = 3;
  grid.ny = 3;
  grid.nz = 3;
  grid.orientations.push_back(rodrigues({Vec3(1, 0, 0).normalized(), 0.3}));

  WorkspaceParams params;
  params.bounds.mp_pose_rot = 8.0 * kDeg;
  params.bounds.hand_eye_rot = 20.0 * kDeg;
  params.csw.interior_samples = 8;
  params.csw.boundary_samples = 4;
  params.csw.seed = 11;
  params.desired_object_pose = workspace_goal();

  params.workers = 1;
  const WorkspaceGrid serial = compute_workspaces(robot, grid, params);
  params.workers = 4;
  const WorkspaceGrid parallel = compute_workspaces(robot, grid, params);

  REQUIRE(serial.cells.size() == parallel.cells.size());
  for (size_t i = 0; i < serial.cells.size(); ++i) {
    CHECK(serial.cells[i].sfw == parallel.cells[i].sfw);
    CHECK(serial.cells[i].csw == parallel.cells[i].csw);
    CHECK(serial.cells[i].fc == parallel.cells[i].fc);
  }
}

TEST_CASE("larger perturbations shrink the accepted region") {
  const RobotDescription robot = make_default_robot();
  GridSpec grid;
  grid.x_min = -0.4;
  grid.x_max = 0.4;
  grid.y_min = -0.4;
  grid.y_max = 0.4;
  grid.z_min = 0.15;
  grid.z_max = 1.05;
  grid.nx = 4;
  grid.ny = 4;
  grid.nz = 4;

  WorkspaceParams mild;
  mild.bounds.mp_pose_trans = 0.05;
  mild.bounds.mp_pose_rot = 10.0 * kDeg;
  mild.bounds.hand_eye_trans = 0.01;
  mild.bounds.hand_eye_rot = 3.0 * kDeg;
  mild.csw.interior_samples = 16;
  mild.csw.boundary_samples = 8;
  mild.csw.seed = 13;
  mild.desired_object_pose = workspace_goal();

  WorkspaceParams harsh = mild;
  harsh.bounds.mp_pose_trans = 0.19;
  harsh.bounds.mp_pose_rot = 8.5 * kDeg;
  harsh.bounds.hand_eye_rot = 30.0 * kDeg;

  const WorkspaceGrid a = compute_workspaces(robot, grid, mild);
  const WorkspaceGrid b = compute_workspaces(robot, grid, harsh);
  CHECK(b.counts.csw < a.counts.csw);
  CHECK(a.counts.csw > 0);
}
