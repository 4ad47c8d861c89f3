#include "cablevs/stability.hpp"

#include <cmath>
#include <thread>

#include <Eigen/Dense>

namespace cablevs {

bool PerturbationDraw::is_zero() const {
  auto zero3 = [](const Vec3& v) { return v.isZero(0.0); };
  bool points_zero = true;
  for (int i = 0; i < kNumCables; ++i) {
    points_zero = points_zero && zero3(exit_offsets[i]) && zero3(anchor_offsets[i]);
  }
  return zero3(mp_translation) && zero3(hand_eye_translation) &&
         mp_rotation.isIdentity(0.0) && hand_eye_rotation.isIdentity(0.0) &&
         points_zero;
}

namespace {

double draw_magnitude(double bound, Rng& rng, SampleMode mode) {
  const double u = rng.uniform();  // always consumed to keep streams aligned
  return mode == SampleMode::boundary ? bound : bound * u;
}

Rotation draw_rotation(double bound, Rng& rng, SampleMode mode) {
  const Vec3 axis = rng.unit_vector();
  const double angle = draw_magnitude(bound, rng, mode);
  return rodrigues(AxisAngle{axis, angle});
}

Vec3 draw_offset(double bound, Rng& rng, SampleMode mode) {
  const Vec3 axis = rng.unit_vector();
  return draw_magnitude(bound, rng, mode) * axis;
}

}  // namespace

PerturbationDraw sample_perturbation(const PerturbationBounds& bounds,
                                     Rng& rng, SampleMode mode) {
  PerturbationDraw draw;
  draw.mp_translation = draw_offset(bounds.mp_pose_trans, rng, mode);
  draw.mp_rotation = draw_rotation(bounds.mp_pose_rot, rng, mode);
  draw.hand_eye_translation = draw_offset(bounds.hand_eye_trans, rng, mode);
  draw.hand_eye_rotation = draw_rotation(bounds.hand_eye_rot, rng, mode);
  for (int i = 0; i < kNumCables; ++i) {
    draw.exit_offsets[i] = draw_offset(bounds.exit_point, rng, mode);
  }
  for (int i = 0; i < kNumCables; ++i) {
    draw.anchor_offsets[i] = draw_offset(bounds.anchor_point, rng, mode);
  }
  return draw;
}

EstimatedModel apply_perturbation(const RobotDescription& true_robot,
                                  const Pose& true_pose,
                                  const PerturbationDraw& draw) {
  // Offsets are expressed in the frame each perturbed quantity is written
  // in: base frame for the platform pose, platform frame for the camera
  // mount. Rotation offsets therefore compose on the left.
  EstimatedModel est;
  est.robot = true_robot;
  for (int i = 0; i < kNumCables; ++i) {
    est.robot.exit_points[i] += draw.exit_offsets[i];
    est.robot.anchor_points[i] += draw.anchor_offsets[i];
  }
  est.robot.camera_mount.t += draw.hand_eye_translation;
  est.robot.camera_mount.R = draw.hand_eye_rotation * est.robot.camera_mount.R;
  est.platform_pose.t = true_pose.t + draw.mp_translation;
  est.platform_pose.R = draw.mp_rotation * true_pose.R;
  return est;
}

Mat6 stability_matrix(const ControlMatrices& true_matrices,
                      const ControlMatrices& est_matrices) {
  Eigen::FullPivLU<Mat6> est_lu(est_matrices.interaction);
  est_lu.setThreshold(1e-10);
  if (!est_lu.isInvertible()) {
    throw SingularInteraction("estimated interaction matrix is singular");
  }
  Eigen::FullPivLU<Mat6> adj_lu(true_matrices.adjoint_mount);
  if (!adj_lu.isInvertible()) {
    throw SingularInteraction("adjoint matrix is singular");
  }

  const JacobianMatrix est_side =
      est_matrices.jacobian * (est_matrices.adjoint_mount * est_lu.inverse());
  const Eigen::Matrix<double, 6, kNumCables> pinv =
      pseudo_inverse(true_matrices.jacobian);
  const Mat6 inner = pinv * est_side;
  return true_matrices.interaction * adj_lu.solve(inner);
}

bool is_positive_definite(const Mat6& M, double threshold) {
  const Mat6 sym = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Mat6> eig(sym);
  return eig.eigenvalues().minCoeff() > threshold;
}

namespace {

/// Canonical feature state for workspace evaluation: the platform sits at
/// its goal, so the camera sees the object at the desired relative pose.
FeatureState goal_feature_state(const Pose& desired_object_pose) {
  Observation obs;
  obs.object_pose = desired_object_pose;
  obs.center = desired_object_pose.t.head<2>() / desired_object_pose.t.z();
  obs.depth = desired_object_pose.t.z();
  return compute_features(obs, desired_object_pose);
}

}  // namespace

bool csw_verdict(const RobotDescription& robot, const Pose& platform_pose,
                 const Pose& desired_object_pose,
                 const PerturbationBounds& bounds, const CswParams& params) {
  if (desired_object_pose.t.z() <= 0.0) return false;

  ControlMatrices true_matrices;
  try {
    const FeatureState goal_fs = goal_feature_state(desired_object_pose);
    true_matrices =
        control_matrices({robot, platform_pose}, goal_fs);
  } catch (const Error&) {
    return false;
  }

  Rng rng(params.seed);
  const int total = params.interior_samples + params.boundary_samples;
  for (int k = 0; k < total; ++k) {
    const SampleMode mode = k < params.interior_samples ? SampleMode::interior
                                                        : SampleMode::boundary;
    const PerturbationDraw draw = sample_perturbation(bounds, rng, mode);
    try {
      const EstimatedModel est =
          apply_perturbation(robot, platform_pose, draw);
      // The controller's observation of the goal, including feature noise.
      const Observation obs =
          observe(desired_object_pose, bounds.feature_noise, rng);
      const FeatureState est_fs = compute_features(obs, desired_object_pose);
      const ControlMatrices est_matrices = control_matrices(est, est_fs);
      const Mat6 pi = stability_matrix(true_matrices, est_matrices);
      if (!is_positive_definite(pi)) return false;
    } catch (const Error&) {
      return false;  // a pose where Pi is undefined is not in the CSW
    }
  }
  return true;
}

WorkspaceGrid compute_workspaces(const RobotDescription& robot,
                                 const GridSpec& grid,
                                 const WorkspaceParams& params) {
  WorkspaceGrid out;
  out.spec = grid;

  const int n_orient = static_cast<int>(grid.orientations.size());
  const long n_cells = static_cast<long>(grid.nx) * grid.ny * grid.nz * n_orient;
  out.cells.resize(n_cells);

  auto axis_value = [](double lo, double hi, int n, int i) {
    return n <= 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  };

  auto evaluate_cell = [&](long index) {
    WorkspaceCell cell;
    long rest = index;
    cell.orientation_id = static_cast<int>(rest % n_orient);
    rest /= n_orient;
    cell.iz = static_cast<int>(rest % grid.nz);
    rest /= grid.nz;
    cell.iy = static_cast<int>(rest % grid.ny);
    cell.ix = static_cast<int>(rest / grid.ny);
    cell.position = Vec3(axis_value(grid.x_min, grid.x_max, grid.nx, cell.ix),
                         axis_value(grid.y_min, grid.y_max, grid.ny, cell.iy),
                         axis_value(grid.z_min, grid.z_max, grid.nz, cell.iz));

    const Pose pose(grid.orientations[cell.orientation_id], cell.position);
    try {
      cell.sfw = static_feasible(robot, pose);
    } catch (const Error&) {
      cell.sfw = false;
    }

    CswParams cell_params = params.csw;
    cell_params.seed = Rng::mix(params.csw.seed, static_cast<std::uint64_t>(index));
    cell.csw = csw_verdict(robot, pose, params.desired_object_pose,
                           params.bounds, cell_params);
    cell.fc = cell.sfw && cell.csw;
    out.cells[index] = cell;
  };

  int workers = params.workers > 0
                    ? params.workers
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;

  if (workers == 1 || n_cells < 2) {
    for (long i = 0; i < n_cells; ++i) evaluate_cell(i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (long i = w; i < n_cells; i += workers) evaluate_cell(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  WorkspaceCounts& counts = out.counts;
  counts.cells_total = n_cells;
  counts.positions_total = static_cast<long>(grid.nx) * grid.ny * grid.nz;
  for (long p = 0; p < counts.positions_total; ++p) {
    bool all_sfw = true, all_csw = true, all_fc = true;
    for (int o = 0; o < n_orient; ++o) {
      const WorkspaceCell& cell = out.cells[p * n_orient + o];
      counts.sfw += cell.sfw;
      counts.csw += cell.csw;
      counts.fc += cell.fc;
      all_sfw = all_sfw && cell.sfw;
      all_csw = all_csw && cell.csw;
      all_fc = all_fc && cell.fc;
    }
    counts.sfw_positions += all_sfw;
    counts.csw_positions += all_csw;
    counts.fc_positions += all_fc;
  }
  return out;
}

}  // namespace cablevs
