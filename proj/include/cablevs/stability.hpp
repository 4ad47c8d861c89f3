#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "cablevs/cdpr.hpp"
#include "cablevs/control.hpp"
#include "cablevs/geometry.hpp"
#include "cablevs/rng.hpp"
#include "cablevs/vision.hpp"

namespace cablevs {

/// Magnitude bounds of the model perturbations the controller must tolerate.
struct PerturbationBounds {
  double mp_pose_trans = 0.0;   // m, platform pose estimate offset
  double mp_pose_rot = 0.0;     // rad
  double hand_eye_trans = 0.0;  // m, camera mount estimate offset
  double hand_eye_rot = 0.0;    // rad
  double exit_point = 0.0;      // m per exit point
  double anchor_point = 0.0;    // m per anchor point
  NoiseSpec feature_noise;      // measurement noise on the observation
};

/// One concrete set of estimated-model offsets. Translations add in the
/// frame the perturbed quantity is expressed in; rotation offsets are about
/// axes of that same frame, so they compose on the left.
struct PerturbationDraw {
  Vec3 mp_translation = Vec3::Zero();
  Rotation mp_rotation = Rotation::Identity();
  Vec3 hand_eye_translation = Vec3::Zero();
  Rotation hand_eye_rotation = Rotation::Identity();
  // Default-constructed Eigen vectors are uninitialized, so the arrays are
  // zeroed explicitly.
  std::array<Vec3, kNumCables> exit_offsets = zero_offsets();
  std::array<Vec3, kNumCables> anchor_offsets = zero_offsets();

  bool is_zero() const;

  static std::array<Vec3, kNumCables> zero_offsets() {
    std::array<Vec3, kNumCables> a;
    a.fill(Vec3::Zero());
    return a;
  }
};

enum class SampleMode { interior, boundary };

/// Draw offsets with uniformly random axes; magnitudes are uniform in
/// [0, bound] in interior mode and pinned to the bound in boundary mode.
/// The rng consumption count does not depend on the bounds, so draws from
/// nested bounds under a shared seed are componentwise contractions of each
/// other.
PerturbationDraw sample_perturbation(const PerturbationBounds& bounds,
                                     Rng& rng, SampleMode mode);

/// Apply a draw to the true model, producing what the controller believes.
EstimatedModel apply_perturbation(const RobotDescription& true_robot,
                                  const Pose& true_pose,
                                  const PerturbationDraw& draw);

/// Closed-loop stability criterion Pi = L_s Ad^-1 A^+ Â Âd L̂s^-1 built from
/// the true-side and estimated-side control matrices. Equals the identity
/// when the estimates are exact.
Mat6 stability_matrix(const ControlMatrices& true_matrices,
                      const ControlMatrices& est_matrices);

/// Quadratic-form positive definiteness: all eigenvalues of the symmetric
/// part exceed the threshold.
bool is_positive_definite(const Mat6& M, double threshold = 1e-9);

struct CswParams {
  int interior_samples = 64;
  int boundary_samples = 16;
  std::uint64_t seed = 1;
};

/// Monte-Carlo verdict on the control stability workspace membership of one
/// pose: Pi must be positive definite for every sampled draw. The feature
/// state is pinned to the goal configuration observed from the evaluated
/// pose (relative rotation identity, depth and center from the desired
/// object pose). A draw where Pi is undefined yields false.
bool csw_verdict(const RobotDescription& robot, const Pose& platform_pose,
                 const Pose& desired_object_pose,
                 const PerturbationBounds& bounds, const CswParams& params);

/// Regular position grid with an enumerated orientation set.
struct GridSpec {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  double z_min = 0.0, z_max = 0.0;
  int nx = 1, ny = 1, nz = 1;
  std::vector<Rotation> orientations{Rotation::Identity()};

  int cell_count() const {
    return nx * ny * nz * static_cast<int>(orientations.size());
  }
};

struct WorkspaceCell {
  int ix = 0, iy = 0, iz = 0;
  int orientation_id = 0;
  Vec3 position = Vec3::Zero();
  bool sfw = false;
  bool csw = false;
  bool fc = false;
};

struct WorkspaceCounts {
  long cells_total = 0;
  long sfw = 0, csw = 0, fc = 0;
  long positions_total = 0;
  // Positions where every orientation in the set passes.
  long sfw_positions = 0, csw_positions = 0, fc_positions = 0;
};

struct WorkspaceGrid {
  GridSpec spec;
  std::vector<WorkspaceCell> cells;  // ordered by (ix, iy, iz, orientation)
  WorkspaceCounts counts;
};

struct WorkspaceParams {
  PerturbationBounds bounds;
  CswParams csw;
  Pose desired_object_pose;
  int workers = 0;  // 0 = hardware concurrency
};

/// Evaluate SFW, CSW and their intersection on the grid. Each cell uses a
/// sub-seed derived from its linear index, so the result is independent of
/// the worker count.
WorkspaceGrid compute_workspaces(const RobotDescription& robot,
                                 const GridSpec& grid,
                                 const WorkspaceParams& params);

}  // namespace cablevs
