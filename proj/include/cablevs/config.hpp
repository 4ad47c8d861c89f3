#pragma once

#include <string>

#include "cablevs/sim.hpp"
#include "cablevs/stability.hpp"

namespace cablevs {

/// Robot description file: one `key = value` pair per line, `#` comments.
/// Keys: exit_point (x y z, eight times), anchor_point (x y z, eight times),
/// tension_min, tension_max, mass, gravity (x y z), camera_translation
/// (x y z), camera_rotation (axis_x axis_y axis_z angle_rad).
/// Units: meters, kilograms, newtons, radians.
RobotDescription load_robot_file(const std::string& path);

/// Experiment configuration file; `robot` references the robot file relative
/// to the config file's directory. See the README for the key list.
ExperimentConfig load_experiment_file(const std::string& path);

struct WorkspaceConfig {
  RobotDescription robot;
  GridSpec grid;
  WorkspaceParams params;
};

/// Workspace configuration file: robot reference, grid ranges, orientation
/// set, perturbation bounds, and sampling parameters.
WorkspaceConfig load_workspace_file(const std::string& path);

}  // namespace cablevs
