#include "cablevs/config.hpp"

#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace cablevs {

namespace {

constexpr double kDegree = 3.14159265358979323846 / 180.0;

struct Entry {
  std::string key;
  std::vector<double> numbers;
  std::string raw;  // value as written, for string-valued keys
  int line = 0;
  bool consumed = false;
};

struct ConfigFile {
  std::string path;
  std::vector<Entry> entries;

  Entry* find(const std::string& key) {
    Entry* found = nullptr;
    for (Entry& e : entries) {
      if (e.key == key) found = &e;  // last one wins
    }
    if (found) found->consumed = true;
    return found;
  }

  std::vector<Entry*> find_all(const std::string& key) {
    std::vector<Entry*> out;
    for (Entry& e : entries) {
      if (e.key == key) {
        e.consumed = true;
        out.push_back(&e);
      }
    }
    return out;
  }

  [[noreturn]] void fail(int line, const std::string& message) const {
    throw ConfigError(path, line, message);
  }
};

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

ConfigFile parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open file");

  ConfigFile file;
  file.path = path;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;

    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path, line_no, "expected 'key = value'");
    }

    Entry entry;
    entry.key = trim(line.substr(0, eq));
    entry.raw = trim(line.substr(eq + 1));
    entry.line = line_no;
    if (entry.key.empty()) throw ConfigError(path, line_no, "empty key");
    if (entry.raw.empty()) {
      throw ConfigError(path, line_no, "empty value for '" + entry.key + "'");
    }

    std::istringstream vs(entry.raw);
    std::string token;
    bool numeric = true;
    std::vector<double> numbers;
    while (vs >> token) {
      try {
        size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size()) {
          numeric = false;
          break;
        }
        numbers.push_back(v);
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (numeric) entry.numbers = std::move(numbers);
    file.entries.push_back(std::move(entry));
  }
  return file;
}

double get_scalar(ConfigFile& file, const std::string& key, double fallback) {
  Entry* e = file.find(key);
  if (!e) return fallback;
  if (e->numbers.size() != 1) {
    file.fail(e->line, "'" + key + "' expects one number");
  }
  return e->numbers[0];
}

Vec3 get_vec3(ConfigFile& file, const Entry& e) {
  if (e.numbers.size() != 3) {
    file.fail(e.line, "'" + e.key + "' expects three numbers");
  }
  return Vec3(e.numbers[0], e.numbers[1], e.numbers[2]);
}

/// Rotation from either `<prefix>_xyz_deg = rx ry rz` (intrinsic x-y-z Euler
/// angles, degrees) or `<prefix>_axis_angle = ax ay az angle_rad`; last
/// occurrence wins.
Rotation get_rotation(ConfigFile& file, const std::string& prefix,
                      const Rotation& fallback) {
  const std::string xyz_key = prefix + "_xyz_deg";
  const std::string aa_key = prefix + "_axis_angle";
  Entry* xyz = file.find(xyz_key);
  Entry* aa = file.find(aa_key);
  Entry* use = nullptr;
  if (xyz && aa) {
    use = xyz->line > aa->line ? xyz : aa;
  } else {
    use = xyz ? xyz : aa;
  }
  if (!use) return fallback;

  if (use == xyz) {
    if (use->numbers.size() != 3) {
      file.fail(use->line, "'" + xyz_key + "' expects three numbers");
    }
    return rotation_xyz(use->numbers[0] * kDegree, use->numbers[1] * kDegree,
                        use->numbers[2] * kDegree);
  }
  if (use->numbers.size() != 4) {
    file.fail(use->line, "'" + aa_key + "' expects axis (3) plus angle");
  }
  Vec3 axis(use->numbers[0], use->numbers[1], use->numbers[2]);
  const double n = axis.norm();
  if (n < 1e-12) file.fail(use->line, "'" + aa_key + "' axis is zero");
  return rodrigues(AxisAngle{axis / n, use->numbers[3]});
}

Pose get_pose(ConfigFile& file, const std::string& prefix, const Pose& fallback,
              bool* present = nullptr) {
  Entry* pos = file.find(prefix + "_position");
  const Rotation R = get_rotation(file, prefix + "_rotation", fallback.R);
  if (present) *present = pos != nullptr;
  if (!pos) return Pose(R, fallback.t);
  return Pose(R, get_vec3(file, *pos));
}

/// Angle that may be written in radians (`key`) or degrees (`key_deg`).
double get_angle(ConfigFile& file, const std::string& key, double fallback) {
  Entry* deg = file.find(key + "_deg");
  Entry* rad = file.find(key);
  Entry* use = nullptr;
  if (deg && rad) {
    use = deg->line > rad->line ? deg : rad;
  } else {
    use = deg ? deg : rad;
  }
  if (!use) return fallback;
  if (use->numbers.size() != 1) {
    file.fail(use->line, "'" + use->key + "' expects one number");
  }
  return use == deg ? use->numbers[0] * kDegree : use->numbers[0];
}

NoiseSpec get_noise(ConfigFile& file) {
  NoiseSpec noise;
  noise.translation_sigma = get_scalar(file, "noise_translation_sigma", 0.0);
  noise.rotation_sigma = get_angle(file, "noise_rotation_sigma", 0.0);
  noise.center_sigma = get_scalar(file, "noise_center_sigma", 0.0);
  if (noise.translation_sigma < 0.0 || noise.rotation_sigma < 0.0 ||
      noise.center_sigma < 0.0) {
    file.fail(0, "noise sigmas must be non-negative");
  }
  return noise;
}

CameraModel get_camera(ConfigFile& file) {
  CameraModel cam;
  cam.focal = get_scalar(file, "camera_focal", cam.focal);
  if (Entry* e = file.find("camera_principal_point")) {
    if (e->numbers.size() != 2) file.fail(e->line, "'camera_principal_point' expects two numbers");
    cam.principal_point = Vec2(e->numbers[0], e->numbers[1]);
  }
  if (Entry* e = file.find("camera_image_size")) {
    if (e->numbers.size() != 2) file.fail(e->line, "'camera_image_size' expects two numbers");
    cam.image_size = Vec2(e->numbers[0], e->numbers[1]);
  }
  if (cam.focal <= 0.0) file.fail(0, "camera_focal must be positive");
  return cam;
}

std::string resolve_relative(const std::string& config_path,
                             const std::string& reference) {
  namespace fs = std::filesystem;
  fs::path ref(reference);
  if (ref.is_absolute()) return reference;
  return (fs::path(config_path).parent_path() / ref).string();
}

RobotDescription load_robot(ConfigFile& file) {
  RobotDescription robot = make_default_robot();

  const auto exits = file.find_all("exit_point");
  const auto anchors = file.find_all("anchor_point");
  if (!exits.empty() || !anchors.empty()) {
    if (exits.size() != kNumCables) {
      file.fail(exits.empty() ? 0 : exits.back()->line,
                "expected exactly 8 'exit_point' entries, got " +
                    std::to_string(exits.size()));
    }
    if (anchors.size() != kNumCables) {
      file.fail(anchors.empty() ? 0 : anchors.back()->line,
                "expected exactly 8 'anchor_point' entries, got " +
                    std::to_string(anchors.size()));
    }
    for (int i = 0; i < kNumCables; ++i) {
      robot.exit_points[i] = get_vec3(file, *exits[i]);
      robot.anchor_points[i] = get_vec3(file, *anchors[i]);
    }
  }

  robot.tension_min = get_scalar(file, "tension_min", robot.tension_min);
  robot.tension_max = get_scalar(file, "tension_max", robot.tension_max);
  robot.platform_mass = get_scalar(file, "mass", robot.platform_mass);
  if (Entry* e = file.find("gravity")) robot.gravity = get_vec3(file, *e);
  if (Entry* e = file.find("camera_translation")) {
    robot.camera_mount.t = get_vec3(file, *e);
  }
  if (Entry* e = file.find("camera_rotation")) {
    if (e->numbers.size() != 4) {
      file.fail(e->line, "'camera_rotation' expects axis (3) plus angle");
    }
    Vec3 axis(e->numbers[0], e->numbers[1], e->numbers[2]);
    const double n = axis.norm();
    if (n < 1e-12) file.fail(e->line, "'camera_rotation' axis is zero");
    robot.camera_mount.R = rodrigues(AxisAngle{axis / n, e->numbers[3]});
  }

  try {
    robot.validate();
  } catch (const Error& err) {
    file.fail(0, err.what());
  }
  return robot;
}

RobotDescription get_robot_reference(ConfigFile& file) {
  Entry* ref = file.find("robot");
  if (!ref) return make_default_robot();
  return load_robot_file(resolve_relative(file.path, ref->raw));
}

PerturbationDraw get_perturbation(ConfigFile& file, std::string& name) {
  Entry* e = file.find("perturbation");
  name = e ? e->raw : "none";

  if (name != "custom") {
    try {
      return load_perturbation_set(name);
    } catch (const UnknownSet& err) {
      file.fail(e ? e->line : 0, err.what());
    }
  }

  PerturbationDraw draw;
  auto directional = [&](const std::string& key, Vec3* out_vec,
                         Rotation* out_rot) {
    Entry* entry = file.find(key);
    if (!entry) return;
    if (entry->numbers.size() != 4) {
      file.fail(entry->line, "'" + key + "' expects axis (3) plus magnitude");
    }
    Vec3 axis(entry->numbers[0], entry->numbers[1], entry->numbers[2]);
    const double n = axis.norm();
    if (n < 1e-12) file.fail(entry->line, "'" + key + "' axis is zero");
    axis /= n;
    if (out_vec) *out_vec = entry->numbers[3] * axis;
    if (out_rot) *out_rot = rodrigues(AxisAngle{axis, entry->numbers[3]});
  };

  directional("perturb_mp_translation", &draw.mp_translation, nullptr);
  directional("perturb_mp_rotation", nullptr, &draw.mp_rotation);
  directional("perturb_hand_eye_translation", &draw.hand_eye_translation,
              nullptr);
  directional("perturb_hand_eye_rotation", nullptr, &draw.hand_eye_rotation);

  const double point_offset = get_scalar(file, "perturb_point_offset", 0.0);
  if (point_offset < 0.0) file.fail(0, "perturb_point_offset must be >= 0");
  if (point_offset > 0.0) {
    const auto exit_dirs = point_offset_directions(0);
    const auto anchor_dirs = point_offset_directions(1);
    for (int i = 0; i < kNumCables; ++i) {
      draw.exit_offsets[i] = point_offset * exit_dirs[i];
      draw.anchor_offsets[i] = point_offset * anchor_dirs[i];
    }
  }
  return draw;
}

void check_unknown_keys(const ConfigFile& file) {
  for (const Entry& e : file.entries) {
    if (!e.consumed) {
      throw ConfigError(file.path, e.line, "unknown key '" + e.key + "'");
    }
  }
}

}  // namespace

RobotDescription load_robot_file(const std::string& path) {
  ConfigFile file = parse_file(path);
  RobotDescription robot = load_robot(file);
  check_unknown_keys(file);
  return robot;
}

ExperimentConfig load_experiment_file(const std::string& path) {
  ConfigFile file = parse_file(path);
  ExperimentConfig config = make_reference_experiment(ControllerMode::classic);

  config.robot = get_robot_reference(file);

  if (Entry* e = file.find("controller")) {
    if (e->raw == "classic") {
      config.controller = ControllerMode::classic;
    } else if (e->raw == "tracking") {
      config.controller = ControllerMode::tracking;
    } else {
      file.fail(e->line, "controller must be 'classic' or 'tracking'");
    }
  }
  config.gain_mode = config.controller == ControllerMode::classic
                         ? GainMode::adaptive
                         : GainMode::constant;
  if (Entry* e = file.find("gain_mode")) {
    if (e->raw == "adaptive") {
      config.gain_mode = GainMode::adaptive;
    } else if (e->raw == "constant") {
      config.gain_mode = GainMode::constant;
    } else {
      file.fail(e->line, "gain_mode must be 'adaptive' or 'constant'");
    }
  }

  config.gains.lambda0 = get_scalar(file, "lambda0", config.gains.lambda0);
  config.gains.lambda_inf =
      get_scalar(file, "lambda_inf", config.gains.lambda_inf);
  config.gains.slope0 = get_scalar(file, "lambda_slope", config.gains.slope0);
  config.constant_gain = get_scalar(file, "constant_gain", config.constant_gain);
  if (config.gains.lambda0 <= config.gains.lambda_inf ||
      config.gains.lambda_inf <= 0.0 || config.gains.slope0 <= 0.0) {
    file.fail(0, "gains must satisfy lambda0 > lambda_inf > 0, lambda_slope > 0");
  }

  config.initial_platform_pose = get_pose(file, "initial_platform",
                                          config.initial_platform_pose);
  config.initial_object_in_camera =
      get_pose(file, "object_in_camera", config.initial_object_in_camera);
  config.desired_object_pose =
      get_pose(file, "desired_object", config.desired_object_pose);

  config.noise = get_noise(file);
  config.camera = get_camera(file);

  config.seed = static_cast<std::uint64_t>(get_scalar(file, "seed", 1.0));
  config.perturbation = get_perturbation(file, config.perturbation_name);

  if (Entry* e = file.find("plan_velocity")) {
    if (e->numbers.size() != 6) {
      file.fail(e->line, "'plan_velocity' expects six numbers");
    }
    for (int i = 0; i < 6; ++i) config.plan_velocity[i] = e->numbers[i];
    if ((config.plan_velocity.array() <= 0.0).any()) {
      file.fail(e->line, "'plan_velocity' components must be positive");
    }
  }
  if (Entry* e = file.find("plan_t_full")) {
    if (e->numbers.size() != 1 || e->numbers[0] <= 0.0) {
      file.fail(e->line, "'plan_t_full' expects one positive number");
    }
    config.plan_t_full = e->numbers[0];
  }

  if (Entry* e = file.find("dt")) {
    if (e->numbers.size() != 1 || e->numbers[0] <= 0.0) {
      file.fail(e->line, "'dt' must be a positive number");
    }
    config.dt = e->numbers[0];
  }
  if (Entry* e = file.find("max_duration")) {
    if (e->numbers.size() != 1 || e->numbers[0] <= 0.0) {
      file.fail(e->line, "'max_duration' must be a positive number");
    }
    config.max_duration = e->numbers[0];
  }
  if (Entry* e = file.find("threshold")) {
    if (e->numbers.size() != 1 || e->numbers[0] <= 0.0) {
      file.fail(e->line, "'threshold' must be a positive number");
    }
    config.threshold = e->numbers[0];
  }
  config.actuator_time_constant =
      get_scalar(file, "actuator_time_constant", 0.0);
  if (config.actuator_time_constant < 0.0) {
    file.fail(0, "actuator_time_constant must be >= 0");
  }

  check_unknown_keys(file);
  return config;
}

WorkspaceConfig load_workspace_file(const std::string& path) {
  ConfigFile file = parse_file(path);
  WorkspaceConfig ws;

  ws.robot = get_robot_reference(file);

  auto axis = [&](const std::string& key, double* lo, double* hi, int* n) {
    Entry* e = file.find(key);
    if (!e) file.fail(0, "missing '" + key + "' (min max count)");
    if (e->numbers.size() != 3 || e->numbers[2] < 1.0) {
      file.fail(e->line, "'" + key + "' expects min max count(>=1)");
    }
    *lo = e->numbers[0];
    *hi = e->numbers[1];
    *n = static_cast<int>(e->numbers[2]);
  };
  axis("grid_x", &ws.grid.x_min, &ws.grid.x_max, &ws.grid.nx);
  axis("grid_y", &ws.grid.y_min, &ws.grid.y_max, &ws.grid.ny);
  axis("grid_z", &ws.grid.z_min, &ws.grid.z_max, &ws.grid.nz);

  ws.params.csw.seed = static_cast<std::uint64_t>(get_scalar(file, "seed", 1.0));
  ws.params.csw.interior_samples =
      static_cast<int>(get_scalar(file, "interior_samples", 64.0));
  ws.params.csw.boundary_samples =
      static_cast<int>(get_scalar(file, "boundary_samples", 16.0));
  if (ws.params.csw.interior_samples + ws.params.csw.boundary_samples < 1) {
    file.fail(0, "need at least one perturbation sample");
  }

  PerturbationBounds& bounds = ws.params.bounds;
  bounds.mp_pose_trans = get_scalar(file, "bounds_mp_translation", 0.0);
  bounds.mp_pose_rot = get_angle(file, "bounds_mp_rotation", 0.0);
  bounds.hand_eye_trans = get_scalar(file, "bounds_hand_eye_translation", 0.0);
  bounds.hand_eye_rot = get_angle(file, "bounds_hand_eye_rotation", 0.0);
  bounds.exit_point = get_scalar(file, "bounds_exit_point", 0.0);
  bounds.anchor_point = get_scalar(file, "bounds_anchor_point", 0.0);
  bounds.feature_noise = get_noise(file);
  if (bounds.mp_pose_trans < 0.0 || bounds.mp_pose_rot < 0.0 ||
      bounds.hand_eye_trans < 0.0 || bounds.hand_eye_rot < 0.0 ||
      bounds.exit_point < 0.0 || bounds.anchor_point < 0.0) {
    file.fail(0, "perturbation bounds must be non-negative");
  }

  // Canonical feature state for the stability criterion: the object seen
  // from a representative task distance (the reference task's initial
  // observation depth), not the near-field goal where the quadratic-form
  // test is maximally conservative.
  const Pose default_goal(rotation_xyz(-3.14159265358979323846, 0.0,
                                       -3.14159265358979323846),
                          Vec3(0.0, 0.0, 0.45));
  ws.params.desired_object_pose =
      get_pose(file, "desired_object", default_goal);

  const int orientation_count =
      static_cast<int>(get_scalar(file, "orientation_count", 0.0));
  const double orientation_max =
      get_angle(file, "orientation_max_angle", 0.0);
  if (orientation_count < 0) file.fail(0, "orientation_count must be >= 0");
  ws.grid.orientations.clear();
  ws.grid.orientations.push_back(Rotation::Identity());
  if (orientation_count > 0) {
    Rng rng(Rng::mix(ws.params.csw.seed, 0x0eu));
    for (int i = 0; i < orientation_count; ++i) {
      // Half the extra orientations probe the angular boundary.
      const double angle = (i % 2 == 0)
                               ? orientation_max
                               : orientation_max * rng.uniform();
      ws.grid.orientations.push_back(
          rodrigues(AxisAngle{rng.unit_vector(), angle}));
    }
  }

  ws.params.workers = static_cast<int>(get_scalar(file, "workers", 0.0));

  check_unknown_keys(file);
  return ws;
}

}  // namespace cablevs
