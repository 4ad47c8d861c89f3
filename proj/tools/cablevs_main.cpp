#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "cablevs/config.hpp"
#include "cablevs/sim.hpp"

namespace fs = std::filesystem;
using namespace cablevs;

namespace {

int worker_count() {
  if (const char* env = std::getenv("CABLEVS_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::string config_stem(const std::string& path) {
  return fs::path(path).stem().string();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

void format_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  out += buf;
}

struct RunSummary {
  std::string id;
  std::string controller;
  std::string perturbation;
  bool converged = false;
  int iterations = 0;
  double duration = 0.0;
  double final_error = 0.0;
  bool metrics_valid = false;
  DeviationMetrics metrics;

  std::string line() const {
    std::string s = "run id=" + id + " controller=" + controller +
                    " perturbation=" + perturbation +
                    " converged=" + (converged ? "1" : "0") +
                    " iterations=" + std::to_string(iterations) + " duration=";
    format_number(s, duration);
    if (metrics_valid) {
      s += " img_max_px=";
      format_number(s, metrics.image_max_px);
      s += " img_mean_px=";
      format_number(s, metrics.image_mean_px);
      s += " space_max_m=";
      format_number(s, metrics.space_max_m);
      s += " space_mean_m=";
      format_number(s, metrics.space_mean_m);
    }
    s += " final_error=";
    format_number(s, final_error);
    return s;
  }
};

RunSummary summarize(const std::string& id, const ExperimentConfig& config,
                     const SimLog& log) {
  RunSummary summary;
  summary.id = id;
  summary.controller =
      config.controller == ControllerMode::classic ? "classic" : "tracking";
  summary.perturbation = config.perturbation_name;
  summary.converged = log.converged;
  summary.iterations = log.iterations;
  summary.duration = log.duration;
  summary.final_error = log.final_error_norm;
  try {
    summary.metrics = deviation_metrics(log);
    summary.metrics_valid = true;
  } catch (const Error&) {
    summary.metrics_valid = false;
  }
  return summary;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& out_dir) {
  ExperimentConfig config = load_experiment_file(config_path);
  if (seed) config.seed = *seed;

  const SimLog log = run(config);
  fs::create_directories(out_dir);
  const fs::path log_path =
      fs::path(out_dir) / (config_stem(config_path) + "_log.csv");
  write_file(log_path, log.to_csv());

  const RunSummary summary = summarize(config_stem(config_path), config, log);
  std::printf("%s\n", summary.line().c_str());
  std::printf("log written to %s\n", log_path.string().c_str());
  return log.converged ? 0 : 2;
}

struct CompareCell {
  char group = '?';
  std::string controller;
  std::string set_name;
  int rep = 0;
  RunSummary summary;
  bool failed = false;
  std::string failure;
  std::string log_csv;
};

int cmd_compare(const std::string& config_path, int reps,
                std::optional<std::uint64_t> seed, const std::string& out_dir) {
  const ExperimentConfig base = load_experiment_file(config_path);
  const std::uint64_t base_seed = seed ? *seed : base.seed;

  struct Task {
    char classic_group;
    char tracking_group;
    std::string set_name;
  };
  const std::vector<Task> sets = {
      {'A', 'B', "none"}, {'C', 'D', "V1"}, {'E', 'F', "V2"}};

  std::vector<CompareCell> cells(sets.size() * reps * 2);

  // One task per (set, rep): the classic run and its tracking counterpart
  // share a seed.
  const int n_tasks = static_cast<int>(sets.size()) * reps;
  std::atomic<int> next{0};
  auto work = [&]() {
    while (true) {
      const int task = next.fetch_add(1);
      if (task >= n_tasks) break;
      const int set_idx = task / reps;
      const int rep = task % reps;
      const Task& spec = sets[set_idx];
      const std::uint64_t run_seed = Rng::mix(base_seed, task);

      for (int mode = 0; mode < 2; ++mode) {
        CompareCell& cell = cells[(set_idx * reps + rep) * 2 + mode];
        cell.group = mode == 0 ? spec.classic_group : spec.tracking_group;
        cell.controller = mode == 0 ? "classic" : "tracking";
        cell.set_name = spec.set_name;
        cell.rep = rep;

        ExperimentConfig config = base;
        config.controller =
            mode == 0 ? ControllerMode::classic : ControllerMode::tracking;
        config.gain_mode =
            mode == 0 ? GainMode::adaptive : GainMode::constant;
        config.perturbation_name = spec.set_name;
        config.seed = run_seed;
        try {
          config.perturbation = load_perturbation_set(spec.set_name);
          const SimLog log = run(config);
          cell.summary = summarize(std::string(1, cell.group) + "_" +
                                       spec.set_name + "_rep" +
                                       std::to_string(rep),
                                   config, log);
          cell.failed = !log.converged;
          if (cell.failed) cell.failure = "did not converge";
          cell.log_csv = log.to_csv();
        } catch (const Error& err) {
          cell.failed = true;
          cell.failure = err.what();
        }
      }
    }
  };

  const int workers = std::min(worker_count(), n_tasks);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();

  fs::create_directories(out_dir);
  for (const CompareCell& cell : cells) {
    if (cell.log_csv.empty()) continue;
    const fs::path path =
        fs::path(out_dir) / ("compare_" + cell.summary.id + "_log.csv");
    write_file(path, cell.log_csv);
  }

  // Aggregate per group: mean of the per-run metrics, like the bar graph.
  std::string table =
      "group,controller,perturbation,reps,converged,img_max_px,img_mean_px,"
      "space_max_m,space_mean_m\n";
  std::printf(
      "group controller perturbation reps ok  img_max  img_mean space_max "
      "space_mean\n");
  for (size_t set_idx = 0; set_idx < sets.size(); ++set_idx) {
    for (int mode = 0; mode < 2; ++mode) {
      const char group =
          mode == 0 ? sets[set_idx].classic_group : sets[set_idx].tracking_group;
      double img_max = 0, img_mean = 0, sp_max = 0, sp_mean = 0;
      int ok = 0;
      for (int rep = 0; rep < reps; ++rep) {
        const CompareCell& cell = cells[(set_idx * reps + rep) * 2 + mode];
        if (cell.failed || !cell.summary.metrics_valid) continue;
        ++ok;
        img_max += cell.summary.metrics.image_max_px;
        img_mean += cell.summary.metrics.image_mean_px;
        sp_max += cell.summary.metrics.space_max_m;
        sp_mean += cell.summary.metrics.space_mean_m;
      }
      if (ok > 0) {
        img_max /= ok;
        img_mean /= ok;
        sp_max /= ok;
        sp_mean /= ok;
      }
      const std::string controller = mode == 0 ? "classic" : "tracking";
      char buf[256];
      std::snprintf(buf, sizeof(buf), "%c,%s,%s,%d,%d,%.6g,%.6g,%.6g,%.6g\n",
                    group, controller.c_str(), sets[set_idx].set_name.c_str(),
                    reps, ok, img_max, img_mean, sp_max, sp_mean);
      table += buf;
      std::printf("  %c   %-9s %-11s %4d %3d %8.2f %8.2f   %7.4f   %7.4f\n",
                  group, controller.c_str(), sets[set_idx].set_name.c_str(),
                  reps, ok, img_max, img_mean, sp_max, sp_mean);
    }
  }
  for (const CompareCell& cell : cells) {
    if (cell.failed) {
      std::printf("note: %c/%s rep %d: %s\n", cell.group,
                  cell.set_name.c_str(), cell.rep,
                  cell.failure.empty() ? "failed" : cell.failure.c_str());
    }
  }

  const fs::path table_path = fs::path(out_dir) / "compare_summary.csv";
  write_file(table_path, table);
  std::printf("summary written to %s\n", table_path.string().c_str());
  return 0;
}

int cmd_workspace(const std::string& config_path,
                  std::optional<std::uint64_t> seed,
                  const std::string& out_dir) {
  WorkspaceConfig config = load_workspace_file(config_path);
  if (seed) config.params.csw.seed = *seed;
  if (config.params.workers <= 0) config.params.workers = worker_count();

  const WorkspaceGrid grid = compute_workspaces(config.robot, config.grid,
                                                config.params);

  std::string csv = "x,y,z,orientation_id,sfw,csw,fc\n";
  csv.reserve(grid.cells.size() * 48 + 64);
  for (const WorkspaceCell& cell : grid.cells) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%d,%d,%d,%d\n",
                  cell.position.x(), cell.position.y(), cell.position.z(),
                  cell.orientation_id, cell.sfw ? 1 : 0, cell.csw ? 1 : 0,
                  cell.fc ? 1 : 0);
    csv += buf;
  }
  {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "# csw is an approximate (sampled) verdict: %d interior + "
                  "%d boundary draws per cell, seed %llu\n",
                  config.params.csw.interior_samples,
                  config.params.csw.boundary_samples,
                  static_cast<unsigned long long>(config.params.csw.seed));
    csv += buf;
  }

  fs::create_directories(out_dir);
  const fs::path grid_path =
      fs::path(out_dir) / (config_stem(config_path) + "_grid.csv");
  write_file(grid_path, csv);

  const WorkspaceCounts& counts = grid.counts;
  std::printf("cells=%ld sfw=%ld csw=%ld fc=%ld (positions=%ld sfw=%ld "
              "csw=%ld fc=%ld)\n",
              counts.cells_total, counts.sfw, counts.csw, counts.fc,
              counts.positions_total, counts.sfw_positions,
              counts.csw_positions, counts.fc_positions);
  std::printf("csw verdicts are sampled (%d interior + %d boundary draws "
              "per cell)\n",
              config.params.csw.interior_samples,
              config.params.csw.boundary_samples);
  std::printf("grid written to %s\n", grid_path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinematic simulation and workspace analysis for a suspended "
               "cable robot under 2.5D visual servoing"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  int reps = 1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "configuration file")->required();
    cmd->add_option("--out-dir", out_dir, "output directory");
    cmd->add_option("--seed", seed, "override the config seed");
  };

  CLI::App* run_cmd =
      app.add_subcommand("run", "run one experiment and write its log");
  add_common(run_cmd);

  CLI::App* compare_cmd = app.add_subcommand(
      "compare", "classic vs tracking across perturbation sets");
  add_common(compare_cmd);
  compare_cmd->add_option("--reps", reps, "repetitions per cell")
      ->check(CLI::PositiveNumber);

  CLI::App* workspace_cmd =
      app.add_subcommand("workspace", "evaluate workspace grids");
  add_common(workspace_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(config_path, seed, out_dir);
    if (compare_cmd->parsed())
      return cmd_compare(config_path, reps, seed, out_dir);
    if (workspace_cmd->parsed())
      return cmd_workspace(config_path, seed, out_dir);
  } catch (const ConfigError& err) {
    std::fprintf(stderr, "config error: %s\n", err.what());
    return 1;
  } catch (const Error& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 1;
}
