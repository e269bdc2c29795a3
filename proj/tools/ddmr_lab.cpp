// Experiment harness CLI: train the gray-box controller, evaluate and
// compare controllers on the test suite, or run raw simulations.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ddmr/harness.hpp"

namespace fs = std::filesystem;
using namespace ddmr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitValidation = 3;
constexpr int kExitDivergence = 4;

void emit_error(const std::string& type, const std::string& message) {
  const nlohmann::json j{{"error", {{"type", type}, {"message", message}}}};
  std::cerr << j.dump() << std::endl;
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

ExperimentConfig resolve_config(const CommonArgs& args) {
  ExperimentConfig cfg =
      args.config_path.empty() ? default_config() : load_config(args.config_path);
  cfg.validate();
  return cfg;
}

fs::path resolve_out_dir(const CommonArgs& args, const ExperimentConfig& cfg) {
  if (!args.out_dir.empty()) return args.out_dir;
  if (const char* env = std::getenv("DDMRLAB_OUT"); env && *env) return env;
  return cfg.output_dir;
}

TrajectorySpec pick_trajectory(const ExperimentConfig& cfg,
                               const std::string& name) {
  if (name == "train") return cfg.trajectories.train;
  if (name == "sine") return cfg.trajectories.tests[0];
  if (name == "circle") return cfg.trajectories.tests[1];
  if (name == "square") return cfg.trajectories.tests[2];
  throw ValidationError("unknown trajectory '" + name +
                        "' (expected train|sine|circle|square)");
}

ControllerKind pick_controller(const std::string& name) {
  if (name == "kinematic") return ControllerKind::kKinematic;
  if (name == "ctc") return ControllerKind::kExactCtc;
  if (name == "gctc") return ControllerKind::kGctc;
  if (name == "none") return ControllerKind::kOpenLoop;
  throw ValidationError("unknown controller '" + name +
                        "' (expected kinematic|ctc|gctc|none)");
}

int cmd_train(const CommonArgs& args) {
  const ExperimentConfig cfg = resolve_config(args);
  const std::uint64_t seed = args.seed.value_or(cfg.seeds.front());
  const fs::path out =
      resolve_out_dir(args, cfg) / ("train_seed" + std::to_string(seed));
  const TrainArtifacts art = run_train(cfg, seed, out);
  std::cout << "trained " << art.result.episodes.size() << " episodes"
            << " (seed " << seed << ")\n";
  for (const EpisodeSummary& e : art.result.episodes) {
    std::cout << "  episode " << e.episode << ": reward "
              << format_double(e.cumulative_reward) << ", steps " << e.steps
              << ", " << to_string(e.reason) << "\n";
  }
  std::cout << "wrote " << art.log_csv.string() << "\n"
            << "wrote " << art.summary_json.string() << "\n"
            << "wrote " << art.policy_json.string() << "\n"
            << "wrote " << art.critics_json.string() << "\n";
  return kExitOk;
}

int cmd_evaluate(const CommonArgs& args, const std::string& controller,
                 const std::string& trajectory,
                 const std::string& checkpoint) {
  const ExperimentConfig cfg = resolve_config(args);
  const ControllerKind kind = pick_controller(controller);
  if (kind == ControllerKind::kOpenLoop) {
    throw ValidationError("evaluate: use `simulate` for open-loop runs");
  }
  std::optional<PolicyParams> pi;
  if (kind == ControllerKind::kGctc) {
    if (checkpoint.empty()) {
      throw ValidationError("evaluate: --checkpoint required for gctc");
    }
    pi = load_policy(checkpoint);
  }

  std::vector<std::string> names;
  if (trajectory == "all") {
    names = {"sine", "circle", "square"};
  } else {
    names = {trajectory};
  }

  const fs::path out =
      resolve_out_dir(args, cfg) / ("evaluate_" + controller);
  fs::create_directories(out);
  for (const std::string& name : names) {
    const TrajectorySpec traj = pick_trajectory(cfg, name);
    const std::vector<TraceRow> trace =
        evaluate_rollout(cfg, kind, traj, pi ? &*pi : nullptr);
    RunMetrics m = metrics(trace);
    m.termination = m.duration + 1e-9 >= cfg.evaluation.duration
                        ? "time-limit"
                        : "diverged";
    const fs::path trace_path = out / ("trace_" + name + ".csv");
    const fs::path metrics_path = out / ("metrics_" + name + ".json");
    write_trace_csv(trace_path, trace);
    write_metrics_json(metrics_path, m);
    std::cout << name << ": rms_pos_err " << format_double(m.rms_pos_err)
              << " m, max " << format_double(m.max_pos_err) << " m ("
              << m.termination << ")\n";
    std::cout << "wrote " << trace_path.string() << "\n";
    std::cout << "wrote " << metrics_path.string() << "\n";
  }
  return kExitOk;
}

int cmd_compare(const CommonArgs& args, const std::string& checkpoint,
                bool parallel) {
  ExperimentConfig cfg = resolve_config(args);
  if (args.seed) cfg.seeds = {*args.seed};
  std::optional<PolicyParams> pi;
  if (!checkpoint.empty()) pi = load_policy(checkpoint);
  const CompareResult res = run_compare(cfg, pi, parallel);
  const fs::path out = resolve_out_dir(args, cfg);
  fs::create_directories(out);
  write_compare_json(out / "compare.json", res);
  const std::string table = compare_table_text(res);
  std::ofstream table_file(out / "compare.txt");
  table_file << table;
  std::cout << table;
  std::cout << "wrote " << (out / "compare.json").string() << "\n"
            << "wrote " << (out / "compare.txt").string() << "\n";
  return kExitOk;
}

int cmd_simulate(const CommonArgs& args, const std::string& controller,
                 const std::string& trajectory, double duration, double tau_r,
                 double tau_l, const std::string& checkpoint) {
  ExperimentConfig cfg = resolve_config(args);
  if (duration > 0.0) cfg.evaluation.duration = duration;
  const TrajectorySpec traj = pick_trajectory(cfg, trajectory);
  const ControllerKind kind = pick_controller(controller);

  std::vector<TraceRow> trace;
  if (kind == ControllerKind::kOpenLoop) {
    RolloutOptions opt;
    opt.duration = cfg.evaluation.duration;
    opt.control_dt = cfg.evaluation.control_dt;
    opt.plant_dt = cfg.evaluation.plant_dt;
    opt.He = cfg.trainer.He;
    opt.Hu = cfg.trainer.Hu;
    trace = rollout_open_loop(cfg.plant, reference_from_spec(traj),
                              {tau_r, tau_l}, opt);
  } else {
    std::optional<PolicyParams> pi;
    if (kind == ControllerKind::kGctc) {
      if (checkpoint.empty()) {
        throw ValidationError("simulate: --checkpoint required for gctc");
      }
      pi = load_policy(checkpoint);
    }
    trace = evaluate_rollout(cfg, kind, traj, pi ? &*pi : nullptr);
  }

  const fs::path out = resolve_out_dir(args, cfg);
  fs::create_directories(out);
  const fs::path trace_path =
      out / ("simulate_" + controller + "_" + trajectory + ".csv");
  write_trace_csv(trace_path, trace);
  std::cout << "wrote " << trace_path.string() << "\n";
  return kExitOk;
}

int cmd_dump_config(const CommonArgs& args, const std::string& path) {
  const ExperimentConfig cfg = resolve_config(args);
  if (path.empty() || path == "-") {
    std::cout << serialize_config(cfg);
  } else {
    save_config(cfg, path);
    std::cout << "wrote " << path << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differential-drive tracking-control laboratory"};
  app.require_subcommand(1);
  app.fallthrough();  // accept --config/--out/--seed after the subcommand

  CommonArgs common;
  app.add_option("--config", common.config_path,
                 "experiment config JSON (built-in defaults if omitted)");
  app.add_option("--out", common.out_dir,
                 "output directory (overrides DDMRLAB_OUT and the config)");
  std::uint64_t seed_value = 0;
  CLI::Option* seed_opt =
      app.add_option("--seed", seed_value, "seed override (single run)");

  CLI::App* train = app.add_subcommand("train", "train the gray-box policy");

  std::string controller = "ctc";
  std::string trajectory = "all";
  std::string checkpoint;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "roll out one controller, write CSV + metrics");
  evaluate->add_option("--controller", controller, "kinematic|ctc|gctc");
  evaluate->add_option("--trajectory", trajectory, "train|sine|circle|square|all");
  evaluate->add_option("--checkpoint", checkpoint, "policy.json (for gctc)");

  std::string cmp_checkpoint;
  bool cmp_parallel = false;
  CLI::App* compare = app.add_subcommand(
      "compare", "metrics table for all controllers on the test suite");
  compare->add_option("--checkpoint", cmp_checkpoint,
                      "policy.json; skips per-seed training when given");
  compare->add_flag("--parallel", cmp_parallel,
                    "fan seeds out across threads (same results)");

  std::string sim_controller = "none";
  std::string sim_trajectory = "train";
  std::string sim_checkpoint;
  double sim_duration = 0.0;
  double tau_r = 0.0, tau_l = 0.0;
  CLI::App* simulate =
      app.add_subcommand("simulate", "open-loop or fixed-controller rollout");
  simulate->add_option("--controller", sim_controller,
                       "none|kinematic|ctc|gctc");
  simulate->add_option("--trajectory", sim_trajectory,
                       "train|sine|circle|square");
  simulate->add_option("--duration", sim_duration, "seconds (config default)");
  simulate->add_option("--tau-r", tau_r, "right torque for open loop (N*m)");
  simulate->add_option("--tau-l", tau_l, "left torque for open loop (N*m)");
  simulate->add_option("--checkpoint", sim_checkpoint, "policy.json (for gctc)");

  std::string dump_path;
  CLI::App* dump = app.add_subcommand("dump-config", "write the config JSON");
  dump->add_option("--path", dump_path, "target file ('-' for stdout)");

  CLI11_PARSE(app, argc, argv);
  if (seed_opt->count() > 0) common.seed = seed_value;

  try {
    if (train->parsed()) return cmd_train(common);
    if (evaluate->parsed()) {
      return cmd_evaluate(common, controller, trajectory, checkpoint);
    }
    if (compare->parsed()) {
      return cmd_compare(common, cmp_checkpoint, cmp_parallel);
    }
    if (simulate->parsed()) {
      return cmd_simulate(common, sim_controller, sim_trajectory, sim_duration,
                          tau_r, tau_l, sim_checkpoint);
    }
    if (dump->parsed()) return cmd_dump_config(common, dump_path);
  } catch (const ConfigError& e) {
    emit_error("config", e.what());
    return kExitConfig;
  } catch (const DivergenceError& e) {
    emit_error("divergence", e.what());
    return kExitDivergence;
  } catch (const ValidationError& e) {
    emit_error("validation", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return kExitError;
  }
  emit_error("usage", "no subcommand given");
  return kExitError;
}
