#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ddmr/controllers.hpp"
#include "ddmr/dynamics.hpp"
#include "ddmr/td3.hpp"
#include "ddmr/trajectories.hpp"

namespace ddmr {

struct KinematicControllerConfig {
  double k1 = 2.0;
  double k2 = 2.0;
  double k3 = 2.0;
  PidGains wheel_pid;

  void validate() const;
};

struct CtcConfig {
  double alpha = 2.45;  // pole parameter, translation channels
  double beta = 2.45;   // pole parameter, heading channel
  double eps = 0.01;

  void validate() const;
};

struct GctcConfig {
  ConstraintBox box;
  double eps = 0.01;

  void validate() const;
};

struct EvaluationConfig {
  double duration = 12.0;  // s; long enough for one full square lap
  double control_dt = 0.01;
  double plant_dt = 0.001;

  void validate() const;
};

struct ExperimentConfig {
  PlantParams plant;
  TrajectorySuite trajectories = default_suite();
  KinematicControllerConfig kinematic;
  CtcConfig ctc;
  GctcConfig gctc;
  TrainerConfig trainer;
  EvaluationConfig evaluation;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string output_dir = "out";

  void validate() const;
};

/// The shipped defaults (also written by `ddmr_lab dump-config`).
ExperimentConfig default_config();

/// Strict JSON round trip: unknown keys are a hard error.
ExperimentConfig parse_config(const std::string& json_text);
std::string serialize_config(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& cfg,
                 const std::filesystem::path& path);

/// One recorded sample of a rollout.
struct TraceRow {
  double t = 0.0;
  double x = 0.0, y = 0.0, theta = 0.0;
  double x_d = 0.0, y_d = 0.0, theta_d = 0.0;
  double tau_R = 0.0, tau_L = 0.0;
  double r = 0.0;
};

struct RunMetrics {
  double rms_pos_err = 0.0;      // m
  double max_pos_err = 0.0;      // m
  double rms_heading_err = 0.0;  // rad, wrapped
  double control_effort = 0.0;   // integral of |u|^2 dt
  std::string termination = "time-limit";
  double duration = 0.0;  // s
};

/// Trapezoidal effort integral, RMS/max position error, wrapped-heading RMS.
RunMetrics metrics(const std::vector<TraceRow>& trace);

enum class ControllerKind { kKinematic, kExactCtc, kGctc, kOpenLoop };
const char* to_string(ControllerKind kind);

/// Time-indexed reference; adapts TrajectorySpec but also admits custom
/// references in tests.
using ReferencePath = std::function<TrajectorySample(double)>;
ReferencePath reference_from_spec(const TrajectorySpec& spec);

struct RolloutOptions {
  double duration = 12.0;
  double control_dt = 0.01;
  double plant_dt = 0.001;
  Mat99 He = TrainerConfig::default_He();
  Eigen::Matrix2d Hu = TrainerConfig::default_Hu();
  /// Optional start perturbation added to the reference posture.
  Eigen::Vector3d start_offset = Eigen::Vector3d::Zero();
  double start_speed_offset = 0.0;
};

/// Hierarchical kinematic controller: posture law at the control period,
/// wheel-rate PIDs at the plant period.
std::vector<TraceRow> rollout_kinematic(const PlantParams& plant,
                                        const ReferencePath& ref,
                                        const KinematicControllerConfig& ctl,
                                        const RolloutOptions& opt);

/// Computed-torque rollout with fixed physical parameters and gains
/// (used both for the exact-parameter CTC and the trained gray-box policy).
std::vector<TraceRow> rollout_ctc(const PlantParams& plant,
                                  const ReferencePath& ref,
                                  const PhysicalParams& phys,
                                  const GainSet& gains,
                                  const RolloutOptions& opt);

/// Constant-torque rollout (open loop); the reference is only recorded.
std::vector<TraceRow> rollout_open_loop(const PlantParams& plant,
                                        const ReferencePath& ref,
                                        const WheelTorques& tau,
                                        const RolloutOptions& opt);

/// Evaluates one controller on one trajectory with the config's evaluation
/// settings. `pi` is required only for ControllerKind::kGctc.
std::vector<TraceRow> evaluate_rollout(const ExperimentConfig& cfg,
                                       ControllerKind kind,
                                       const TrajectorySpec& traj,
                                       const PolicyParams* pi = nullptr);

// ---- File outputs -----------------------------------------------------

std::string format_double(double v);

void write_trace_csv(const std::filesystem::path& path,
                     const std::vector<TraceRow>& trace);
void write_metrics_json(const std::filesystem::path& path,
                        const RunMetrics& m);
void write_train_log_csv(const std::filesystem::path& path,
                         const std::vector<StepLogRow>& log);
void write_train_summary_json(const std::filesystem::path& path,
                              const TrainResult& result, std::uint64_t seed);

void save_policy(const PolicyParams& pi, const std::filesystem::path& path);
PolicyParams load_policy(const std::filesystem::path& path);
void save_critics(const TwinCritics& critics,
                  const std::filesystem::path& path);
TwinCritics load_critics(const std::filesystem::path& path);

// ---- Orchestration ----------------------------------------------------

struct TrainArtifacts {
  TrainResult result;
  std::filesystem::path log_csv;
  std::filesystem::path summary_json;
  std::filesystem::path policy_json;
  std::filesystem::path critics_json;
};

/// Trains on the configured training trajectory and writes the log,
/// summary, and checkpoints under out_dir.
TrainArtifacts run_train(const ExperimentConfig& cfg, std::uint64_t seed,
                         const std::filesystem::path& out_dir);

struct CompareCell {
  std::string controller;
  std::string trajectory;
  RunMetrics metrics;
};

struct CompareResult {
  std::vector<std::uint64_t> seeds;
  // per_seed[i] holds 9 cells (3 controllers x 3 test trajectories).
  std::vector<std::vector<CompareCell>> per_seed;
  std::vector<CompareCell> median;  // per (controller, trajectory)
};

/// Evaluates kinematic / exact CTC / GCTC on the three test trajectories.
/// Without a checkpoint, trains the GCTC per seed; with one, the checkpoint
/// policy is used unchanged for every seed. Seeds run sequentially by
/// default; `parallel` fans them out across threads (each run is seed-scoped
/// and isolated, so the result is identical either way).
CompareResult run_compare(const ExperimentConfig& cfg,
                          const std::optional<PolicyParams>& checkpoint,
                          bool parallel = false);

void write_compare_json(const std::filesystem::path& path,
                        const CompareResult& result);
std::string compare_table_text(const CompareResult& result);

const char* trajectory_name(const TrajectorySpec& spec);

}  // namespace ddmr
