#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ddmr/agent_state.hpp"
#include "ddmr/approximator.hpp"
#include "ddmr/controllers.hpp"
#include "ddmr/dynamics.hpp"
#include "ddmr/trajectories.hpp"

namespace ddmr {

using Mat99 = Eigen::Matrix<double, 9, 9>;

/// Packs robot + error information into the 16-dim observation. theta is
/// passed through unwrapped.
AgentState assemble_state(const RobotState& robot,
                          const TrackingErrorState& err,
                          const Eigen::Vector3d& pddot_d);

/// r = sech(E^T He E + u^T Hu u) with E = [e | e_int | e_dot]. Always in
/// (0, 1]; u is the clipped torque actually applied to the plant.
double reward(const AgentState& s, const WheelTorques& u_clipped,
              const Mat99& He, const Eigen::Matrix2d& Hu);

struct Transition {
  AgentState s;
  Eigen::Vector2d a = Eigen::Vector2d::Zero();  // unclipped action (N*m)
  double r = 0.0;
  AgentState s_next;
  bool done = false;  // true only for error-threshold termination
};

/// Bounded FIFO with uniform random sampling (with replacement).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return data_[i]; }

  std::vector<std::size_t> sample_indices(std::size_t n,
                                          std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t write_ = 0;
  std::vector<Transition> data_;
};

struct TrainerConfig {
  double gamma = 0.97;
  double eta = 0.02;
  int policy_delay = 2;
  int batch_size = 128;
  double explore_sigma = 0.5;   // exploration noise stddev (N*m)
  double target_sigma = 0.25;   // target-policy smoothing noise stddev (N*m)
  double target_clip = 0.5;     // clip bound on the smoothing noise (N*m)
  double critic_lr = 2e-3;
  double actor_lr = 1e-3;
  int warmup_steps = 1000;        // no updates at all before this step
  int actor_warmup_steps = 1500;  // policy/target updates start here
  double actor_grad_clip = 5.0;   // L2 cap on the DPG estimate
  std::size_t buffer_capacity = 50000;
  double control_dt = 0.01;  // s, action period
  double plant_dt = 0.001;   // s, integrator period
  double max_track_error = 1.0;  // m, episode cutoff on planar error
  double max_episode_len = 5.0;  // s
  int episodes = 11;
  Mat99 He = default_He();
  Eigen::Matrix2d Hu = default_Hu();
  std::vector<int> critic_layers = {18, 64, 64, 1};
  Vec16 obs_scale = default_obs_scale();
  double act_scale = 3.0;
  double start_pos_sigma = 0.05;      // m, episode start perturbation
  double start_heading_sigma = 0.05;  // rad
  double z_clamp = 10.0;  // keeps tanh strictly inside (-1, 1) in doubles

  static Mat99 default_He();
  static Eigen::Matrix2d default_Hu();
  static Vec16 default_obs_scale();

  int substeps() const;
  /// Checks ranges and verifies He is PSD and Hu is PD by eigenvalues.
  void validate() const;
};

struct TwinCritics {
  MlpParams q1;
  MlpParams q2;
};

struct TargetNets {
  MlpParams q1;
  MlpParams q2;
  PolicyParams pi;
};

/// Adam moments for one network.
struct AdamState {
  std::vector<Eigen::MatrixXd> mW, vW;
  std::vector<Eigen::VectorXd> mb, vb;
  long t = 0;

  static AdamState like(const MlpParams& p);
  /// One descent step in place.
  void apply(MlpParams& p, const MlpGradients& g, double lr);
};

struct AdamVec8 {
  Vec8 m = Vec8::Zero();
  Vec8 v = Vec8::Zero();
  long t = 0;

  /// One descent step in place (negate the gradient for ascent).
  void apply(Vec8& params, const Vec8& grad, double lr);
};

/// Critic input: [s ./ obs_scale ; a / act_scale], one column per sample.
Eigen::MatrixXd critic_inputs(const TrainerConfig& cfg,
                              const std::vector<const Transition*>& batch,
                              bool next_state, const Eigen::MatrixXd& actions);

/// Bellman targets with clipped target-policy smoothing:
/// y = r + gamma * (1 - done) * min(Q1', Q2')(s', mu'(s') + clipped noise).
Eigen::VectorXd critic_target(const std::vector<const Transition*>& batch,
                              const TargetNets& targets,
                              const ConstraintBox& box, double eps, double R,
                              double W, const TrainerConfig& cfg,
                              std::mt19937_64& rng);

/// One Adam step per critic on the mean squared Bellman error; returns the
/// mean of the two critics' losses. Throws DivergenceError on non-finite
/// loss.
double critic_update(const std::vector<const Transition*>& batch,
                     const Eigen::VectorXd& y, TwinCritics& critics,
                     AdamState& adam1, AdamState& adam2,
                     const TrainerConfig& cfg);

/// DPG estimate: mean over the batch of J_pi(s)^T * grad_a Q1(s, mu(s)).
Vec8 actor_gradient(const std::vector<const Transition*>& batch,
                    const MlpParams& critic1, const PolicyParams& pi,
                    const ConstraintBox& box, double eps, double R, double W,
                    const TrainerConfig& cfg);

/// One ascent step on the policy: clipped DPG gradient through Adam, with
/// the z-parameters held inside the trust region.
PolicyParams actor_update(const std::vector<const Transition*>& batch,
                          const MlpParams& critic1, const PolicyParams& pi,
                          const ConstraintBox& box, double eps, double R,
                          double W, const TrainerConfig& cfg, AdamVec8& adam);

/// Polyak update of both target critics and the target policy.
void soft_update(const TwinCritics& live, const PolicyParams& pi_live,
                 TargetNets& targets, double eta);

PolicyParams polyak_mix(const PolicyParams& live, const PolicyParams& target,
                        double eta);

enum class Termination { kTimeLimit, kErrorThreshold, kDiverged };
const char* to_string(Termination t);

struct Env {
  PlantParams plant;
  TrajectorySpec trajectory;
};

/// Steps one training episode at the control period, with the plant
/// integrated at the (finer) physics period under zero-order-hold torque.
class Episode {
 public:
  /// Start posture is the trajectory start plus Gaussian perturbation drawn
  /// from rng; velocity matches the reference.
  Episode(const Env& env, const TrainerConfig& cfg, std::mt19937_64& rng);

  const AgentState& observation() const { return obs_; }
  double time() const { return t_; }
  bool finished() const { return finished_; }
  Termination reason() const { return reason_; }
  const RobotState& robot() const { return robot_; }

  struct StepResult {
    double reward = 0.0;
    bool terminal = false;  // done flag to store with the transition
    WheelTorques applied;
  };

  /// Applies the (unclipped) action: clips, integrates, advances the error
  /// state, recomputes the observation.
  StepResult apply(const Eigen::Vector2d& action_unclipped);

 private:
  void refresh_observation();

  Env env_;
  TrainerConfig cfg_;
  RobotState robot_;
  TrackingErrorState err_;
  AgentState obs_;
  double t_ = 0.0;
  int steps_ = 0;
  bool finished_ = false;
  Termination reason_ = Termination::kTimeLimit;
};

struct EpisodeResult {
  std::vector<Transition> transitions;
  double cumulative_reward = 0.0;
  Termination reason = Termination::kTimeLimit;
};

/// Rolls one full episode under a fixed policy (optionally with exploration
/// noise); used by tests and evaluation, not by train() itself.
EpisodeResult run_episode(const Env& env, const PolicyParams& pi,
                          const ConstraintBox& box, double eps,
                          const TrainerConfig& cfg, bool explore,
                          std::uint64_t seed);

struct StepLogRow {
  double t = 0.0;
  int episode = 0;
  double reward = 0.0;
  double loss = 0.0;
  Vec8 pi = Vec8::Zero();
};

struct EpisodeSummary {
  int episode = 0;
  int steps = 0;
  double cumulative_reward = 0.0;
  double mean_loss = 0.0;
  Termination reason = Termination::kTimeLimit;
  PhysicalParams learned;
  double alpha = 0.0;
  double beta = 0.0;
};

struct TrainResult {
  PolicyParams pi;
  TwinCritics critics;
  std::vector<StepLogRow> step_log;
  std::vector<EpisodeSummary> episodes;
};

/// The full training loop: per-step critic updates after warmup, delayed
/// policy/target updates, deterministic for a given seed.
TrainResult train(const Env& env, const ConstraintBox& box, double eps,
                  const TrainerConfig& cfg, std::uint64_t seed);

}  // namespace ddmr
