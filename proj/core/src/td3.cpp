#include "ddmr/td3.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ddmr {

namespace {

// Numerically stable sech that never overflows; clamped away from underflow
// so the reward stays strictly positive.
double sech_positive(double q) {
  const double e = std::exp(-std::abs(q));
  const double s = 2.0 * e / (1.0 + e * e);
  return std::max(s, std::numeric_limits<double>::min());
}

}  // namespace

AgentState assemble_state(const RobotState& robot,
                          const TrackingErrorState& err,
                          const Eigen::Vector3d& pddot_d) {
  AgentState s;
  s.e = err.e;
  s.e_int = err.e_int;
  s.e_dot = err.e_dot;
  s.chassis_rates = robot.posture_rate();
  s.pddot_d = pddot_d;
  s.theta = robot.theta;
  if (!s.pack().allFinite()) {
    throw ValidationError("assemble_state: non-finite input");
  }
  return s;
}

double reward(const AgentState& s, const WheelTorques& u_clipped,
              const Mat99& He, const Eigen::Matrix2d& Hu) {
  Eigen::Matrix<double, 9, 1> E;
  E << s.e, s.e_int, s.e_dot;
  const Eigen::Vector2d u = u_clipped.as_vector();
  const double q = E.dot(He * E) + u.dot(Hu * u);
  return sech_positive(q);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ValidationError("ReplayBuffer: capacity must be > 0");
  data_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[write_] = std::move(t);
  }
  write_ = (write_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(
    std::size_t n, std::mt19937_64& rng) const {
  if (data_.empty()) throw ValidationError("ReplayBuffer: sample from empty");
  std::uniform_int_distribution<std::size_t> dist(0, data_.size() - 1);
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = dist(rng);
  return out;
}

Mat99 TrainerConfig::default_He() {
  Mat99 he = Mat99::Zero();
  he.diagonal() << 200.0, 200.0, 80.0, 2.0, 2.0, 0.8, 20.0, 20.0, 8.0;
  return he;
}

Eigen::Matrix2d TrainerConfig::default_Hu() {
  return 5e-3 * Eigen::Matrix2d::Identity();
}

Vec16 TrainerConfig::default_obs_scale() {
  Vec16 s;
  s << 0.3, 0.3, 0.3,        // e
      2.0, 2.0, 2.0,         // e_int
      0.5, 0.5, 0.5,         // e_dot
      3.0, 3.0, 3.0,         // chassis rates
      5.0, 5.0, 5.0,         // pddot_d
      3.2;                   // theta
  return s;
}

int TrainerConfig::substeps() const {
  const double ratio = control_dt / plant_dt;
  const int n = int(std::lround(ratio));
  if (n < 1 || std::abs(ratio - double(n)) > 1e-9) {
    throw ValidationError("TrainerConfig: control_dt must be a multiple of plant_dt");
  }
  return n;
}

void TrainerConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("TrainerConfig: gamma in (0,1)");
  if (!(eta > 0.0 && eta <= 1.0)) throw ValidationError("TrainerConfig: eta in (0,1]");
  if (policy_delay < 1) throw ValidationError("TrainerConfig: policy_delay >= 1");
  if (batch_size < 1) throw ValidationError("TrainerConfig: batch_size >= 1");
  if (!(explore_sigma >= 0.0) || !(target_sigma >= 0.0) || !(target_clip >= 0.0)) {
    throw ValidationError("TrainerConfig: noise parameters must be >= 0");
  }
  if (!(critic_lr > 0.0) || !(actor_lr > 0.0)) {
    throw ValidationError("TrainerConfig: learning rates must be > 0");
  }
  if (warmup_steps < 0) throw ValidationError("TrainerConfig: warmup_steps >= 0");
  if (actor_warmup_steps < warmup_steps) {
    throw ValidationError("TrainerConfig: actor_warmup_steps >= warmup_steps");
  }
  if (!(actor_grad_clip > 0.0)) {
    throw ValidationError("TrainerConfig: actor_grad_clip > 0");
  }
  if (buffer_capacity == 0) throw ValidationError("TrainerConfig: buffer_capacity > 0");
  if (!(plant_dt > 0.0) || plant_dt > 0.01) {
    throw ValidationError("TrainerConfig: plant_dt in (0, 0.01]");
  }
  (void)substeps();
  if (!(max_track_error > 0.0)) throw ValidationError("TrainerConfig: max_track_error > 0");
  if (!(max_episode_len > 0.0)) throw ValidationError("TrainerConfig: max_episode_len > 0");
  if (episodes < 0) throw ValidationError("TrainerConfig: episodes >= 0");
  if (critic_layers.size() < 2 || critic_layers.front() != 18 ||
      critic_layers.back() != 1) {
    throw ValidationError("TrainerConfig: critic layers must run 18 -> ... -> 1");
  }
  if (!(act_scale > 0.0) || (obs_scale.array() <= 0.0).any()) {
    throw ValidationError("TrainerConfig: scales must be > 0");
  }
  if (!(start_pos_sigma >= 0.0) || !(start_heading_sigma >= 0.0)) {
    throw ValidationError("TrainerConfig: start perturbation sigmas >= 0");
  }
  if (!(z_clamp > 0.0)) throw ValidationError("TrainerConfig: z_clamp > 0");

  Eigen::SelfAdjointEigenSolver<Mat99> es_he(He);
  if (es_he.eigenvalues().minCoeff() < -1e-12) {
    throw ValidationError("TrainerConfig: He must be positive semi-definite");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es_hu(Hu);
  if (!(es_hu.eigenvalues().minCoeff() > 0.0)) {
    throw ValidationError("TrainerConfig: Hu must be positive definite");
  }
}

AdamState AdamState::like(const MlpParams& p) {
  AdamState a;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    a.mW.push_back(Eigen::MatrixXd::Zero(p.weights[l].rows(), p.weights[l].cols()));
    a.vW.push_back(Eigen::MatrixXd::Zero(p.weights[l].rows(), p.weights[l].cols()));
    a.mb.push_back(Eigen::VectorXd::Zero(p.biases[l].size()));
    a.vb.push_back(Eigen::VectorXd::Zero(p.biases[l].size()));
  }
  return a;
}

namespace {
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
}  // namespace

void AdamState::apply(MlpParams& p, const MlpGradients& g, double lr) {
  ++t;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, double(t));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, double(t));
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    mW[l] = kAdamBeta1 * mW[l] + (1.0 - kAdamBeta1) * g.dweights[l];
    vW[l] = kAdamBeta2 * vW[l].array() +
            (1.0 - kAdamBeta2) * g.dweights[l].array().square();
    p.weights[l].array() -=
        lr * (mW[l].array() / bc1) / ((vW[l].array() / bc2).sqrt() + kAdamEps);

    mb[l] = kAdamBeta1 * mb[l] + (1.0 - kAdamBeta1) * g.dbiases[l];
    vb[l] = kAdamBeta2 * vb[l].array() +
            (1.0 - kAdamBeta2) * g.dbiases[l].array().square();
    p.biases[l].array() -=
        lr * (mb[l].array() / bc1) / ((vb[l].array() / bc2).sqrt() + kAdamEps);
  }
}

void AdamVec8::apply(Vec8& params, const Vec8& grad, double lr) {
  ++t;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, double(t));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, double(t));
  m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * grad;
  v = kAdamBeta2 * v.array() + (1.0 - kAdamBeta2) * grad.array().square();
  params.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + kAdamEps);
}

Eigen::MatrixXd critic_inputs(const TrainerConfig& cfg,
                              const std::vector<const Transition*>& batch,
                              bool next_state,
                              const Eigen::MatrixXd& actions) {
  const int n = int(batch.size());
  Eigen::MatrixXd X(18, n);
  for (int i = 0; i < n; ++i) {
    const AgentState& s = next_state ? batch[i]->s_next : batch[i]->s;
    X.block<16, 1>(0, i) = s.pack().cwiseQuotient(cfg.obs_scale);
    X.block<2, 1>(16, i) = actions.col(i) / cfg.act_scale;
  }
  return X;
}

Eigen::VectorXd critic_target(const std::vector<const Transition*>& batch,
                              const TargetNets& targets,
                              const ConstraintBox& box, double eps, double R,
                              double W, const TrainerConfig& cfg,
                              std::mt19937_64& rng) {
  const int n = int(batch.size());
  std::normal_distribution<double> noise(0.0, cfg.target_sigma);
  Eigen::MatrixXd actions(2, n);
  for (int i = 0; i < n; ++i) {
    const WheelTorques a = gctc_action(batch[i]->s_next, targets.pi, box, eps, R, W);
    const double n1 = std::clamp(noise(rng), -cfg.target_clip, cfg.target_clip);
    const double n2 = std::clamp(noise(rng), -cfg.target_clip, cfg.target_clip);
    actions.col(i) = Eigen::Vector2d(a.tauR + n1, a.tauL + n2);
  }
  const Eigen::MatrixXd X = critic_inputs(cfg, batch, true, actions);
  const Eigen::RowVectorXd q1 = mlp_forward_batch(targets.q1, X);
  const Eigen::RowVectorXd q2 = mlp_forward_batch(targets.q2, X);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double bootstrap = batch[i]->done ? 0.0 : std::min(q1[i], q2[i]);
    y[i] = batch[i]->r + cfg.gamma * (batch[i]->done ? 0.0 : 1.0) * bootstrap;
  }
  return y;
}

double critic_update(const std::vector<const Transition*>& batch,
                     const Eigen::VectorXd& y, TwinCritics& critics,
                     AdamState& adam1, AdamState& adam2,
                     const TrainerConfig& cfg) {
  const int n = int(batch.size());
  Eigen::MatrixXd actions(2, n);
  for (int i = 0; i < n; ++i) actions.col(i) = batch[i]->a;
  const Eigen::MatrixXd X = critic_inputs(cfg, batch, false, actions);

  double loss_sum = 0.0;
  MlpParams* nets[2] = {&critics.q1, &critics.q2};
  AdamState* adams[2] = {&adam1, &adam2};
  for (int k = 0; k < 2; ++k) {
    const Eigen::RowVectorXd q = mlp_forward_batch(*nets[k], X);
    const Eigen::RowVectorXd residual = q - y.transpose();
    loss_sum += residual.squaredNorm() / double(n);
    const Eigen::RowVectorXd upstream = 2.0 / double(n) * residual;
    const MlpGradients g = mlp_backprop(*nets[k], X, upstream);
    adams[k]->apply(*nets[k], g, cfg.critic_lr);
  }
  const double loss = loss_sum / 2.0;
  if (!std::isfinite(loss)) {
    throw DivergenceError("critic_update: non-finite Bellman loss");
  }
  return loss;
}

Vec8 actor_gradient(const std::vector<const Transition*>& batch,
                    const MlpParams& critic1, const PolicyParams& pi,
                    const ConstraintBox& box, double eps, double R, double W,
                    const TrainerConfig& cfg) {
  const int n = int(batch.size());
  Eigen::MatrixXd actions(2, n);
  for (int i = 0; i < n; ++i) {
    const WheelTorques a = gctc_action(batch[i]->s, pi, box, eps, R, W);
    actions.col(i) = a.as_vector();
  }
  const Eigen::MatrixXd X = critic_inputs(cfg, batch, false, actions);
  const MlpGradients g =
      mlp_backprop(critic1, X, Eigen::RowVectorXd::Ones(n));
  Vec8 grad = Vec8::Zero();
  for (int i = 0; i < n; ++i) {
    // Chain through the input scaling back to raw torques.
    const Eigen::Vector2d dq_da = g.dinputs.block<2, 1>(16, i) / cfg.act_scale;
    const Mat28 J = gctc_jacobian(batch[i]->s, pi, box, eps, R, W);
    grad += J.transpose() * dq_da;
  }
  grad /= double(n);
  if (!grad.allFinite()) {
    throw DivergenceError("actor_gradient: non-finite gradient");
  }
  return grad;
}

PolicyParams actor_update(const std::vector<const Transition*>& batch,
                          const MlpParams& critic1, const PolicyParams& pi,
                          const ConstraintBox& box, double eps, double R,
                          double W, const TrainerConfig& cfg, AdamVec8& adam) {
  Vec8 grad = actor_gradient(batch, critic1, pi, box, eps, R, W, cfg);
  const double norm = grad.norm();
  if (norm > cfg.actor_grad_clip) {
    grad *= cfg.actor_grad_clip / norm;
  }
  Vec8 packed = pi.pack();
  adam.apply(packed, (-grad).eval(), cfg.actor_lr);  // ascent
  packed.head<6>() =
      packed.head<6>().cwiseMax(-cfg.z_clamp).cwiseMin(cfg.z_clamp);
  return PolicyParams::unpack(packed);
}

PolicyParams polyak_mix(const PolicyParams& live, const PolicyParams& target,
                        double eta) {
  return PolicyParams::unpack(eta * live.pack() + (1.0 - eta) * target.pack());
}

void soft_update(const TwinCritics& live, const PolicyParams& pi_live,
                 TargetNets& targets, double eta) {
  targets.q1 = polyak_mix(live.q1, targets.q1, eta);
  targets.q2 = polyak_mix(live.q2, targets.q2, eta);
  targets.pi = polyak_mix(pi_live, targets.pi, eta);
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::kTimeLimit:
      return "time-limit";
    case Termination::kErrorThreshold:
      return "error-threshold";
    case Termination::kDiverged:
      return "diverged";
  }
  return "unknown";
}

Episode::Episode(const Env& env, const TrainerConfig& cfg,
                 std::mt19937_64& rng)
    : env_(env), cfg_(cfg) {
  env_.plant.validate();
  validate(env_.trajectory);
  const TrajectorySample ref = sample(env_.trajectory, 0.0);
  std::normal_distribution<double> pos(0.0, cfg.start_pos_sigma);
  std::normal_distribution<double> ang(0.0, cfg.start_heading_sigma);
  Eigen::Vector3d posture = ref.p;
  posture[0] += cfg.start_pos_sigma > 0.0 ? pos(rng) : 0.0;
  posture[1] += cfg.start_pos_sigma > 0.0 ? pos(rng) : 0.0;
  posture[2] += cfg.start_heading_sigma > 0.0 ? ang(rng) : 0.0;
  robot_ = consistent_state(posture, ref.v, ref.omega,
                            Eigen::Vector2d::Zero(), env_.plant);
  err_ = TrackingErrorState{};
  err_.e = posture_error(ref.p, robot_.posture());
  err_.e_dot = ref.pdot - robot_.posture_rate();
  refresh_observation();
}

void Episode::refresh_observation() {
  const TrajectorySample ref = sample(env_.trajectory, t_);
  obs_ = assemble_state(robot_, err_, ref.pddot);
}

Episode::StepResult Episode::apply(const Eigen::Vector2d& action_unclipped) {
  if (finished_) throw ValidationError("Episode: apply after termination");
  StepResult out;
  out.applied = clip_torques({action_unclipped[0], action_unclipped[1]},
                             env_.plant.tau_max);

  const int nsub = cfg_.substeps();
  for (int k = 0; k < nsub; ++k) {
    robot_ = step(robot_, out.applied, cfg_.plant_dt, env_.plant);
  }
  ++steps_;
  t_ = steps_ * cfg_.control_dt;

  const TrajectorySample ref = sample(env_.trajectory, t_);
  const Eigen::Vector3d e = posture_error(ref.p, robot_.posture());
  const Eigen::Vector3d e_dot = ref.pdot - robot_.posture_rate();
  err_ = integrate_error(err_, e, e_dot, cfg_.control_dt);
  refresh_observation();

  // The step's reward scores the error state the action produced.
  out.reward = reward(obs_, out.applied, cfg_.He, cfg_.Hu);

  if (e.head<2>().norm() > cfg_.max_track_error) {
    finished_ = true;
    reason_ = Termination::kErrorThreshold;
    out.terminal = true;
  } else if (t_ >= cfg_.max_episode_len - 1e-12) {
    finished_ = true;
    reason_ = Termination::kTimeLimit;
  }
  return out;
}

EpisodeResult run_episode(const Env& env, const PolicyParams& pi,
                          const ConstraintBox& box, double eps,
                          const TrainerConfig& cfg, bool explore,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, cfg.explore_sigma);
  Episode episode(env, cfg, rng);
  EpisodeResult result;
  while (!episode.finished()) {
    const AgentState s = episode.observation();
    const WheelTorques mu = gctc_action(s, pi, box, eps, env.plant.R, env.plant.W);
    Eigen::Vector2d a = mu.as_vector();
    if (explore && cfg.explore_sigma > 0.0) {
      a[0] += noise(rng);
      a[1] += noise(rng);
    }
    const Episode::StepResult res = episode.apply(a);
    result.transitions.push_back(
        {s, a, res.reward, episode.observation(), res.terminal});
    result.cumulative_reward += res.reward;
  }
  result.reason = episode.reason();
  return result;
}

TrainResult train(const Env& env, const ConstraintBox& box, double eps,
                  const TrainerConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  box.validate();
  env.plant.validate();

  std::mt19937_64 rng(seed);
  TrainResult result;
  result.critics.q1 = mlp_init(rng(), cfg.critic_layers);
  result.critics.q2 = mlp_init(rng(), cfg.critic_layers);
  result.pi = PolicyParams{};  // z = 0 (box centers), alpha = beta = 1
  TargetNets targets{result.critics.q1, result.critics.q2, result.pi};

  ReplayBuffer buffer(cfg.buffer_capacity);
  AdamState adam_q1 = AdamState::like(result.critics.q1);
  AdamState adam_q2 = AdamState::like(result.critics.q2);
  AdamVec8 adam_pi;

  std::normal_distribution<double> explore(0.0, cfg.explore_sigma);
  long global_step = 0;
  long critic_updates = 0;

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    Episode episode(env, cfg, rng);
    double cumulative = 0.0;
    double loss_sum = 0.0;
    int loss_count = 0;
    int ep_steps = 0;
    try {
      while (!episode.finished()) {
        const AgentState s = episode.observation();
        const WheelTorques mu =
            gctc_action(s, result.pi, box, eps, env.plant.R, env.plant.W);
        Eigen::Vector2d a = mu.as_vector();
        if (cfg.explore_sigma > 0.0) {
          a[0] += explore(rng);
          a[1] += explore(rng);
        }
        const Episode::StepResult res = episode.apply(a);
        buffer.push({s, a, res.reward, episode.observation(), res.terminal});
        cumulative += res.reward;
        ++global_step;
        ++ep_steps;

        double loss = 0.0;
        if (global_step >= cfg.warmup_steps &&
            buffer.size() >= std::size_t(cfg.batch_size)) {
          const std::vector<std::size_t> idx =
              buffer.sample_indices(cfg.batch_size, rng);
          std::vector<const Transition*> batch(idx.size());
          for (std::size_t i = 0; i < idx.size(); ++i) batch[i] = &buffer.at(idx[i]);

          const Eigen::VectorXd y =
              critic_target(batch, targets, box, eps, env.plant.R, env.plant.W,
                            cfg, rng);
          loss = critic_update(batch, y, result.critics, adam_q1, adam_q2, cfg);
          loss_sum += loss;
          ++loss_count;
          ++critic_updates;

          if (critic_updates % cfg.policy_delay == 0 &&
              global_step >= cfg.actor_warmup_steps) {
            result.pi = actor_update(batch, result.critics.q1, result.pi, box,
                                     eps, env.plant.R, env.plant.W, cfg,
                                     adam_pi);

            const PhysicalParams learned = constrain_params(result.pi, box);
            const Eigen::Vector4d sg = learned.sigma.as_vector();
            for (int i = 0; i < 4; ++i) {
              if (!(sg[i] > box.sigma_center[i] - box.sigma_radius[i] &&
                    sg[i] < box.sigma_center[i] + box.sigma_radius[i])) {
                throw DivergenceError("train: sigma left the constraint box");
              }
            }
            if (!(learned.cV > box.cV_center - box.cV_radius &&
                  learned.cV < box.cV_center + box.cV_radius &&
                  learned.cD > box.cD_center - box.cD_radius &&
                  learned.cD < box.cD_center + box.cD_radius)) {
              throw DivergenceError("train: friction left the constraint box");
            }

            soft_update(result.critics, result.pi, targets, cfg.eta);
          }
        }
        result.step_log.push_back(
            {episode.time(), ep, res.reward, loss, result.pi.pack()});
      }
    } catch (const DivergenceError& e) {
      throw DivergenceError("episode " + std::to_string(ep) + ": " + e.what());
    }

    EpisodeSummary summary;
    summary.episode = ep;
    summary.steps = ep_steps;
    summary.cumulative_reward = cumulative;
    summary.mean_loss = loss_count > 0 ? loss_sum / loss_count : 0.0;
    summary.reason = episode.reason();
    summary.learned = constrain_params(result.pi, box);
    summary.alpha = result.pi.alpha;
    summary.beta = result.pi.beta;
    result.episodes.push_back(summary);
  }
  return result;
}

}  // namespace ddmr
