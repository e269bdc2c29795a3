#include "ddmr/harness.hpp"

#include <algorithm>
#include <charconv>
#include <future>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace ddmr {

namespace {

using nlohmann::json;

struct RolloutFrame {
  RobotState robot;
  TrackingErrorState err;
};

RolloutFrame init_frame(const PlantParams& plant, const ReferencePath& ref,
                        const RolloutOptions& opt) {
  const TrajectorySample r0 = ref(0.0);
  RolloutFrame f;
  f.robot = consistent_state(r0.p + opt.start_offset,
                             r0.v + opt.start_speed_offset, r0.omega,
                             Eigen::Vector2d::Zero(), plant);
  f.err.e = posture_error(r0.p, f.robot.posture());
  f.err.e_dot = r0.pdot - f.robot.posture_rate();
  return f;
}

void advance_error(RolloutFrame& f, const TrajectorySample& ref, double dt) {
  const Eigen::Vector3d e = posture_error(ref.p, f.robot.posture());
  const Eigen::Vector3d e_dot = ref.pdot - f.robot.posture_rate();
  f.err = integrate_error(f.err, e, e_dot, dt);
}

TraceRow make_row(double t, const RolloutFrame& f, const TrajectorySample& ref,
                  const WheelTorques& u, const RolloutOptions& opt) {
  TraceRow row;
  row.t = t;
  row.x = f.robot.x;
  row.y = f.robot.y;
  row.theta = f.robot.theta;
  row.x_d = ref.p[0];
  row.y_d = ref.p[1];
  row.theta_d = ref.p[2];
  row.tau_R = u.tauR;
  row.tau_L = u.tauL;
  row.r = reward(assemble_state(f.robot, f.err, ref.pddot), u, opt.He, opt.Hu);
  return row;
}

int control_steps(const RolloutOptions& opt) {
  return int(std::lround(opt.duration / opt.control_dt));
}

int substeps(const RolloutOptions& opt) {
  const double ratio = opt.control_dt / opt.plant_dt;
  const int n = int(std::lround(ratio));
  if (n < 1 || std::abs(ratio - double(n)) > 1e-9) {
    throw ValidationError("rollout: control_dt must be a multiple of plant_dt");
  }
  return n;
}

}  // namespace

ReferencePath reference_from_spec(const TrajectorySpec& spec) {
  validate(spec);
  return [spec](double t) { return sample(spec, t); };
}

std::vector<TraceRow> rollout_ctc(const PlantParams& plant,
                                  const ReferencePath& ref,
                                  const PhysicalParams& phys,
                                  const GainSet& gains,
                                  const RolloutOptions& opt) {
  plant.validate();
  const int n_ctrl = control_steps(opt);
  const int nsub = substeps(opt);
  RolloutFrame f = init_frame(plant, ref, opt);
  std::vector<TraceRow> rows;
  rows.reserve(n_ctrl + 1);
  WheelTorques u{0.0, 0.0};
  try {
    for (int k = 0; k < n_ctrl; ++k) {
      const double t = k * opt.control_dt;
      const TrajectorySample r = ref(t);
      u = clip_torques(ctc_torque(f.err, r.pddot, f.robot.theta,
                                  f.robot.posture_rate(), phys, gains, plant.R,
                                  plant.W),
                       plant.tau_max);
      rows.push_back(make_row(t, f, r, u, opt));
      for (int s = 0; s < nsub; ++s) {
        f.robot = step(f.robot, u, opt.plant_dt, plant);
      }
      advance_error(f, ref((k + 1) * opt.control_dt), opt.control_dt);
    }
    rows.push_back(make_row(n_ctrl * opt.control_dt, f,
                            ref(n_ctrl * opt.control_dt), u, opt));
  } catch (const DivergenceError&) {
    if (rows.empty()) throw;
    // Partial trace; metrics() reports the shortened duration.
  }
  return rows;
}

std::vector<TraceRow> rollout_kinematic(const PlantParams& plant,
                                        const ReferencePath& ref,
                                        const KinematicControllerConfig& ctl,
                                        const RolloutOptions& opt) {
  plant.validate();
  ctl.validate();
  const int n_ctrl = control_steps(opt);
  const int nsub = substeps(opt);
  RolloutFrame f = init_frame(plant, ref, opt);
  PidState pidR, pidL;
  std::vector<TraceRow> rows;
  rows.reserve(n_ctrl + 1);
  WheelTorques u{0.0, 0.0};
  try {
    for (int k = 0; k < n_ctrl; ++k) {
      const double t = k * opt.control_dt;
      const TrajectorySample r = ref(t);
      const Eigen::Vector3d e_body = body_frame_error(f.robot.posture(), r.p);
      const VelocityCommand cmd =
          kinematic_law(e_body, r.v, r.omega, ctl.k1, ctl.k2, ctl.k3);
      const auto [wRd, wLd] = wheel_setpoints(cmd.v, cmd.omega, plant.R, plant.W);
      bool recorded = false;
      for (int s = 0; s < nsub; ++s) {
        auto [tr, nextR] =
            pid_wheel_step(wRd, f.robot.omegaR, pidR, opt.plant_dt, ctl.wheel_pid);
        auto [tl, nextL] =
            pid_wheel_step(wLd, f.robot.omegaL, pidL, opt.plant_dt, ctl.wheel_pid);
        pidR = nextR;
        pidL = nextL;
        u = clip_torques({tr, tl}, plant.tau_max);
        if (!recorded) {
          rows.push_back(make_row(t, f, r, u, opt));
          recorded = true;
        }
        f.robot = step(f.robot, u, opt.plant_dt, plant);
      }
      advance_error(f, ref((k + 1) * opt.control_dt), opt.control_dt);
    }
    rows.push_back(make_row(n_ctrl * opt.control_dt, f,
                            ref(n_ctrl * opt.control_dt), u, opt));
  } catch (const DivergenceError&) {
    if (rows.empty()) throw;
  }
  return rows;
}

std::vector<TraceRow> rollout_open_loop(const PlantParams& plant,
                                        const ReferencePath& ref,
                                        const WheelTorques& tau,
                                        const RolloutOptions& opt) {
  plant.validate();
  const int n_ctrl = control_steps(opt);
  const int nsub = substeps(opt);
  RolloutFrame f = init_frame(plant, ref, opt);
  const WheelTorques u = clip_torques(tau, plant.tau_max);
  std::vector<TraceRow> rows;
  rows.reserve(n_ctrl + 1);
  try {
    for (int k = 0; k < n_ctrl; ++k) {
      const double t = k * opt.control_dt;
      rows.push_back(make_row(t, f, ref(t), u, opt));
      for (int s = 0; s < nsub; ++s) {
        f.robot = step(f.robot, u, opt.plant_dt, plant);
      }
      advance_error(f, ref((k + 1) * opt.control_dt), opt.control_dt);
    }
    rows.push_back(make_row(n_ctrl * opt.control_dt, f,
                            ref(n_ctrl * opt.control_dt), u, opt));
  } catch (const DivergenceError&) {
    if (rows.empty()) throw;
  }
  return rows;
}

std::vector<TraceRow> evaluate_rollout(const ExperimentConfig& cfg,
                                       ControllerKind kind,
                                       const TrajectorySpec& traj,
                                       const PolicyParams* pi) {
  RolloutOptions opt;
  opt.duration = cfg.evaluation.duration;
  opt.control_dt = cfg.evaluation.control_dt;
  opt.plant_dt = cfg.evaluation.plant_dt;
  opt.He = cfg.trainer.He;
  opt.Hu = cfg.trainer.Hu;
  const ReferencePath ref = reference_from_spec(traj);

  switch (kind) {
    case ControllerKind::kKinematic:
      return rollout_kinematic(cfg.plant, ref, cfg.kinematic, opt);
    case ControllerKind::kExactCtc: {
      PhysicalParams phys;
      phys.sigma = sigma_from_c(cfg.plant);
      phys.cV = cfg.plant.cV;
      phys.cD = cfg.plant.cD;
      const GainSet gains =
          gains_from_poles(cfg.ctc.alpha, cfg.ctc.beta, cfg.ctc.eps);
      return rollout_ctc(cfg.plant, ref, phys, gains, opt);
    }
    case ControllerKind::kGctc: {
      if (pi == nullptr) {
        throw ValidationError("evaluate: GCTC needs a policy checkpoint");
      }
      const PhysicalParams phys = constrain_params(*pi, cfg.gctc.box);
      const GainSet gains = gains_from_poles(pi->alpha, pi->beta, cfg.gctc.eps);
      return rollout_ctc(cfg.plant, ref, phys, gains, opt);
    }
    case ControllerKind::kOpenLoop:
      throw ValidationError("evaluate: open loop needs explicit torques");
  }
  throw ValidationError("evaluate: unknown controller");
}

RunMetrics metrics(const std::vector<TraceRow>& trace) {
  if (trace.empty()) throw ValidationError("metrics: empty trace");
  RunMetrics m;
  double pos_sq = 0.0;
  double heading_sq = 0.0;
  for (const TraceRow& row : trace) {
    const double dx = row.x_d - row.x;
    const double dy = row.y_d - row.y;
    const double p2 = dx * dx + dy * dy;
    pos_sq += p2;
    m.max_pos_err = std::max(m.max_pos_err, std::sqrt(p2));
    const double he = wrap_angle(row.theta_d - row.theta);
    heading_sq += he * he;
  }
  m.rms_pos_err = std::sqrt(pos_sq / double(trace.size()));
  m.rms_heading_err = std::sqrt(heading_sq / double(trace.size()));
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const double dt = trace[i].t - trace[i - 1].t;
    const double a = trace[i - 1].tau_R * trace[i - 1].tau_R +
                     trace[i - 1].tau_L * trace[i - 1].tau_L;
    const double b =
        trace[i].tau_R * trace[i].tau_R + trace[i].tau_L * trace[i].tau_L;
    m.control_effort += 0.5 * (a + b) * dt;
  }
  m.duration = trace.back().t - trace.front().t;
  return m;
}

const char* to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kKinematic:
      return "kinematic";
    case ControllerKind::kExactCtc:
      return "exact-ctc";
    case ControllerKind::kGctc:
      return "gctc";
    case ControllerKind::kOpenLoop:
      return "open-loop";
  }
  return "unknown";
}

const char* trajectory_name(const TrajectorySpec& spec) {
  return std::visit(
      [](const auto& s) -> const char* {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SinusoidSpec>) {
          return "sinusoid";
        } else if constexpr (std::is_same_v<T, CircleSpec>) {
          return "circle";
        } else {
          return "square";
        }
      },
      spec);
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_trace_csv(const std::filesystem::path& path,
                     const std::vector<TraceRow>& trace) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << "# ddmr.trace.v1\n";
  out << "t,x,y,theta,x_d,y_d,theta_d,tau_R,tau_L,r\n";
  for (const TraceRow& r : trace) {
    out << format_double(r.t) << ',' << format_double(r.x) << ','
        << format_double(r.y) << ',' << format_double(r.theta) << ','
        << format_double(r.x_d) << ',' << format_double(r.y_d) << ','
        << format_double(r.theta_d) << ',' << format_double(r.tau_R) << ','
        << format_double(r.tau_L) << ',' << format_double(r.r) << '\n';
  }
}

void write_metrics_json(const std::filesystem::path& path,
                        const RunMetrics& m) {
  const json j{{"schema", "ddmr.metrics.v1"},
               {"rms_pos_err", m.rms_pos_err},
               {"max_pos_err", m.max_pos_err},
               {"rms_heading_err", m.rms_heading_err},
               {"control_effort", m.control_effort},
               {"termination", m.termination},
               {"duration", m.duration}};
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

void write_train_log_csv(const std::filesystem::path& path,
                         const std::vector<StepLogRow>& log) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << "# ddmr.trainlog.v1\n";
  out << "t,episode,reward,loss,z1,z2,z3,z4,zV,zD,alpha,beta\n";
  for (const StepLogRow& r : log) {
    out << format_double(r.t) << ',' << r.episode << ','
        << format_double(r.reward) << ',' << format_double(r.loss);
    for (int i = 0; i < 8; ++i) out << ',' << format_double(r.pi[i]);
    out << '\n';
  }
}

namespace {

json physical_to_json(const PhysicalParams& p) {
  return json{{"sigma", {p.sigma.s1, p.sigma.s2, p.sigma.s3, p.sigma.s4}},
              {"cV", p.cV},
              {"cD", p.cD}};
}

}  // namespace

void write_train_summary_json(const std::filesystem::path& path,
                              const TrainResult& result, std::uint64_t seed) {
  json episodes = json::array();
  for (const EpisodeSummary& e : result.episodes) {
    json ej = physical_to_json(e.learned);
    ej["episode"] = e.episode;
    ej["steps"] = e.steps;
    ej["cumulative_reward"] = e.cumulative_reward;
    ej["mean_loss"] = e.mean_loss;
    ej["termination"] = to_string(e.reason);
    ej["alpha"] = e.alpha;
    ej["beta"] = e.beta;
    episodes.push_back(ej);
  }
  const json j{{"schema", "ddmr.trainsummary.v1"},
               {"seed", seed},
               {"episodes", episodes},
               {"final_policy",
                {{"z", {result.pi.z[0], result.pi.z[1], result.pi.z[2],
                        result.pi.z[3]}},
                 {"zV", result.pi.zV},
                 {"zD", result.pi.zD},
                 {"alpha", result.pi.alpha},
                 {"beta", result.pi.beta}}}};
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

void save_policy(const PolicyParams& pi, const std::filesystem::path& path) {
  const json j{{"schema", "ddmr.policy.v1"},
               {"z", {pi.z[0], pi.z[1], pi.z[2], pi.z[3]}},
               {"zV", pi.zV},
               {"zD", pi.zD},
               {"alpha", pi.alpha},
               {"beta", pi.beta}};
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

PolicyParams load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("policy: parse failure: ") + e.what());
  }
  if (j.value("schema", "") != "ddmr.policy.v1") {
    throw ConfigError("policy: unexpected schema tag");
  }
  PolicyParams pi;
  const auto z = j.at("z");
  if (!z.is_array() || z.size() != 4) throw ConfigError("policy: bad 'z'");
  for (int i = 0; i < 4; ++i) pi.z[i] = z.at(i).get<double>();
  pi.zV = j.at("zV").get<double>();
  pi.zD = j.at("zD").get<double>();
  pi.alpha = j.at("alpha").get<double>();
  pi.beta = j.at("beta").get<double>();
  if (!pi.pack().allFinite()) throw ConfigError("policy: non-finite entries");
  return pi;
}

namespace {

json mlp_to_json(const MlpParams& p) {
  json weights = json::array();
  json biases = json::array();
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    json w = json::array();
    for (int r = 0; r < p.weights[l].rows(); ++r) {
      for (int c = 0; c < p.weights[l].cols(); ++c) {
        w.push_back(p.weights[l](r, c));
      }
    }
    weights.push_back(w);
    json b = json::array();
    for (int r = 0; r < p.biases[l].size(); ++r) b.push_back(p.biases[l][r]);
    biases.push_back(b);
  }
  return json{{"layer_dims", p.layer_dims},
              {"weights", weights},
              {"biases", biases},
              {"hidden_activations", p.hidden_activations}};
}

MlpParams mlp_from_json(const json& j) {
  MlpParams p;
  p.layer_dims = j.at("layer_dims").get<std::vector<int>>();
  p.hidden_activations =
      j.at("hidden_activations").get<std::vector<std::string>>();
  const json& weights = j.at("weights");
  const json& biases = j.at("biases");
  if (!weights.is_array() || !biases.is_array() ||
      weights.size() + 1 != p.layer_dims.size() ||
      biases.size() + 1 != p.layer_dims.size()) {
    throw ConfigError("critics: layer count mismatch");
  }
  for (std::size_t l = 0; l + 1 < p.layer_dims.size(); ++l) {
    const int rows = p.layer_dims[l + 1];
    const int cols = p.layer_dims[l];
    const json& w = weights.at(l);
    if (!w.is_array() || int(w.size()) != rows * cols) {
      throw ConfigError("critics: weight size mismatch");
    }
    Eigen::MatrixXd wm(rows, cols);
    int i = 0;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) wm(r, c) = w.at(i++).get<double>();
    }
    const json& b = biases.at(l);
    if (!b.is_array() || int(b.size()) != rows) {
      throw ConfigError("critics: bias size mismatch");
    }
    Eigen::VectorXd bv(rows);
    for (int r = 0; r < rows; ++r) bv[r] = b.at(r).get<double>();
    p.weights.push_back(std::move(wm));
    p.biases.push_back(std::move(bv));
  }
  p.validate();
  return p;
}

}  // namespace

void save_critics(const TwinCritics& critics,
                  const std::filesystem::path& path) {
  const json j{{"schema", "ddmr.critics.v1"},
               {"q1", mlp_to_json(critics.q1)},
               {"q2", mlp_to_json(critics.q2)}};
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << j.dump() << '\n';
}

TwinCritics load_critics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("critics: parse failure: ") + e.what());
  }
  if (j.value("schema", "") != "ddmr.critics.v1") {
    throw ConfigError("critics: unexpected schema tag");
  }
  return {mlp_from_json(j.at("q1")), mlp_from_json(j.at("q2"))};
}

TrainArtifacts run_train(const ExperimentConfig& cfg, std::uint64_t seed,
                         const std::filesystem::path& out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  const Env env{cfg.plant, cfg.trajectories.train};
  TrainArtifacts art;
  art.result = train(env, cfg.gctc.box, cfg.gctc.eps, cfg.trainer, seed);
  art.log_csv = out_dir / "training_log.csv";
  art.summary_json = out_dir / "summary.json";
  art.policy_json = out_dir / "policy.json";
  art.critics_json = out_dir / "critics.json";
  write_train_log_csv(art.log_csv, art.result.step_log);
  write_train_summary_json(art.summary_json, art.result, seed);
  save_policy(art.result.pi, art.policy_json);
  save_critics(art.result.critics, art.critics_json);
  return art;
}

namespace {

RunMetrics metrics_with_termination(const std::vector<TraceRow>& trace,
                                    double expected_duration) {
  RunMetrics m = metrics(trace);
  m.termination =
      m.duration + 1e-9 >= expected_duration ? "time-limit" : "diverged";
  return m;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

CompareResult run_compare(const ExperimentConfig& cfg,
                          const std::optional<PolicyParams>& checkpoint,
                          bool parallel) {
  cfg.validate();
  CompareResult result;
  const ControllerKind kinds[3] = {ControllerKind::kKinematic,
                                   ControllerKind::kExactCtc,
                                   ControllerKind::kGctc};

  const std::vector<std::uint64_t> seeds =
      checkpoint.has_value() ? std::vector<std::uint64_t>{} : cfg.seeds;
  const int runs = checkpoint.has_value() ? 1 : int(seeds.size());

  auto run_one = [&](int run) {
    PolicyParams pi;
    if (checkpoint.has_value()) {
      pi = *checkpoint;
    } else {
      const Env env{cfg.plant, cfg.trajectories.train};
      pi = train(env, cfg.gctc.box, cfg.gctc.eps, cfg.trainer, seeds[run]).pi;
    }
    std::vector<CompareCell> cells;
    for (const ControllerKind kind : kinds) {
      for (const TrajectorySpec& traj : cfg.trajectories.tests) {
        const std::vector<TraceRow> trace =
            evaluate_rollout(cfg, kind, traj, &pi);
        CompareCell cell;
        cell.controller = to_string(kind);
        cell.trajectory = trajectory_name(traj);
        cell.metrics =
            metrics_with_termination(trace, cfg.evaluation.duration);
        cells.push_back(std::move(cell));
      }
    }
    return cells;
  };

  result.per_seed.resize(runs);
  if (parallel && runs > 1) {
    std::vector<std::future<std::vector<CompareCell>>> futures;
    futures.reserve(runs);
    for (int run = 0; run < runs; ++run) {
      futures.push_back(
          std::async(std::launch::async, [&, run] { return run_one(run); }));
    }
    for (int run = 0; run < runs; ++run) {
      result.per_seed[run] = futures[run].get();
    }
  } else {
    for (int run = 0; run < runs; ++run) {
      result.per_seed[run] = run_one(run);
    }
  }
  result.seeds = seeds;

  // Elementwise medians across runs for each (controller, trajectory) cell.
  const std::size_t n_cells = result.per_seed.front().size();
  for (std::size_t c = 0; c < n_cells; ++c) {
    CompareCell cell;
    cell.controller = result.per_seed.front()[c].controller;
    cell.trajectory = result.per_seed.front()[c].trajectory;
    std::vector<double> rms, mx, hrms, eff, dur;
    for (const auto& cells : result.per_seed) {
      rms.push_back(cells[c].metrics.rms_pos_err);
      mx.push_back(cells[c].metrics.max_pos_err);
      hrms.push_back(cells[c].metrics.rms_heading_err);
      eff.push_back(cells[c].metrics.control_effort);
      dur.push_back(cells[c].metrics.duration);
    }
    cell.metrics.rms_pos_err = median_of(rms);
    cell.metrics.max_pos_err = median_of(mx);
    cell.metrics.rms_heading_err = median_of(hrms);
    cell.metrics.control_effort = median_of(eff);
    cell.metrics.duration = median_of(dur);
    cell.metrics.termination = "median";
    result.median.push_back(std::move(cell));
  }
  return result;
}

namespace {

json cell_to_json(const CompareCell& cell) {
  return json{{"controller", cell.controller},
              {"trajectory", cell.trajectory},
              {"rms_pos_err", cell.metrics.rms_pos_err},
              {"max_pos_err", cell.metrics.max_pos_err},
              {"rms_heading_err", cell.metrics.rms_heading_err},
              {"control_effort", cell.metrics.control_effort},
              {"termination", cell.metrics.termination},
              {"duration", cell.metrics.duration}};
}

}  // namespace

void write_compare_json(const std::filesystem::path& path,
                        const CompareResult& result) {
  json per_seed = json::array();
  for (std::size_t i = 0; i < result.per_seed.size(); ++i) {
    json cells = json::array();
    for (const CompareCell& c : result.per_seed[i]) {
      cells.push_back(cell_to_json(c));
    }
    json entry{{"cells", cells}};
    if (i < result.seeds.size()) entry["seed"] = result.seeds[i];
    per_seed.push_back(entry);
  }
  json median = json::array();
  for (const CompareCell& c : result.median) median.push_back(cell_to_json(c));
  const json j{{"schema", "ddmr.compare.v1"},
               {"per_seed", per_seed},
               {"median", median}};
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

std::string compare_table_text(const CompareResult& result) {
  std::ostringstream os;
  os << "median over " << std::max<std::size_t>(result.per_seed.size(), 1)
     << " run(s)\n";
  os << std::left << std::setw(12) << "controller" << std::setw(12)
     << "trajectory" << std::right << std::setw(14) << "rms_pos[m]"
     << std::setw(14) << "max_pos[m]" << std::setw(14) << "rms_head[rad]"
     << std::setw(14) << "effort" << '\n';
  for (const CompareCell& c : result.median) {
    os << std::left << std::setw(12) << c.controller << std::setw(12)
       << c.trajectory << std::right << std::fixed << std::setprecision(6)
       << std::setw(14) << c.metrics.rms_pos_err << std::setw(14)
       << c.metrics.max_pos_err << std::setw(14) << c.metrics.rms_heading_err
       << std::setw(14) << c.metrics.control_effort << '\n';
    os.unsetf(std::ios_base::fixed);
  }
  return os.str();
}

}  // namespace ddmr
