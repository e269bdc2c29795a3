#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ddmr/harness.hpp"

namespace ddmr {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) {
    throw ConfigError("config: section '" + section + "' must be an object");
  }
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!ok.count(item.key())) {
      throw ConfigError("config: unknown key '" + item.key() + "' in '" +
                        section + "'");
    }
  }
  for (const std::string& key : ok) {
    if (!j.contains(key)) {
      throw ConfigError("config: missing key '" + key + "' in '" + section +
                        "'");
    }
  }
}

double get_num(const json& j, const std::string& section, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number()) {
    throw ConfigError("config: '" + section + "." + key + "' must be a number");
  }
  return v.get<double>();
}

long get_int(const json& j, const std::string& section, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) {
    throw ConfigError("config: '" + section + "." + key +
                      "' must be an integer");
  }
  return v.get<long>();
}

std::vector<double> get_array(const json& j, const std::string& section,
                              const char* key, std::size_t n) {
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != n) {
    throw ConfigError("config: '" + section + "." + key + "' must be an array of " +
                      std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) {
      throw ConfigError("config: '" + section + "." + key +
                        "' must contain numbers");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

PlantParams parse_plant(const json& j) {
  check_keys(j, "plant",
             {"R", "W", "c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8", "c9",
              "cV", "cD", "tau_max"});
  PlantParams p;
  p.R = get_num(j, "plant", "R");
  p.W = get_num(j, "plant", "W");
  p.c1 = get_num(j, "plant", "c1");
  p.c2 = get_num(j, "plant", "c2");
  p.c3 = get_num(j, "plant", "c3");
  p.c4 = get_num(j, "plant", "c4");
  p.c5 = get_num(j, "plant", "c5");
  p.c6 = get_num(j, "plant", "c6");
  p.c7 = get_num(j, "plant", "c7");
  p.c8 = get_num(j, "plant", "c8");
  p.c9 = get_num(j, "plant", "c9");
  p.cV = get_num(j, "plant", "cV");
  p.cD = get_num(j, "plant", "cD");
  p.tau_max = get_num(j, "plant", "tau_max");
  return p;
}

json plant_to_json(const PlantParams& p) {
  return json{{"R", p.R},   {"W", p.W},   {"c1", p.c1}, {"c2", p.c2},
              {"c3", p.c3}, {"c4", p.c4}, {"c5", p.c5}, {"c6", p.c6},
              {"c7", p.c7}, {"c8", p.c8}, {"c9", p.c9}, {"cV", p.cV},
              {"cD", p.cD}, {"tau_max", p.tau_max}};
}

TrajectorySpec parse_trajectory(const json& j, const std::string& section) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw ConfigError("config: '" + section + "' needs a string 'type'");
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "sinusoid") {
    check_keys(j, section, {"type", "forward_speed", "amplitude", "wavelength"});
    return SinusoidSpec{get_num(j, section, "forward_speed"),
                        get_num(j, section, "amplitude"),
                        get_num(j, section, "wavelength")};
  }
  if (type == "circle") {
    check_keys(j, section,
               {"type", "radius", "base_rate", "rate_mod_amp", "rate_mod_freq"});
    return CircleSpec{get_num(j, section, "radius"),
                      get_num(j, section, "base_rate"),
                      get_num(j, section, "rate_mod_amp"),
                      get_num(j, section, "rate_mod_freq")};
  }
  if (type == "square") {
    check_keys(j, section, {"type", "side", "corner_radius", "speed"});
    return SquareSpec{get_num(j, section, "side"),
                      get_num(j, section, "corner_radius"),
                      get_num(j, section, "speed")};
  }
  throw ConfigError("config: '" + section + "': unknown trajectory type '" +
                    type + "'");
}

json trajectory_to_json(const TrajectorySpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SinusoidSpec>) {
          return json{{"type", "sinusoid"},
                      {"forward_speed", s.forward_speed},
                      {"amplitude", s.amplitude},
                      {"wavelength", s.wavelength}};
        } else if constexpr (std::is_same_v<T, CircleSpec>) {
          return json{{"type", "circle"},
                      {"radius", s.radius},
                      {"base_rate", s.base_rate},
                      {"rate_mod_amp", s.rate_mod_amp},
                      {"rate_mod_freq", s.rate_mod_freq}};
        } else {
          return json{{"type", "square"},
                      {"side", s.side},
                      {"corner_radius", s.corner_radius},
                      {"speed", s.speed}};
        }
      },
      spec);
}

template <typename Mat>
Mat parse_sym_matrix(const json& j, const std::string& section,
                     const char* key) {
  Mat m = Mat::Zero();
  const int n = int(m.rows());
  const json& v = j.at(key);
  if (!v.is_array() || int(v.size()) != n) {
    throw ConfigError("config: '" + section + "." + key + "' must have " +
                      std::to_string(n) + " entries (diagonal or rows)");
  }
  if (v.front().is_number()) {
    for (int i = 0; i < n; ++i) m(i, i) = v.at(i).get<double>();
  } else {
    for (int i = 0; i < n; ++i) {
      const json& row = v.at(i);
      if (!row.is_array() || int(row.size()) != n) {
        throw ConfigError("config: '" + section + "." + key +
                          "' rows must have " + std::to_string(n) + " entries");
      }
      for (int c = 0; c < n; ++c) m(i, c) = row.at(c).get<double>();
    }
  }
  return m;
}

template <typename Mat>
json sym_matrix_to_json(const Mat& m) {
  const int n = int(m.rows());
  if (m.isDiagonal(0.0)) {
    json diag = json::array();
    for (int i = 0; i < n; ++i) diag.push_back(m(i, i));
    return diag;
  }
  json rows = json::array();
  for (int i = 0; i < n; ++i) {
    json row = json::array();
    for (int c = 0; c < n; ++c) row.push_back(m(i, c));
    rows.push_back(row);
  }
  return rows;
}

TrainerConfig parse_trainer(const json& j) {
  check_keys(j, "trainer",
             {"gamma", "eta", "policy_delay", "batch_size", "explore_sigma",
              "target_sigma", "target_clip", "critic_lr", "actor_lr",
              "warmup_steps", "actor_warmup_steps", "actor_grad_clip",
              "buffer_capacity", "control_dt", "plant_dt",
              "max_track_error", "max_episode_len", "episodes", "He", "Hu",
              "critic_layers", "obs_scale", "act_scale", "start_pos_sigma",
              "start_heading_sigma", "z_clamp"});
  TrainerConfig t;
  t.gamma = get_num(j, "trainer", "gamma");
  t.eta = get_num(j, "trainer", "eta");
  t.policy_delay = int(get_int(j, "trainer", "policy_delay"));
  t.batch_size = int(get_int(j, "trainer", "batch_size"));
  t.explore_sigma = get_num(j, "trainer", "explore_sigma");
  t.target_sigma = get_num(j, "trainer", "target_sigma");
  t.target_clip = get_num(j, "trainer", "target_clip");
  t.critic_lr = get_num(j, "trainer", "critic_lr");
  t.actor_lr = get_num(j, "trainer", "actor_lr");
  t.warmup_steps = int(get_int(j, "trainer", "warmup_steps"));
  t.actor_warmup_steps = int(get_int(j, "trainer", "actor_warmup_steps"));
  t.actor_grad_clip = get_num(j, "trainer", "actor_grad_clip");
  t.buffer_capacity = std::size_t(get_int(j, "trainer", "buffer_capacity"));
  t.control_dt = get_num(j, "trainer", "control_dt");
  t.plant_dt = get_num(j, "trainer", "plant_dt");
  t.max_track_error = get_num(j, "trainer", "max_track_error");
  t.max_episode_len = get_num(j, "trainer", "max_episode_len");
  t.episodes = int(get_int(j, "trainer", "episodes"));
  t.He = parse_sym_matrix<Mat99>(j, "trainer", "He");
  t.Hu = parse_sym_matrix<Eigen::Matrix2d>(j, "trainer", "Hu");
  const json& layers = j.at("critic_layers");
  if (!layers.is_array() || layers.size() < 2) {
    throw ConfigError("config: 'trainer.critic_layers' must be an array");
  }
  t.critic_layers.clear();
  for (const auto& e : layers) t.critic_layers.push_back(e.get<int>());
  const std::vector<double> scale = get_array(j, "trainer", "obs_scale", 16);
  for (int i = 0; i < 16; ++i) t.obs_scale[i] = scale[i];
  t.act_scale = get_num(j, "trainer", "act_scale");
  t.start_pos_sigma = get_num(j, "trainer", "start_pos_sigma");
  t.start_heading_sigma = get_num(j, "trainer", "start_heading_sigma");
  t.z_clamp = get_num(j, "trainer", "z_clamp");
  return t;
}

json trainer_to_json(const TrainerConfig& t) {
  json scale = json::array();
  for (int i = 0; i < 16; ++i) scale.push_back(t.obs_scale[i]);
  return json{{"gamma", t.gamma},
              {"eta", t.eta},
              {"policy_delay", t.policy_delay},
              {"batch_size", t.batch_size},
              {"explore_sigma", t.explore_sigma},
              {"target_sigma", t.target_sigma},
              {"target_clip", t.target_clip},
              {"critic_lr", t.critic_lr},
              {"actor_lr", t.actor_lr},
              {"warmup_steps", t.warmup_steps},
              {"actor_warmup_steps", t.actor_warmup_steps},
              {"actor_grad_clip", t.actor_grad_clip},
              {"buffer_capacity", t.buffer_capacity},
              {"control_dt", t.control_dt},
              {"plant_dt", t.plant_dt},
              {"max_track_error", t.max_track_error},
              {"max_episode_len", t.max_episode_len},
              {"episodes", t.episodes},
              {"He", sym_matrix_to_json(t.He)},
              {"Hu", sym_matrix_to_json(t.Hu)},
              {"critic_layers", t.critic_layers},
              {"obs_scale", scale},
              {"act_scale", t.act_scale},
              {"start_pos_sigma", t.start_pos_sigma},
              {"start_heading_sigma", t.start_heading_sigma},
              {"z_clamp", t.z_clamp}};
}

ConstraintBox parse_box(const json& j) {
  check_keys(j, "gctc.box",
             {"sigma_center", "sigma_radius", "cV_center", "cV_radius",
              "cD_center", "cD_radius"});
  ConstraintBox b;
  const std::vector<double> sc = get_array(j, "gctc.box", "sigma_center", 4);
  const std::vector<double> sr = get_array(j, "gctc.box", "sigma_radius", 4);
  for (int i = 0; i < 4; ++i) {
    b.sigma_center[i] = sc[i];
    b.sigma_radius[i] = sr[i];
  }
  b.cV_center = get_num(j, "gctc.box", "cV_center");
  b.cV_radius = get_num(j, "gctc.box", "cV_radius");
  b.cD_center = get_num(j, "gctc.box", "cD_center");
  b.cD_radius = get_num(j, "gctc.box", "cD_radius");
  return b;
}

json box_to_json(const ConstraintBox& b) {
  return json{{"sigma_center", {b.sigma_center[0], b.sigma_center[1],
                                b.sigma_center[2], b.sigma_center[3]}},
              {"sigma_radius", {b.sigma_radius[0], b.sigma_radius[1],
                                b.sigma_radius[2], b.sigma_radius[3]}},
              {"cV_center", b.cV_center},
              {"cV_radius", b.cV_radius},
              {"cD_center", b.cD_center},
              {"cD_radius", b.cD_radius}};
}

}  // namespace

void KinematicControllerConfig::validate() const {
  if (!(k1 > 0.0 && k2 > 0.0 && k3 > 0.0)) {
    throw ValidationError("kinematic: gains must be > 0");
  }
  if (!(wheel_pid.kp >= 0.0 && wheel_pid.ki >= 0.0 && wheel_pid.kd >= 0.0)) {
    throw ValidationError("kinematic: PID gains must be >= 0");
  }
  if (!(wheel_pid.integral_limit > 0.0) || !(wheel_pid.output_limit > 0.0)) {
    throw ValidationError("kinematic: PID limits must be > 0");
  }
}

void CtcConfig::validate() const {
  if (!(eps > 0.0)) throw ValidationError("ctc: eps must be > 0");
  if (!std::isfinite(alpha) || !std::isfinite(beta)) {
    throw ValidationError("ctc: non-finite pole parameter");
  }
}

void GctcConfig::validate() const {
  if (!(eps > 0.0)) throw ValidationError("gctc: eps must be > 0");
  box.validate();
}

void EvaluationConfig::validate() const {
  if (!(duration > 0.0)) throw ValidationError("evaluation: duration must be > 0");
  if (!(control_dt > 0.0) || !(plant_dt > 0.0) || plant_dt > 0.01) {
    throw ValidationError("evaluation: bad step sizes");
  }
  const double ratio = control_dt / plant_dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw ValidationError("evaluation: control_dt must be a multiple of plant_dt");
  }
}

void ExperimentConfig::validate() const {
  plant.validate();
  ddmr::validate(trajectories.train);
  for (const TrajectorySpec& t : trajectories.tests) ddmr::validate(t);
  kinematic.validate();
  ctc.validate();
  gctc.validate();
  trainer.validate();
  evaluation.validate();
  if (seeds.empty()) throw ValidationError("config: seeds must be non-empty");
  if (output_dir.empty()) throw ValidationError("config: output_dir must be set");
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.kinematic.wheel_pid.output_limit = cfg.plant.tau_max;
  // "Guessed" ranges for the gray box: centers offset ~30% from the true
  // values, radii wide enough to contain them.
  cfg.gctc.box.sigma_center << 1.3, 0.065, 0.325, 0.013;
  cfg.gctc.box.sigma_radius << 0.8, 0.04, 0.2, 0.008;
  cfg.gctc.box.cV_center = 0.065;
  cfg.gctc.box.cV_radius = 0.04;
  cfg.gctc.box.cD_center = 0.026;
  cfg.gctc.box.cD_radius = 0.016;
  return cfg;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
  }
  check_keys(j, "<root>",
             {"plant", "trajectories", "kinematic", "ctc", "gctc", "trainer",
              "evaluation", "seeds", "output_dir"});

  ExperimentConfig cfg;
  cfg.plant = parse_plant(j.at("plant"));

  const json& tj = j.at("trajectories");
  check_keys(tj, "trajectories", {"train", "tests"});
  cfg.trajectories.train = parse_trajectory(tj.at("train"), "trajectories.train");
  const json& tests = tj.at("tests");
  if (!tests.is_array() || tests.size() != 3) {
    throw ConfigError("config: 'trajectories.tests' must list 3 trajectories");
  }
  for (int i = 0; i < 3; ++i) {
    cfg.trajectories.tests[i] =
        parse_trajectory(tests.at(i), "trajectories.tests[" + std::to_string(i) + "]");
  }

  const json& kj = j.at("kinematic");
  check_keys(kj, "kinematic", {"k1", "k2", "k3", "wheel_pid"});
  cfg.kinematic.k1 = get_num(kj, "kinematic", "k1");
  cfg.kinematic.k2 = get_num(kj, "kinematic", "k2");
  cfg.kinematic.k3 = get_num(kj, "kinematic", "k3");
  const json& pj = kj.at("wheel_pid");
  check_keys(pj, "kinematic.wheel_pid",
             {"kp", "ki", "kd", "integral_limit", "output_limit"});
  cfg.kinematic.wheel_pid.kp = get_num(pj, "kinematic.wheel_pid", "kp");
  cfg.kinematic.wheel_pid.ki = get_num(pj, "kinematic.wheel_pid", "ki");
  cfg.kinematic.wheel_pid.kd = get_num(pj, "kinematic.wheel_pid", "kd");
  cfg.kinematic.wheel_pid.integral_limit =
      get_num(pj, "kinematic.wheel_pid", "integral_limit");
  cfg.kinematic.wheel_pid.output_limit =
      get_num(pj, "kinematic.wheel_pid", "output_limit");

  const json& cj = j.at("ctc");
  check_keys(cj, "ctc", {"alpha", "beta", "eps"});
  cfg.ctc.alpha = get_num(cj, "ctc", "alpha");
  cfg.ctc.beta = get_num(cj, "ctc", "beta");
  cfg.ctc.eps = get_num(cj, "ctc", "eps");

  const json& gj = j.at("gctc");
  check_keys(gj, "gctc", {"eps", "box"});
  cfg.gctc.eps = get_num(gj, "gctc", "eps");
  cfg.gctc.box = parse_box(gj.at("box"));

  cfg.trainer = parse_trainer(j.at("trainer"));

  const json& ej = j.at("evaluation");
  check_keys(ej, "evaluation", {"duration", "control_dt", "plant_dt"});
  cfg.evaluation.duration = get_num(ej, "evaluation", "duration");
  cfg.evaluation.control_dt = get_num(ej, "evaluation", "control_dt");
  cfg.evaluation.plant_dt = get_num(ej, "evaluation", "plant_dt");

  const json& sj = j.at("seeds");
  if (!sj.is_array() || sj.empty()) {
    throw ConfigError("config: 'seeds' must be a non-empty array");
  }
  cfg.seeds.clear();
  for (const auto& s : sj) {
    if (!s.is_number_unsigned()) {
      throw ConfigError("config: 'seeds' must contain unsigned integers");
    }
    cfg.seeds.push_back(s.get<std::uint64_t>());
  }
  if (!j.at("output_dir").is_string()) {
    throw ConfigError("config: 'output_dir' must be a string");
  }
  cfg.output_dir = j.at("output_dir").get<std::string>();

  cfg.validate();
  return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  json tests = json::array();
  for (const TrajectorySpec& t : cfg.trajectories.tests) {
    tests.push_back(trajectory_to_json(t));
  }
  const json j{
      {"plant", plant_to_json(cfg.plant)},
      {"trajectories",
       {{"train", trajectory_to_json(cfg.trajectories.train)},
        {"tests", tests}}},
      {"kinematic",
       {{"k1", cfg.kinematic.k1},
        {"k2", cfg.kinematic.k2},
        {"k3", cfg.kinematic.k3},
        {"wheel_pid",
         {{"kp", cfg.kinematic.wheel_pid.kp},
          {"ki", cfg.kinematic.wheel_pid.ki},
          {"kd", cfg.kinematic.wheel_pid.kd},
          {"integral_limit", cfg.kinematic.wheel_pid.integral_limit},
          {"output_limit", cfg.kinematic.wheel_pid.output_limit}}}}},
      {"ctc",
       {{"alpha", cfg.ctc.alpha}, {"beta", cfg.ctc.beta}, {"eps", cfg.ctc.eps}}},
      {"gctc", {{"eps", cfg.gctc.eps}, {"box", box_to_json(cfg.gctc.box)}}},
      {"trainer", trainer_to_json(cfg.trainer)},
      {"evaluation",
       {{"duration", cfg.evaluation.duration},
        {"control_dt", cfg.evaluation.control_dt},
        {"plant_dt", cfg.evaluation.plant_dt}}},
      {"seeds", cfg.seeds},
      {"output_dir", cfg.output_dir}};
  return j.dump(2) + "\n";
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void save_config(const ExperimentConfig& cfg,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("config: cannot write '" + path.string() + "'");
  out << serialize_config(cfg);
}

}  // namespace ddmr
