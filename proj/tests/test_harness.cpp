#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ddmr/harness.hpp"

using namespace ddmr;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ddmr_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig fast_config() {
  ExperimentConfig cfg = default_config();
  cfg.trainer.episodes = 2;
  cfg.trainer.max_episode_len = 1.0;
  cfg.trainer.warmup_steps = 40;
  cfg.trainer.actor_warmup_steps = 40;
  cfg.trainer.batch_size = 32;
  cfg.trainer.critic_layers = {18, 32, 32, 1};
  cfg.evaluation.duration = 2.0;
  return cfg;
}

}  // namespace

TEST_CASE("metrics: hand-computed traces") {
  std::vector<TraceRow> perfect;
  for (int i = 0; i <= 10; ++i) {
    TraceRow r;
    r.t = 0.1 * i;
    r.x = r.x_d = 0.3 * i;
    r.y = r.y_d = -0.1 * i;
    r.theta = r.theta_d = 0.05 * i;
    perfect.push_back(r);
  }
  const RunMetrics m0 = metrics(perfect);
  CHECK(m0.rms_pos_err == 0.0);
  CHECK(m0.max_pos_err == 0.0);
  CHECK(m0.rms_heading_err == 0.0);

  std::vector<TraceRow> offset;
  for (int i = 0; i <= 20; ++i) {
    TraceRow r;
    r.t = 0.1 * i;
    r.x = 0.0;
    r.x_d = 1.0;  // constant 1 m offset
    r.tau_R = 1.0;
    r.tau_L = 1.0;
    offset.push_back(r);
  }
  const RunMetrics m1 = metrics(offset);
  CHECK(m1.rms_pos_err == doctest::Approx(1.0));
  CHECK(m1.max_pos_err == doctest::Approx(1.0));
  CHECK(m1.control_effort == doctest::Approx(4.0));  // integral of 2 over 2 s
  CHECK(m1.duration == doctest::Approx(2.0));
  CHECK(m1.rms_pos_err <= m1.max_pos_err);

  CHECK_THROWS_AS(metrics({}), ValidationError);
}

TEST_CASE("config: default validates and round-trips losslessly") {
  const ExperimentConfig cfg = default_config();
  CHECK_NOTHROW(cfg.validate());
  const std::string once = serialize_config(cfg);
  const ExperimentConfig reparsed = parse_config(once);
  const std::string twice = serialize_config(reparsed);
  CHECK(once == twice);
}

TEST_CASE("config: unknown and missing keys are hard errors") {
  const std::string good = serialize_config(default_config());

  // Unknown key at root.
  {
    auto j = good;
    j.insert(j.rfind('}'), ",\"surprise\": 1\n");
    CHECK_THROWS_AS(parse_config(j), ConfigError);
  }
  // Unknown key in a section.
  {
    std::string j = good;
    const auto at = j.find("\"tau_max\"");
    REQUIRE(at != std::string::npos);
    j.insert(at, "\"typo_key\": 3, ");
    CHECK_THROWS_AS(parse_config(j), ConfigError);
  }
  // Missing key.
  {
    std::string j = good;
    const auto at = j.find("\"gamma\"");
    REQUIRE(at != std::string::npos);
    const auto comma = j.find(',', at);
    j.erase(at, comma - at + 1);
    CHECK_THROWS_AS(parse_config(j), ConfigError);
  }
  // Invalid invariant (negative radius) is a validation error.
  {
    ExperimentConfig cfg = default_config();
    cfg.plant.R = -1.0;
    CHECK_THROWS_AS(parse_config(serialize_config(cfg)), ValidationError);
  }
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
}

TEST_CASE("config: the shipped file matches the built-in defaults") {
  // Regenerate with `ddmr_lab dump-config --path configs/default.json`.
  const fs::path shipped = fs::path(DDMR_SOURCE_DIR) / "configs/default.json";
  REQUIRE(fs::exists(shipped));
  CHECK(slurp(shipped) == serialize_config(default_config()));
}

TEST_CASE("config: file round trip") {
  const fs::path dir = temp_dir("config");
  const ExperimentConfig cfg = default_config();
  save_config(cfg, dir / "config.json");
  const ExperimentConfig loaded = load_config(dir / "config.json");
  CHECK(serialize_config(loaded) == serialize_config(cfg));
  CHECK_THROWS_AS(load_config(dir / "absent.json"), ConfigError);
}

TEST_CASE("policy and critics checkpoints round trip") {
  const fs::path dir = temp_dir("ckpt");
  PolicyParams pi;
  pi.z << 0.1, -0.2, 0.3, -0.4;
  pi.zV = 0.5;
  pi.zD = -0.6;
  pi.alpha = 1.25;
  pi.beta = 0.75;
  save_policy(pi, dir / "policy.json");
  const PolicyParams back = load_policy(dir / "policy.json");
  CHECK(back.pack() == pi.pack());

  const TwinCritics critics{mlp_init(5, {18, 32, 1}), mlp_init(6, {18, 32, 1})};
  save_critics(critics, dir / "critics.json");
  const TwinCritics loaded = load_critics(dir / "critics.json");
  for (std::size_t l = 0; l < critics.q1.weights.size(); ++l) {
    CHECK(loaded.q1.weights[l] == critics.q1.weights[l]);
    CHECK(loaded.q2.biases[l] == critics.q2.biases[l]);
  }
}

TEST_CASE("evaluate: exact CTC tracks the training sinusoid tightly") {
  const ExperimentConfig cfg = default_config();
  const std::vector<TraceRow> trace = evaluate_rollout(
      cfg, ControllerKind::kExactCtc, cfg.trajectories.train);
  const RunMetrics m = metrics(trace);
  CHECK(m.rms_pos_err < 0.01);
  CHECK(m.duration == doctest::Approx(cfg.evaluation.duration));
}

TEST_CASE("evaluate: gctc requires a policy") {
  const ExperimentConfig cfg = default_config();
  CHECK_THROWS_AS(evaluate_rollout(cfg, ControllerKind::kGctc,
                                   cfg.trajectories.tests[0], nullptr),
                  ValidationError);
}

TEST_CASE("trace csv: schema header and deterministic bytes") {
  const ExperimentConfig cfg = fast_config();
  const std::vector<TraceRow> trace = evaluate_rollout(
      cfg, ControllerKind::kKinematic, cfg.trajectories.tests[1]);
  const fs::path dir = temp_dir("trace");
  write_trace_csv(dir / "a.csv", trace);
  write_trace_csv(dir / "b.csv", trace);
  const std::string a = slurp(dir / "a.csv");
  CHECK(a == slurp(dir / "b.csv"));
  CHECK(a.rfind("# ddmr.trace.v1\n", 0) == 0);
  CHECK(a.find("t,x,y,theta,x_d,y_d,theta_d,tau_R,tau_L,r\n") !=
        std::string::npos);
  // Rows: one per control step plus the terminal sample.
  const long expected_rows =
      std::lround(cfg.evaluation.duration / cfg.evaluation.control_dt) + 1;
  long newlines = std::count(a.begin(), a.end(), '\n');
  CHECK(newlines == expected_rows + 2);
}

TEST_CASE("run_train: outputs exist and are byte-identical across reruns") {
  const ExperimentConfig cfg = fast_config();
  const fs::path dir1 = temp_dir("train1");
  const fs::path dir2 = temp_dir("train2");
  const TrainArtifacts a = run_train(cfg, 11, dir1);
  const TrainArtifacts b = run_train(cfg, 11, dir2);
  CHECK(slurp(a.log_csv) == slurp(b.log_csv));
  CHECK(slurp(a.summary_json) == slurp(b.summary_json));
  CHECK(slurp(a.policy_json) == slurp(b.policy_json));
  CHECK(slurp(a.critics_json) == slurp(b.critics_json));
  CHECK(slurp(a.log_csv).rfind("# ddmr.trainlog.v1\n", 0) == 0);

  // A checkpoint reload evaluates identically to the in-memory policy.
  const PolicyParams pi = load_policy(a.policy_json);
  CHECK(pi.pack() == a.result.pi.pack());
}

TEST_CASE("run_compare: checkpoint mode trains nothing and fills the table") {
  ExperimentConfig cfg = fast_config();
  PolicyParams pi;  // box centers
  const CompareResult res = run_compare(cfg, pi);
  CHECK(res.per_seed.size() == 1);
  CHECK(res.median.size() == 9);  // 3 controllers x 3 trajectories
  for (const CompareCell& cell : res.median) {
    CHECK(cell.metrics.rms_pos_err >= 0.0);
    CHECK(cell.metrics.rms_pos_err <= cell.metrics.max_pos_err + 1e-12);
  }
  const fs::path dir = temp_dir("compare");
  write_compare_json(dir / "compare.json", res);
  const std::string table = compare_table_text(res);
  CHECK(table.find("kinematic") != std::string::npos);
  CHECK(table.find("exact-ctc") != std::string::npos);
  CHECK(table.find("gctc") != std::string::npos);
  CHECK(table.find("square") != std::string::npos);
}
