#include <random>

#include <benchmark/benchmark.h>

#include "ddmr/harness.hpp"

using namespace ddmr;

namespace {

PlantParams plant() { return PlantParams{}; }

AgentState sample_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  AgentState s;
  for (int i = 0; i < 3; ++i) {
    s.e[i] = 0.1 * u(rng);
    s.e_int[i] = u(rng);
    s.e_dot[i] = u(rng);
    s.chassis_rates[i] = u(rng);
    s.pddot_d[i] = 2.0 * u(rng);
  }
  s.theta = 3.0 * u(rng);
  return s;
}

void BM_PlantStep(benchmark::State& state) {
  const PlantParams p = plant();
  RobotState s = consistent_state({0, 0, 0.3}, 0.8, 0.2, {0, 0}, p);
  const WheelTorques u{1.2, 0.8};
  for (auto _ : state) {
    s = step(s, u, 1e-3, p);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_PlantStep);

void BM_TrajectorySampleSquare(benchmark::State& state) {
  const TrajectorySpec spec = SquareSpec{3.0, 0.6, 1.0};
  double t = 0.0;
  for (auto _ : state) {
    TrajectorySample s = sample(spec, t);
    benchmark::DoNotOptimize(s);
    t += 0.01;
  }
}
BENCHMARK(BM_TrajectorySampleSquare);

void BM_CtcTorque(benchmark::State& state) {
  const PlantParams p = plant();
  PhysicalParams phys;
  phys.sigma = sigma_from_c(p);
  phys.cV = p.cV;
  phys.cD = p.cD;
  const GainSet gains = gains_from_poles(1.0, 1.0, 0.01);
  TrackingErrorState err;
  err.e << 0.03, -0.02, 0.01;
  err.e_dot << 0.1, 0.0, -0.05;
  const Eigen::Vector3d pddot_d(0.5, -1.0, 0.2);
  const Eigen::Vector3d pdot(0.9, 0.3, 0.4);
  for (auto _ : state) {
    WheelTorques u = ctc_torque(err, pddot_d, 0.7, pdot, phys, gains, p.R, p.W);
    benchmark::DoNotOptimize(u);
  }
}
BENCHMARK(BM_CtcTorque);

void BM_GctcJacobian(benchmark::State& state) {
  const ExperimentConfig cfg = default_config();
  std::mt19937_64 rng(1);
  const AgentState s = sample_state(rng);
  const PolicyParams pi;
  for (auto _ : state) {
    Mat28 j = gctc_jacobian(s, pi, cfg.gctc.box, cfg.gctc.eps, cfg.plant.R,
                            cfg.plant.W);
    benchmark::DoNotOptimize(j);
  }
}
BENCHMARK(BM_GctcJacobian);

void BM_MlpForwardBatch(benchmark::State& state) {
  const MlpParams net = mlp_init(3, {18, 64, 64, 1});
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(18, 128);
  for (auto _ : state) {
    Eigen::RowVectorXd y = mlp_forward_batch(net, X);
    benchmark::DoNotOptimize(y);
  }
}
BENCHMARK(BM_MlpForwardBatch);

void BM_MlpBackpropBatch(benchmark::State& state) {
  const MlpParams net = mlp_init(3, {18, 64, 64, 1});
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(18, 128);
  Eigen::RowVectorXd up = Eigen::RowVectorXd::Ones(128);
  for (auto _ : state) {
    MlpGradients g = mlp_backprop(net, X, up);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_MlpBackpropBatch);

void BM_CriticUpdate(benchmark::State& state) {
  const ExperimentConfig cfg = default_config();
  TrainerConfig tcfg = cfg.trainer;
  TwinCritics critics{mlp_init(7, tcfg.critic_layers),
                      mlp_init(8, tcfg.critic_layers)};
  AdamState a1 = AdamState::like(critics.q1);
  AdamState a2 = AdamState::like(critics.q2);
  std::mt19937_64 rng(2);
  std::vector<Transition> storage;
  for (int i = 0; i < tcfg.batch_size; ++i) {
    Transition t;
    t.s = sample_state(rng);
    t.s_next = sample_state(rng);
    t.a = Eigen::Vector2d::Random();
    t.r = 0.5;
    storage.push_back(t);
  }
  std::vector<const Transition*> batch;
  for (const Transition& t : storage) batch.push_back(&t);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(tcfg.batch_size, 0.5);
  for (auto _ : state) {
    double loss = critic_update(batch, y, critics, a1, a2, tcfg);
    benchmark::DoNotOptimize(loss);
  }
}
BENCHMARK(BM_CriticUpdate);

}  // namespace

BENCHMARK_MAIN();
