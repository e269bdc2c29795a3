#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ddmr/approximator.hpp"
#include "support/oracles.hpp"

using namespace ddmr;

namespace {

Eigen::VectorXd flatten_param_grads(const MlpGradients& g) {
  std::size_t total = 0;
  for (const auto& w : g.dweights) total += w.size();
  for (const auto& b : g.dbiases) total += b.size();
  Eigen::VectorXd out(total);
  std::size_t at = 0;
  for (std::size_t l = 0; l < g.dweights.size(); ++l) {
    for (int r = 0; r < g.dweights[l].rows(); ++r) {
      for (int c = 0; c < g.dweights[l].cols(); ++c) {
        out[at++] = g.dweights[l](r, c);
      }
    }
    for (int r = 0; r < g.dbiases[l].size(); ++r) out[at++] = g.dbiases[l][r];
  }
  return out;
}

}  // namespace

TEST_CASE("init: deterministic per seed, output layer small") {
  const std::vector<int> dims{18, 64, 64, 1};
  const MlpParams a = mlp_init(12345, dims);
  const MlpParams b = mlp_init(12345, dims);
  const MlpParams c = mlp_init(54321, dims);
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    CHECK(a.weights[l] == b.weights[l]);
    CHECK(a.biases[l] == b.biases[l]);
  }
  CHECK(a.weights[0] != c.weights[0]);
  CHECK(a.weights.back().cwiseAbs().maxCoeff() <= 1e-3);
  CHECK(a.biases.back().cwiseAbs().maxCoeff() <= 1e-3);
  // Hidden layers are fan-in scaled.
  CHECK(a.weights[0].cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(18.0));
}

TEST_CASE("forward: hand-computed values") {
  MlpParams p;
  p.layer_dims = {2, 1};
  p.weights = {Eigen::MatrixXd(1, 2)};
  p.weights[0] << 1.0, 1.0;
  p.biases = {Eigen::VectorXd::Zero(1)};
  CHECK(mlp_forward(p, Eigen::Vector2d(2.0, 3.0)) == doctest::Approx(5.0));

  MlpParams zero = mlp_init(1, {4, 8, 1});
  for (auto& w : zero.weights) w.setZero();
  for (auto& b : zero.biases) b.setZero();
  CHECK(mlp_forward(zero, Eigen::Vector4d(1, -2, 3, -4)) == 0.0);
}

TEST_CASE("forward: positive homogeneity of a bias-free rectifier net") {
  MlpParams p = mlp_init(7, {3, 8, 8, 1});
  for (auto& b : p.biases) b.setZero();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d x(u(rng), u(rng), u(rng));
    CHECK(mlp_forward(p, 2.0 * x) ==
          doctest::Approx(2.0 * mlp_forward(p, x)).epsilon(1e-12));
  }
}

TEST_CASE("forward: dimension mismatch rejected") {
  const MlpParams p = mlp_init(3, {4, 8, 1});
  CHECK_THROWS_AS(mlp_forward(p, Eigen::Vector3d(1, 2, 3)), ValidationError);
}

TEST_CASE("grad: linear net input gradient is the weight row") {
  MlpParams p;
  p.layer_dims = {3, 1};
  p.weights = {Eigen::MatrixXd(1, 3)};
  p.weights[0] << 0.5, -1.5, 2.0;
  p.biases = {Eigen::VectorXd::Constant(1, 0.7)};
  const MlpGradients g = mlp_grad(p, Eigen::Vector3d(1, 2, 3));
  CHECK((g.dinputs.col(0).transpose() - p.weights[0]).cwiseAbs().maxCoeff() <
        1e-15);
}

TEST_CASE("grad: zero-weight net has zero input gradient") {
  MlpParams p = mlp_init(3, {4, 8, 1});
  for (auto& w : p.weights) w.setZero();
  const MlpGradients g = mlp_grad(p, Eigen::Vector4d(1, 2, 3, 4));
  CHECK(g.dinputs.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("grad: parameter and input gradients match finite differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    MlpParams p = mlp_init(1000 + trial, {5, 12, 12, 1});
    Eigen::VectorXd x(5);
    for (int i = 0; i < 5; ++i) x[i] = u(rng);

    const MlpGradients g = mlp_grad(p, x);

    // Input gradient.
    Eigen::VectorXd fd_in(5);
    for (int i = 0; i < 5; ++i) {
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      fd_in[i] = (mlp_forward(p, xp) - mlp_forward(p, xm)) / (2.0 * h);
    }
    CHECK(oracles::grad_rel_err(g.dinputs.col(0), fd_in) < 1e-5);

    // Parameter gradient, every entry.
    std::vector<double> fd_params;
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
      for (int r = 0; r < p.weights[l].rows(); ++r) {
        for (int c = 0; c < p.weights[l].cols(); ++c) {
          const double keep = p.weights[l](r, c);
          p.weights[l](r, c) = keep + h;
          const double up = mlp_forward(p, x);
          p.weights[l](r, c) = keep - h;
          const double dn = mlp_forward(p, x);
          p.weights[l](r, c) = keep;
          fd_params.push_back((up - dn) / (2.0 * h));
        }
      }
      for (int r = 0; r < p.biases[l].size(); ++r) {
        const double keep = p.biases[l][r];
        p.biases[l][r] = keep + h;
        const double up = mlp_forward(p, x);
        p.biases[l][r] = keep - h;
        const double dn = mlp_forward(p, x);
        p.biases[l][r] = keep;
        fd_params.push_back((up - dn) / (2.0 * h));
      }
    }
    const Eigen::VectorXd analytic = flatten_param_grads(g);
    const Eigen::VectorXd numeric =
        Eigen::Map<const Eigen::VectorXd>(fd_params.data(), long(fd_params.size()));
    CHECK(oracles::grad_rel_err(analytic, numeric) < 1e-5);
  }
}

TEST_CASE("batch forward matches per-sample forward") {
  const MlpParams p = mlp_init(77, {6, 16, 1});
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Eigen::MatrixXd X(6, 32);
  for (int c = 0; c < 32; ++c) {
    for (int r = 0; r < 6; ++r) X(r, c) = u(rng);
  }
  const Eigen::RowVectorXd batch = mlp_forward_batch(p, X);
  for (int c = 0; c < 32; ++c) {
    CHECK(batch[c] == doctest::Approx(mlp_forward(p, X.col(c))).epsilon(1e-14));
  }
}

TEST_CASE("batch backprop accumulates upstream-weighted gradients") {
  const MlpParams p = mlp_init(99, {4, 10, 1});
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd X(4, 8);
  Eigen::RowVectorXd up(8);
  for (int c = 0; c < 8; ++c) {
    up[c] = u(rng);
    for (int r = 0; r < 4; ++r) X(r, c) = u(rng);
  }
  const MlpGradients batch = mlp_backprop(p, X, up);
  Eigen::MatrixXd acc_w = Eigen::MatrixXd::Zero(10, 4);
  Eigen::MatrixXd acc_in = Eigen::MatrixXd::Zero(4, 8);
  for (int c = 0; c < 8; ++c) {
    const MlpGradients single = mlp_grad(p, X.col(c));
    acc_w += up[c] * single.dweights[0];
    acc_in.col(c) = up[c] * single.dinputs.col(0);
  }
  CHECK((batch.dweights[0] - acc_w).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((batch.dinputs - acc_in).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("polyak mix blends elementwise") {
  const MlpParams live = mlp_init(1, {3, 4, 1});
  const MlpParams target = mlp_init(2, {3, 4, 1});
  const MlpParams mixed = polyak_mix(live, target, 0.25);
  for (std::size_t l = 0; l < live.weights.size(); ++l) {
    const Eigen::MatrixXd expected =
        0.25 * live.weights[l] + 0.75 * target.weights[l];
    CHECK((mixed.weights[l] - expected).cwiseAbs().maxCoeff() < 1e-15);
  }
  const MlpParams copy = polyak_mix(live, target, 1.0);
  CHECK(copy.weights[0] == live.weights[0]);
}
