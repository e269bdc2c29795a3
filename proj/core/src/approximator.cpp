#include "ddmr/approximator.hpp"

#include <cmath>
#include <random>

namespace ddmr {

void MlpParams::validate() const {
  if (layer_dims.size() < 2) {
    throw ValidationError("MlpParams: need at least input and output dims");
  }
  for (int d : layer_dims) {
    if (d <= 0) throw ValidationError("MlpParams: layer dims must be > 0");
  }
  const std::size_t n_layers = layer_dims.size() - 1;
  if (weights.size() != n_layers || biases.size() != n_layers ||
      hidden_activations.size() != n_layers - 1) {
    throw ValidationError("MlpParams: layer count mismatch");
  }
  for (std::size_t l = 0; l < n_layers; ++l) {
    if (weights[l].rows() != layer_dims[l + 1] ||
        weights[l].cols() != layer_dims[l] ||
        biases[l].size() != layer_dims[l + 1]) {
      throw ValidationError("MlpParams: weight shape mismatch");
    }
    if (!weights[l].allFinite() || !biases[l].allFinite()) {
      throw ValidationError("MlpParams: non-finite parameter");
    }
  }
  for (const std::string& act : hidden_activations) {
    if (act != "relu") {
      throw ValidationError("MlpParams: unsupported activation '" + act + "'");
    }
  }
}

MlpParams mlp_init(std::uint64_t seed, const std::vector<int>& layer_dims) {
  MlpParams p;
  p.layer_dims = layer_dims;
  if (layer_dims.size() < 2) {
    throw ValidationError("mlp_init: need at least input and output dims");
  }
  std::mt19937_64 rng(seed);
  const std::size_t n_layers = layer_dims.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int fan_in = layer_dims[l];
    const int fan_out = layer_dims[l + 1];
    const bool last = (l == n_layers - 1);
    const double bound = last ? 1e-3 : 1.0 / std::sqrt(double(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) w(r, c) = dist(rng);
    }
    Eigen::VectorXd b(fan_out);
    for (int r = 0; r < fan_out; ++r) b[r] = dist(rng);
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
    if (!last) p.hidden_activations.push_back("relu");
  }
  p.validate();
  return p;
}

Eigen::RowVectorXd mlp_forward_batch(const MlpParams& p,
                                     const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != p.input_dim()) {
    throw ValidationError("mlp_forward: input dimension mismatch");
  }
  if (p.layer_dims.back() != 1) {
    throw ValidationError("mlp_forward: output layer must have width 1");
  }
  Eigen::MatrixXd act = inputs;
  const std::size_t n_layers = p.weights.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    act = (p.weights[l] * act).colwise() + p.biases[l];
    if (l + 1 < n_layers) act = act.cwiseMax(0.0);
  }
  return act.row(0);
}

double mlp_forward(const MlpParams& p, const Eigen::VectorXd& input) {
  return mlp_forward_batch(p, input)(0);
}

MlpGradients mlp_backprop(const MlpParams& p, const Eigen::MatrixXd& inputs,
                          const Eigen::RowVectorXd& upstream) {
  if (inputs.rows() != p.input_dim()) {
    throw ValidationError("mlp_backprop: input dimension mismatch");
  }
  if (upstream.size() != inputs.cols()) {
    throw ValidationError("mlp_backprop: upstream size mismatch");
  }
  const std::size_t n_layers = p.weights.size();

  // Forward, retaining post-activation values per layer.
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(n_layers + 1);
  acts.push_back(inputs);
  for (std::size_t l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd z = (p.weights[l] * acts.back()).colwise() + p.biases[l];
    if (l + 1 < n_layers) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }

  MlpGradients g;
  g.dweights.resize(n_layers);
  g.dbiases.resize(n_layers);

  // delta starts as the upstream row (output width is 1).
  Eigen::MatrixXd delta = upstream;
  for (std::size_t l = n_layers; l-- > 0;) {
    g.dweights[l] = delta * acts[l].transpose();
    g.dbiases[l] = delta.rowwise().sum();
    Eigen::MatrixXd next = p.weights[l].transpose() * delta;
    if (l > 0) {
      // Rectifier subgradient: zero where the unit was inactive (or exactly
      // at the kink).
      next = (acts[l].array() > 0.0).cast<double>() * next.array();
    }
    delta = std::move(next);
  }
  g.dinputs = std::move(delta);
  return g;
}

MlpGradients mlp_grad(const MlpParams& p, const Eigen::VectorXd& input) {
  Eigen::RowVectorXd one(1);
  one << 1.0;
  return mlp_backprop(p, input, one);
}

MlpParams polyak_mix(const MlpParams& live, const MlpParams& target,
                     double eta) {
  if (live.layer_dims != target.layer_dims) {
    throw ValidationError("polyak_mix: architecture mismatch");
  }
  MlpParams out = target;
  for (std::size_t l = 0; l < live.weights.size(); ++l) {
    out.weights[l] = eta * live.weights[l] + (1.0 - eta) * target.weights[l];
    out.biases[l] = eta * live.biases[l] + (1.0 - eta) * target.biases[l];
  }
  return out;
}

}  // namespace ddmr
