#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ddmr/errors.hpp"

namespace ddmr {

/// A small fully connected network with rectifier hidden layers and a linear
/// scalar output. weights[l] has shape layer_dims[l+1] x layer_dims[l].
struct MlpParams {
  std::vector<int> layer_dims;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  std::vector<std::string> hidden_activations;  // one tag per hidden layer

  void validate() const;
  int input_dim() const { return layer_dims.front(); }
};

/// Gradients of a scalar function of the network output with respect to all
/// parameters (same shapes as MlpParams) and to the input batch.
struct MlpGradients {
  std::vector<Eigen::MatrixXd> dweights;
  std::vector<Eigen::VectorXd> dbiases;
  Eigen::MatrixXd dinputs;  // input_dim x batch
};

/// Deterministic fan-in-scaled uniform initialization; the output layer is
/// drawn from (-1e-3, 1e-3).
MlpParams mlp_init(std::uint64_t seed, const std::vector<int>& layer_dims);

/// Scalar forward pass (output layer must have width 1).
double mlp_forward(const MlpParams& p, const Eigen::VectorXd& input);

/// Batched forward pass over column-stacked inputs.
Eigen::RowVectorXd mlp_forward_batch(const MlpParams& p,
                                     const Eigen::MatrixXd& inputs);

/// Reverse-mode gradients of sum_i upstream[i] * output_i. With
/// upstream = [1] and a single column this is the gradient of the scalar
/// output itself.
MlpGradients mlp_backprop(const MlpParams& p, const Eigen::MatrixXd& inputs,
                          const Eigen::RowVectorXd& upstream);

/// Convenience single-sample wrapper: gradients of the scalar output with
/// respect to parameters and input.
MlpGradients mlp_grad(const MlpParams& p, const Eigen::VectorXd& input);

/// Elementwise Polyak blend: target' = eta * live + (1 - eta) * target.
MlpParams polyak_mix(const MlpParams& live, const MlpParams& target,
                     double eta);

}  // namespace ddmr
