#pragma once

#include "nc/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace nc {

struct LayerParams {
  Matrix weight;  // d_out x d_in
  Vector bias;    // d_out
};

struct MlpConfig {
  Index input_dim = 0;
  Index class_count = 0;
  std::vector<Index> hidden_widths;
  Activation activation = Activation::kRelu;
  double leaky_slope = 0.01;

  // Six equal-width hidden layers; width defaults to the full-scale setting
  // and is shrunk for desk-scale runs.
  static MlpConfig mlp6(Index input_dim, Index class_count, Index width = 4096);
};

// Fully-connected classifier: hidden layers with a shared nonlinearity
// followed by a linear output layer (never a capture point).
struct MlpModel {
  std::vector<LayerParams> layers;  // hidden layers, then the output layer
  Activation activation = Activation::kRelu;
  double leaky_slope = 0.01;

  Index hidden_count() const { return static_cast<Index>(layers.size()) - 1; }
  Index input_dim() const { return layers.front().weight.cols(); }
  Index class_count() const { return layers.back().weight.rows(); }
};

// Post-activation capture of one forward pass, one record per hidden layer.
struct ForwardTrace {
  std::vector<Matrix> hidden;  // batch x d_j, after the nonlinearity
  Matrix logits;               // batch x class_count
};

using Gradients = std::vector<LayerParams>;

// Weights ~ uniform(-1/sqrt(d_in), +1/sqrt(d_in)), biases zero.
MlpModel init_model(const MlpConfig& config, std::uint64_t seed);

ForwardTrace forward(const MlpModel& model,
                     const Eigen::Ref<const Matrix>& batch);

// Mean over batch rows and class coordinates of the squared difference to
// the one-hot target.
double mse_loss(const Eigen::Ref<const Matrix>& logits,
                std::span<const std::int32_t> labels);

// Exact gradients of mse_loss with respect to every weight and bias.
Gradients backward(const MlpModel& model, const Eigen::Ref<const Matrix>& batch,
                   std::span<const std::int32_t> labels);

// Row-wise argmax; ties resolve to the lowest class index.
std::vector<std::int32_t> predict(const Eigen::Ref<const Matrix>& logits);

double error_fraction(std::span<const std::int32_t> predictions,
                      std::span<const std::int32_t> labels);

double train_error(const MlpModel& model, const Eigen::Ref<const Matrix>& inputs,
                   std::span<const std::int32_t> labels);

}  // namespace nc
