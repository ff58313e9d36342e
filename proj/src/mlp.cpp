#include "nc/mlp.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace nc {

namespace {

void apply_activation(Matrix& z, Activation kind, double slope) {
  switch (kind) {
    case Activation::kRelu:
      z = z.cwiseMax(0.0);
      return;
    case Activation::kTanh:
      z = z.array().tanh().matrix();
      return;
    case Activation::kLeakyRelu:
      z = (z.array() > 0.0).select(z, slope * z);
      return;
  }
}

// Derivative of the nonlinearity expressed through its output. All three
// activations admit this: sign(post-activation) matches sign(pre-activation).
Matrix activation_derivative(const Matrix& a, Activation kind, double slope) {
  switch (kind) {
    case Activation::kRelu:
      return (a.array() > 0.0).cast<double>().matrix();
    case Activation::kTanh:
      return (1.0 - a.array().square()).matrix();
    case Activation::kLeakyRelu:
      return (a.array() > 0.0)
          .select(Matrix::Constant(a.rows(), a.cols(), 1.0),
                  Matrix::Constant(a.rows(), a.cols(), slope));
  }
  throw std::logic_error("unknown activation tag");
}

void check_labels(std::span<const std::int32_t> labels, Index batch_rows,
                  Index class_count, const char* where) {
  if (batch_rows != static_cast<Index>(labels.size()))
    throw std::invalid_argument(std::string(where) + ": " +
                                std::to_string(batch_rows) + " rows vs " +
                                std::to_string(labels.size()) + " labels");
  for (const std::int32_t label : labels)
    if (label < 0 || label >= class_count)
      throw std::invalid_argument(std::string(where) + ": label " +
                                  std::to_string(label) + " out of range [0, " +
                                  std::to_string(class_count) + ")");
}

Matrix affine(const Eigen::Ref<const Matrix>& a, const LayerParams& layer) {
  Matrix z = a * layer.weight.transpose();
  z.rowwise() += layer.bias.transpose();
  return z;
}

}  // namespace

MlpConfig MlpConfig::mlp6(Index input_dim, Index class_count, Index width) {
  MlpConfig config;
  config.input_dim = input_dim;
  config.class_count = class_count;
  config.hidden_widths.assign(6, width);
  return config;
}

MlpModel init_model(const MlpConfig& config, std::uint64_t seed) {
  if (config.input_dim < 1)
    throw std::invalid_argument("init_model: input_dim must be >= 1");
  if (config.class_count < 2)
    throw std::invalid_argument("init_model: class_count must be >= 2");
  for (const Index w : config.hidden_widths)
    if (w < 1)
      throw std::invalid_argument("init_model: hidden width must be >= 1, got " +
                                  std::to_string(w));

  std::vector<Index> dims;
  dims.push_back(config.input_dim);
  dims.insert(dims.end(), config.hidden_widths.begin(),
              config.hidden_widths.end());
  dims.push_back(config.class_count);

  MlpModel model;
  model.activation = config.activation;
  model.leaky_slope = config.leaky_slope;
  model.layers.resize(dims.size() - 1);

  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const Index d_in = dims[k];
    const Index d_out = dims[k + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(d_in));
    std::uniform_real_distribution<double> uniform(-bound, bound);
    LayerParams& layer = model.layers[k];
    layer.weight.resize(d_out, d_in);
    for (Index r = 0; r < d_out; ++r)
      for (Index c = 0; c < d_in; ++c) layer.weight(r, c) = uniform(rng);
    layer.bias = Vector::Zero(d_out);
  }
  return model;
}

ForwardTrace forward(const MlpModel& model,
                     const Eigen::Ref<const Matrix>& batch) {
  if (batch.cols() != model.input_dim())
    throw std::invalid_argument(
        "forward: batch dim " + std::to_string(batch.cols()) +
        " vs model input dim " + std::to_string(model.input_dim()));

  ForwardTrace trace;
  trace.hidden.reserve(static_cast<std::size_t>(model.hidden_count()));
  for (std::size_t k = 0; k + 1 < model.layers.size(); ++k) {
    Matrix z = affine(trace.hidden.empty()
                          ? batch
                          : Eigen::Ref<const Matrix>(trace.hidden.back()),
                      model.layers[k]);
    apply_activation(z, model.activation, model.leaky_slope);
    trace.hidden.push_back(std::move(z));
  }
  trace.logits = affine(trace.hidden.empty()
                            ? batch
                            : Eigen::Ref<const Matrix>(trace.hidden.back()),
                        model.layers.back());
  return trace;
}

double mse_loss(const Eigen::Ref<const Matrix>& logits,
                std::span<const std::int32_t> labels) {
  check_labels(labels, logits.rows(), logits.cols(), "mse_loss");
  Matrix residual = logits;
  for (Index i = 0; i < residual.rows(); ++i)
    residual(i, static_cast<Index>(labels[static_cast<std::size_t>(i)])) -= 1.0;
  return residual.squaredNorm() / static_cast<double>(residual.size());
}

Gradients backward(const MlpModel& model, const Eigen::Ref<const Matrix>& batch,
                   std::span<const std::int32_t> labels) {
  const ForwardTrace trace = forward(model, batch);
  const Index n = batch.rows();
  const Index c_count = model.class_count();
  check_labels(labels, n, c_count, "backward");

  Matrix delta = trace.logits;  // d(loss)/d(logits), scaled below
  for (Index i = 0; i < n; ++i)
    delta(i, static_cast<Index>(labels[static_cast<std::size_t>(i)])) -= 1.0;
  delta *= 2.0 / static_cast<double>(n * c_count);

  Gradients grads(model.layers.size());
  for (Index k = static_cast<Index>(model.layers.size()) - 1; k >= 0; --k) {
    const auto ku = static_cast<std::size_t>(k);
    const Eigen::Ref<const Matrix> input =
        (k == 0) ? batch : Eigen::Ref<const Matrix>(trace.hidden[ku - 1]);
    grads[ku].weight.noalias() = delta.transpose() * input;
    grads[ku].bias = delta.colwise().sum().transpose();
    if (k > 0) {
      const Matrix& a_prev = trace.hidden[ku - 1];
      delta = (delta * model.layers[ku].weight)
                  .cwiseProduct(activation_derivative(a_prev, model.activation,
                                                      model.leaky_slope));
    }
  }
  return grads;
}

std::vector<std::int32_t> predict(const Eigen::Ref<const Matrix>& logits) {
  std::vector<std::int32_t> out(static_cast<std::size_t>(logits.rows()));
  for (Index i = 0; i < logits.rows(); ++i) {
    Index best = 0;
    double best_value = logits(i, 0);
    for (Index c = 1; c < logits.cols(); ++c) {
      if (logits(i, c) > best_value) {
        best_value = logits(i, c);
        best = c;
      }
    }
    out[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(best);
  }
  return out;
}

double error_fraction(std::span<const std::int32_t> predictions,
                      std::span<const std::int32_t> labels) {
  if (predictions.size() != labels.size())
    throw std::invalid_argument("error_fraction: size mismatch");
  if (predictions.empty())
    throw std::invalid_argument("error_fraction: empty inputs");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (predictions[i] != labels[i]) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(predictions.size());
}

double train_error(const MlpModel& model, const Eigen::Ref<const Matrix>& inputs,
                   std::span<const std::int32_t> labels) {
  const ForwardTrace trace = forward(model, inputs);
  return error_fraction(predict(trace.logits), labels);
}

}  // namespace nc
