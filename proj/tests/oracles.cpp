#include "oracles.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace nc::testing {

NaiveStats naive_statistics(const Matrix& samples,
                            std::span<const std::int32_t> labels,
                            Index class_count) {
  const Index n = samples.rows();
  const Index p = samples.cols();
  NaiveStats stats;

  stats.mu_g = Vector::Zero(p);
  for (Index i = 0; i < n; ++i) stats.mu_g += samples.row(i).transpose();
  stats.mu_g /= static_cast<double>(n);

  stats.mu_c = Matrix::Zero(class_count, p);
  std::vector<Index> counts(static_cast<std::size_t>(class_count), 0);
  for (Index i = 0; i < n; ++i) {
    const auto c = static_cast<Index>(labels[static_cast<std::size_t>(i)]);
    stats.mu_c.row(c) += samples.row(i);
    ++counts[static_cast<std::size_t>(c)];
  }
  for (Index c = 0; c < class_count; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0)
      throw std::runtime_error("naive_statistics: empty class");
    stats.mu_c.row(c) /=
        static_cast<double>(counts[static_cast<std::size_t>(c)]);
  }

  stats.sigma_w = Matrix::Zero(p, p);
  for (Index i = 0; i < n; ++i) {
    const auto c = static_cast<Index>(labels[static_cast<std::size_t>(i)]);
    const Vector d = samples.row(i).transpose() - stats.mu_c.row(c).transpose();
    stats.sigma_w += d * d.transpose();
  }
  stats.sigma_w /= static_cast<double>(n);

  stats.sigma_b = Matrix::Zero(p, p);
  for (Index c = 0; c < class_count; ++c) {
    const Vector d = stats.mu_c.row(c).transpose() - stats.mu_g;
    stats.sigma_b += d * d.transpose();
  }
  stats.sigma_b /= static_cast<double>(class_count);
  return stats;
}

Matrix naive_pinv(const Matrix& m, double rel_tol) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? rel_tol * s[0] : 0.0;
  Matrix inv = Matrix::Zero(m.cols(), m.rows());
  for (Index i = 0; i < s.size(); ++i) {
    if (s[i] > cutoff)
      inv += (1.0 / s[i]) * svd.matrixV().col(i) * svd.matrixU().col(i).transpose();
  }
  return inv;
}

double naive_nc1(const NaiveStats& stats, Index class_count, double rel_tol) {
  const Matrix pinv_b = naive_pinv(stats.sigma_b, rel_tol);
  return (pinv_b * stats.sigma_w).trace() / static_cast<double>(class_count);
}

double naive_nc2_norms(const NaiveStats& stats) {
  const Index class_count = stats.mu_c.rows();
  std::vector<double> norms;
  for (Index c = 0; c < class_count; ++c)
    norms.push_back((stats.mu_c.row(c).transpose() - stats.mu_g).norm());
  double avg = 0.0;
  for (const double v : norms) avg += v;
  avg /= static_cast<double>(norms.size());
  double var = 0.0;
  for (const double v : norms) var += (v - avg) * (v - avg);
  var /= static_cast<double>(norms.size());
  return std::sqrt(var) / avg;
}

double naive_nc2_angles(const NaiveStats& stats) {
  const Index class_count = stats.mu_c.rows();
  double total = 0.0;
  int pairs = 0;
  for (Index c = 0; c < class_count; ++c) {
    for (Index d = c + 1; d < class_count; ++d) {
      const Vector a = stats.mu_c.row(c).transpose() - stats.mu_g;
      const Vector b = stats.mu_c.row(d).transpose() - stats.mu_g;
      total += std::abs(a.dot(b) / (a.norm() * b.norm()) +
                        1.0 / static_cast<double>(class_count - 1));
      ++pairs;
    }
  }
  return total / pairs;
}

double naive_nc4(const Matrix& activations, const Matrix& mu_c,
                 std::span<const std::int32_t> predictions) {
  const Index n = activations.rows();
  Index disagreements = 0;
  for (Index i = 0; i < n; ++i) {
    Index best = 0;
    double best_dist = (activations.row(i) - mu_c.row(0)).squaredNorm();
    for (Index c = 1; c < mu_c.rows(); ++c) {
      const double dist = (activations.row(i) - mu_c.row(c)).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = c;
      }
    }
    if (best != static_cast<Index>(predictions[static_cast<std::size_t>(i)]))
      ++disagreements;
  }
  return static_cast<double>(disagreements) / static_cast<double>(n);
}

Gradients finite_difference_gradients(const MlpModel& model,
                                      const Matrix& batch,
                                      std::span<const std::int32_t> labels,
                                      double h) {
  MlpModel probe = model;
  auto loss = [&] { return mse_loss(forward(probe, batch).logits, labels); };

  Gradients grads(model.layers.size());
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    grads[k].weight.resize(model.layers[k].weight.rows(),
                           model.layers[k].weight.cols());
    grads[k].bias.resize(model.layers[k].bias.size());
    for (Index r = 0; r < grads[k].weight.rows(); ++r) {
      for (Index c = 0; c < grads[k].weight.cols(); ++c) {
        const double saved = probe.layers[k].weight(r, c);
        probe.layers[k].weight(r, c) = saved + h;
        const double up = loss();
        probe.layers[k].weight(r, c) = saved - h;
        const double down = loss();
        probe.layers[k].weight(r, c) = saved;
        grads[k].weight(r, c) = (up - down) / (2.0 * h);
      }
    }
    for (Index i = 0; i < grads[k].bias.size(); ++i) {
      const double saved = probe.layers[k].bias[i];
      probe.layers[k].bias[i] = saved + h;
      const double up = loss();
      probe.layers[k].bias[i] = saved - h;
      const double down = loss();
      probe.layers[k].bias[i] = saved;
      grads[k].bias[i] = (up - down) / (2.0 * h);
    }
  }
  return grads;
}

Matrix reference_forward_logits(const MlpModel& model, const Matrix& batch,
                                std::vector<Matrix>* hidden) {
  const Index n = batch.rows();
  if (hidden) hidden->clear();
  Matrix current = batch;
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    const LayerParams& layer = model.layers[k];
    const bool is_output = (k + 1 == model.layers.size());
    Matrix next(n, layer.weight.rows());
    for (Index i = 0; i < n; ++i) {
      for (Index o = 0; o < layer.weight.rows(); ++o) {
        double z = layer.bias[o];
        for (Index j = 0; j < layer.weight.cols(); ++j)
          z += layer.weight(o, j) * current(i, j);
        if (is_output) {
          next(i, o) = z;
        } else {
          switch (model.activation) {
            case Activation::kRelu:
              next(i, o) = z > 0.0 ? z : 0.0;
              break;
            case Activation::kTanh:
              next(i, o) = std::tanh(z);
              break;
            case Activation::kLeakyRelu:
              next(i, o) = z > 0.0 ? z : model.leaky_slope * z;
              break;
          }
        }
      }
    }
    if (!is_output && hidden) hidden->push_back(next);
    current = std::move(next);
  }
  return current;
}

Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng,
                     double scale) {
  std::normal_distribution<double> gauss(0.0, scale);
  Matrix out(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) out(r, c) = gauss(rng);
  return out;
}

Matrix random_orthogonal(Index dim, std::mt19937_64& rng) {
  const Matrix gaussian = random_matrix(dim, dim, rng);
  const Eigen::HouseholderQR<Matrix> qr(gaussian);
  return qr.householderQ();
}

std::vector<std::int32_t> random_labels(Index n, Index class_count,
                                        std::mt19937_64& rng) {
  std::uniform_int_distribution<std::int32_t> pick(
      0, static_cast<std::int32_t>(class_count) - 1);
  std::vector<std::int32_t> labels(static_cast<std::size_t>(n));
  for (auto& label : labels) label = pick(rng);
  return labels;
}

}  // namespace nc::testing
