#include "nc/metrics.hpp"

#include "nc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace nc {

double nc1(const ClassStatistics& stats, double rel_tol) {
  const Matrix pinv_b = pseudoinverse(stats.sigma_b, rel_tol);
  // Tr(A B) = sum(A .* B) for symmetric A, B.
  double value = pinv_b.cwiseProduct(stats.sigma_w).sum() /
                 static_cast<double>(stats.class_count);
  if (value < 0.0 && value > -1e-10) value = 0.0;
  return value;
}

double nc1(const ClassStatistics& stats) {
  return nc1(stats, default_pinv_rel_tol(stats.dim));
}

namespace {

Vector centered_mean_norms(const ClassStatistics& stats) {
  return (stats.class_means.rowwise() - stats.global_mean.transpose())
      .rowwise()
      .norm();
}

}  // namespace

double nc2_equal_norms(const ClassStatistics& stats) {
  if (stats.class_count < 2)
    throw std::invalid_argument("nc2_equal_norms: need at least 2 classes");
  const Vector norms = centered_mean_norms(stats);
  const double avg = norms.mean();
  if (avg <= 0.0)
    throw std::runtime_error(
        "nc2_equal_norms: degenerate class means (all centered norms zero)");
  const double variance = (norms.array() - avg).square().mean();
  return std::sqrt(variance) / avg;
}

double nc2_max_angles(const ClassStatistics& stats) {
  const Index c_count = stats.class_count;
  if (c_count < 2)
    throw std::invalid_argument("nc2_max_angles: need at least 2 classes");
  const Matrix centered =
      stats.class_means.rowwise() - stats.global_mean.transpose();
  const Vector norms = centered.rowwise().norm();
  for (Index c = 0; c < c_count; ++c)
    if (norms[c] <= 0.0)
      throw std::runtime_error("nc2_max_angles: class " + std::to_string(c) +
                               " has a zero centered mean");
  const double target = 1.0 / static_cast<double>(c_count - 1);
  double total = 0.0;
  std::int64_t pairs = 0;
  for (Index c = 0; c < c_count; ++c) {
    for (Index d = c + 1; d < c_count; ++d) {
      const double cosine =
          centered.row(c).dot(centered.row(d)) / (norms[c] * norms[d]);
      total += std::abs(cosine + target);
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

double nc4(const Eigen::Ref<const Matrix>& activations,
           const Eigen::Ref<const Matrix>& class_means,
           std::span<const std::int32_t> predictions) {
  const Index n = activations.rows();
  if (n == 0) throw std::invalid_argument("nc4: no samples");
  if (n != static_cast<Index>(predictions.size()))
    throw std::invalid_argument(
        "nc4: " + std::to_string(n) + " activation rows vs " +
        std::to_string(predictions.size()) + " predictions");
  if (activations.cols() != class_means.cols())
    throw std::invalid_argument(
        "nc4: activation dim " + std::to_string(activations.cols()) +
        " vs class-mean dim " + std::to_string(class_means.cols()));

  const Index c_count = class_means.rows();
  std::int64_t agreements = 0;
  for (Index i = 0; i < n; ++i) {
    Index best = 0;
    double best_dist = (activations.row(i) - class_means.row(0)).squaredNorm();
    for (Index c = 1; c < c_count; ++c) {
      const double dist =
          (activations.row(i) - class_means.row(c)).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = c;
      }
    }
    if (best == static_cast<Index>(predictions[static_cast<std::size_t>(i)]))
      ++agreements;
  }
  return 1.0 - static_cast<double>(agreements) / static_cast<double>(n);
}

CoordinateSubsample subsample_coordinates(Index dim, Index cap,
                                          std::uint64_t seed) {
  if (cap < 1)
    throw std::invalid_argument("subsample_coordinates: cap must be >= 1");
  if (dim < 1)
    throw std::invalid_argument("subsample_coordinates: dim must be >= 1");
  CoordinateSubsample out;
  out.source_dim = dim;
  out.seed = seed;
  out.indices.resize(static_cast<std::size_t>(dim));
  std::iota(out.indices.begin(), out.indices.end(), Index{0});
  if (dim <= cap) return out;

  // Partial Fisher-Yates: the first cap slots become a uniform sample
  // without replacement.
  std::mt19937_64 rng(seed);
  for (Index i = 0; i < cap; ++i) {
    std::uniform_int_distribution<Index> pick(i, dim - 1);
    std::swap(out.indices[static_cast<std::size_t>(i)],
              out.indices[static_cast<std::size_t>(pick(rng))]);
  }
  out.indices.resize(static_cast<std::size_t>(cap));
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

Matrix select_columns(const Eigen::Ref<const Matrix>& m,
                      const std::vector<Index>& indices) {
  Matrix out(m.rows(), static_cast<Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j)
    out.col(static_cast<Index>(j)) = m.col(indices[j]);
  return out;
}

LayerMetrics analyze_layer(const Eigen::Ref<const Matrix>& activations,
                           std::span<const std::int32_t> labels,
                           std::span<const std::int32_t> predictions,
                           Index class_count,
                           const LayerAnalysisOptions& options) {
  if (class_count < 2)
    throw std::invalid_argument("analyze_layer: need at least 2 classes, got " +
                                std::to_string(class_count));
  const Index n = activations.rows();
  if (n == 0) throw std::invalid_argument("analyze_layer: no samples");
  if (n != static_cast<Index>(labels.size()) ||
      n != static_cast<Index>(predictions.size()))
    throw std::invalid_argument(
        "analyze_layer: " + std::to_string(n) + " rows vs " +
        std::to_string(labels.size()) + " labels / " +
        std::to_string(predictions.size()) + " predictions");
  for (const std::int32_t p : predictions)
    if (p < 0 || p >= class_count)
      throw std::invalid_argument("analyze_layer: prediction " +
                                  std::to_string(p) + " out of range [0, " +
                                  std::to_string(class_count) + ")");

  const CoordinateSubsample sub = subsample_coordinates(
      activations.cols(), options.coordinate_cap, options.subsample_seed);
  const Matrix reduced =
      sub.is_identity() ? Matrix() : select_columns(activations, sub.indices);
  const Eigen::Ref<const Matrix> view =
      sub.is_identity() ? activations : Eigen::Ref<const Matrix>(reduced);

  const ClassStatistics stats =
      compute_class_statistics(view, labels, class_count);
  const double rel_tol = options.pinv_rel_tol > 0.0
                             ? options.pinv_rel_tol
                             : default_pinv_rel_tol(stats.dim);

  LayerMetrics metrics;
  metrics.nc1 = nc1(stats, rel_tol);
  metrics.nc2_equal_norms = nc2_equal_norms(stats);
  metrics.nc2_max_angles = nc2_max_angles(stats);
  metrics.nc4 = nc4(view, stats.class_means, predictions);
  return metrics;
}

}  // namespace nc
