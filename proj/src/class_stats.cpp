#include "nc/class_stats.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace nc {

Index ClassStatistics::total_count() const {
  return static_cast<Index>(
      std::accumulate(per_class_counts.begin(), per_class_counts.end(),
                      std::int64_t{0}));
}

StreamingClassAccumulator::StreamingClassAccumulator(Index class_count,
                                                     Index dim)
    : class_count_(class_count),
      dim_(dim),
      counts_(static_cast<std::size_t>(class_count), 0),
      sums_(Matrix::Zero(class_count, dim)),
      scatter_counts_(static_cast<std::size_t>(class_count), 0),
      within_acc_(Matrix::Zero(dim, dim)) {
  if (class_count < 1)
    throw std::invalid_argument("class accumulator: class_count must be >= 1");
  if (dim < 1)
    throw std::invalid_argument("class accumulator: dim must be >= 1");
}

void StreamingClassAccumulator::accumulate(
    const Eigen::Ref<const Matrix>& batch,
    std::span<const std::int32_t> labels) {
  if (batch.cols() != dim_)
    throw std::invalid_argument(
        "accumulate: batch has " + std::to_string(batch.cols()) +
        " columns, accumulator dim is " + std::to_string(dim_));
  if (batch.rows() != static_cast<Index>(labels.size()))
    throw std::invalid_argument(
        "accumulate: " + std::to_string(batch.rows()) + " rows vs " +
        std::to_string(labels.size()) + " labels");
  for (const std::int32_t label : labels)
    if (label < 0 || label >= class_count_)
      throw std::invalid_argument("accumulate: label " + std::to_string(label) +
                                  " out of range [0, " +
                                  std::to_string(class_count_) + ")");

  if (!scatter_pass_) {
    for (Index i = 0; i < batch.rows(); ++i) {
      const auto c = static_cast<Index>(labels[static_cast<std::size_t>(i)]);
      sums_.row(c) += batch.row(i);
      ++counts_[static_cast<std::size_t>(c)];
    }
    return;
  }

  Matrix centered(batch.rows(), dim_);
  for (Index i = 0; i < batch.rows(); ++i) {
    const auto c = static_cast<Index>(labels[static_cast<std::size_t>(i)]);
    centered.row(i) = batch.row(i) - class_means_.row(c);
    ++scatter_counts_[static_cast<std::size_t>(c)];
  }
  within_acc_.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(),
                                                         1.0);
}

void StreamingClassAccumulator::begin_scatter_pass() {
  if (scatter_pass_)
    throw std::logic_error("begin_scatter_pass: scatter pass already active");
  for (Index c = 0; c < class_count_; ++c)
    if (counts_[static_cast<std::size_t>(c)] == 0)
      throw std::runtime_error("class statistics: class " + std::to_string(c) +
                               " has no samples");
  class_means_ = sums_;
  for (Index c = 0; c < class_count_; ++c)
    class_means_.row(c) /=
        static_cast<double>(counts_[static_cast<std::size_t>(c)]);
  scatter_pass_ = true;
}

void StreamingClassAccumulator::merge(const StreamingClassAccumulator& other) {
  if (other.class_count_ != class_count_ || other.dim_ != dim_)
    throw std::invalid_argument("merge: accumulator shapes differ");
  if (other.scatter_pass_ != scatter_pass_)
    throw std::logic_error("merge: accumulators are in different passes");
  if (!scatter_pass_) {
    sums_ += other.sums_;
    for (std::size_t c = 0; c < counts_.size(); ++c)
      counts_[c] += other.counts_[c];
    return;
  }
  // Scatter-pass partials are clones sharing the frozen means-pass state;
  // only the scatter accumulators combine.
  if (counts_ != other.counts_ ||
      !class_means_.isApprox(other.class_means_, 0.0))
    throw std::logic_error("merge: scatter accumulators built on different means");
  within_acc_.triangularView<Eigen::Lower>() += other.within_acc_;
  for (std::size_t c = 0; c < scatter_counts_.size(); ++c)
    scatter_counts_[c] += other.scatter_counts_[c];
}

ClassStatistics StreamingClassAccumulator::finalize() const {
  if (!scatter_pass_)
    throw std::logic_error("finalize: scatter pass was never started");
  std::int64_t total = 0;
  for (Index c = 0; c < class_count_; ++c) {
    const auto idx = static_cast<std::size_t>(c);
    if (counts_[idx] == 0)
      throw std::runtime_error("class statistics: class " + std::to_string(c) +
                               " has no samples");
    if (counts_[idx] != scatter_counts_[idx])
      throw std::logic_error(
          "finalize: scatter pass saw " + std::to_string(scatter_counts_[idx]) +
          " samples for class " + std::to_string(c) + ", means pass saw " +
          std::to_string(counts_[idx]));
    total += counts_[idx];
  }

  ClassStatistics stats;
  stats.dim = dim_;
  stats.class_count = class_count_;
  stats.per_class_counts = counts_;
  stats.class_means = class_means_;
  stats.global_mean =
      sums_.colwise().sum().transpose() / static_cast<double>(total);

  stats.sigma_w = within_acc_.selfadjointView<Eigen::Lower>();
  stats.sigma_w /= static_cast<double>(total);

  const Matrix centered_means =
      class_means_.rowwise() - stats.global_mean.transpose();
  Matrix sigma_b = Matrix::Zero(dim_, dim_);
  sigma_b.selfadjointView<Eigen::Lower>().rankUpdate(
      centered_means.transpose(), 1.0 / static_cast<double>(class_count_));
  stats.sigma_b = sigma_b.selfadjointView<Eigen::Lower>();
  return stats;
}

ClassStatistics compute_class_statistics(
    const Eigen::Ref<const Matrix>& samples,
    std::span<const std::int32_t> labels, Index class_count) {
  StreamingClassAccumulator acc(class_count, samples.cols());
  acc.accumulate(samples, labels);
  acc.begin_scatter_pass();
  acc.accumulate(samples, labels);
  return acc.finalize();
}

}  // namespace nc
