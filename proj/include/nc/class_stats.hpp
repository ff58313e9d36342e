#pragma once

#include "nc/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace nc {

// Per-layer first- and second-order statistics of labeled feature vectors:
// global mean, class means, pooled within-class scatter and between-class
// scatter. Scatters are normalized averages (1/N over samples, 1/C over
// classes) and exactly symmetric.
struct ClassStatistics {
  Index dim = 0;
  Index class_count = 0;
  Vector global_mean;   // dim
  Matrix class_means;   // class_count x dim, row c = mean of class c
  Matrix sigma_w;       // dim x dim, pooled within-class scatter
  Matrix sigma_b;       // dim x dim, between-class scatter
  std::vector<std::int64_t> per_class_counts;

  Index total_count() const;
};

// Two-pass streaming accumulator. Feed every batch once, call
// begin_scatter_pass(), feed the same data again, then finalize().
// The first pass fixes per-class means; the second accumulates centered
// outer products against those means.
class StreamingClassAccumulator {
 public:
  StreamingClassAccumulator(Index class_count, Index dim);

  void accumulate(const Eigen::Ref<const Matrix>& batch,
                  std::span<const std::int32_t> labels);
  void begin_scatter_pass();
  ClassStatistics finalize() const;

  // Combines a partial accumulator over disjoint data. Both sides must be in
  // the same pass; scatter-pass accumulators must share the same means.
  void merge(const StreamingClassAccumulator& other);

  Index class_count() const { return class_count_; }
  Index dim() const { return dim_; }
  bool in_scatter_pass() const { return scatter_pass_; }

 private:
  Index class_count_;
  Index dim_;
  bool scatter_pass_ = false;
  std::vector<std::int64_t> counts_;
  Matrix sums_;  // class_count x dim
  std::vector<std::int64_t> scatter_counts_;
  Matrix class_means_;  // fixed by begin_scatter_pass()
  Matrix within_acc_;   // dim x dim, lower triangle holds the running sum
};

// Runs both passes over an in-memory sample matrix (rows = samples).
ClassStatistics compute_class_statistics(const Eigen::Ref<const Matrix>& samples,
                                         std::span<const std::int32_t> labels,
                                         Index class_count);

}  // namespace nc
