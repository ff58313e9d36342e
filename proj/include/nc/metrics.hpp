#pragma once

#include "nc/class_stats.hpp"
#include "nc/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace nc {

struct LayerMetrics {
  Index layer = 0;  // 1-based depth; filled in by callers that know it
  double nc1 = 0.0;
  double nc2_equal_norms = 0.0;
  double nc2_max_angles = 0.0;
  double nc4 = 0.0;
};

// Tr(sigma_b^+ sigma_w) / C. Tiny negative round-off (> -1e-10) is clamped
// to zero. The division by C sits outside the trace, which equals placing it
// on sigma_w by linearity.
double nc1(const ClassStatistics& stats, double rel_tol);
double nc1(const ClassStatistics& stats);

// Coefficient of variation of the centered class-mean norms, with the
// population (1/C) standard deviation: C is the whole population of classes.
double nc2_equal_norms(const ClassStatistics& stats);

// Average over unordered class pairs of |cos(mu_c - mu_G, mu_c' - mu_G) +
// 1/(C-1)|; zero means the centered means are maximally, equally separated.
double nc2_max_angles(const ClassStatistics& stats);

// Fraction of samples where the network prediction disagrees with the
// nearest-class-center rule on this layer's activations. Distance ties pick
// the lowest class index.
double nc4(const Eigen::Ref<const Matrix>& activations,
           const Eigen::Ref<const Matrix>& class_means,
           std::span<const std::int32_t> predictions);

struct CoordinateSubsample {
  Index source_dim = 0;
  std::uint64_t seed = 0;
  std::vector<Index> indices;  // strictly increasing, unique, < source_dim

  bool is_identity() const {
    return static_cast<Index>(indices.size()) == source_dim;
  }
};

// Identity selection when dim <= cap, otherwise cap coordinates drawn
// uniformly without replacement, sorted.
CoordinateSubsample subsample_coordinates(Index dim, Index cap,
                                          std::uint64_t seed);

Matrix select_columns(const Eigen::Ref<const Matrix>& m,
                      const std::vector<Index>& indices);

struct LayerAnalysisOptions {
  Index coordinate_cap = 2048;
  std::uint64_t subsample_seed = 0;
  double pinv_rel_tol = 0.0;  // <= 0 selects default_pinv_rel_tol(dim)
};

// Applies the coordinate subsample, builds ClassStatistics over the layer's
// activations, and evaluates all four collapse metrics.
LayerMetrics analyze_layer(const Eigen::Ref<const Matrix>& activations,
                           std::span<const std::int32_t> labels,
                           std::span<const std::int32_t> predictions,
                           Index class_count,
                           const LayerAnalysisOptions& options = {});

}  // namespace nc
