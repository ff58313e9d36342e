#pragma once

#include "nc/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace nc {

struct LabeledDataset {
  Matrix inputs;  // N x input_dim, one flattened sample per row
  std::vector<std::int32_t> labels;
  Index class_count = 0;

  Index size() const { return inputs.rows(); }
  Index input_dim() const { return inputs.cols(); }
  std::vector<std::int64_t> per_class_counts() const;
};

// Reads an IDX image/label file pair (the MNIST/FashionMNIST distribution
// format). Pixels are flattened row-major and scaled to [0,1].
LabeledDataset load_idx(const std::string& images_path,
                        const std::string& labels_path);

// Uniform per-class subsample without replacement. Output is ordered
// class-major, preserving original index order within a class.
LabeledDataset rebalance(const LabeledDataset& ds, Index per_class_n,
                         std::uint64_t seed);

struct NormalizationStats {
  Vector mean;  // per-dimension mean of the input set
  Vector std;   // per-dimension population std
};

// Per-dimension standardization to mean 0 / std 1. Dimensions with
// std < 1e-12 are centered but not divided.
std::pair<LabeledDataset, NormalizationStats> normalize(
    const LabeledDataset& ds);

struct SyntheticSpec {
  Index class_count = 4;
  Index input_dim = 32;
  Index per_class_n = 500;
  double separation = 4.0;  // radius of the class-mean simplex
  double noise_std = 1.0;
  std::uint64_t seed = 0;
};

// Class means of a regular simplex with the given radius, embedded in the
// first class_count-1 input dimensions. Requires input_dim >= class_count-1.
Matrix simplex_means(Index class_count, Index input_dim, double radius);

// Gaussian mixture around simplex_means, class-major sample order.
LabeledDataset synthesize(const SyntheticSpec& spec);

}  // namespace nc
