#include "nc/dataset.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace nc {

std::vector<std::int64_t> LabeledDataset::per_class_counts() const {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(class_count), 0);
  for (const std::int32_t label : labels)
    ++counts[static_cast<std::size_t>(label)];
  return counts;
}

namespace {

struct IdxFile {
  std::vector<Index> dims;
  std::vector<std::uint8_t> data;
};

std::uint32_t read_be_u32(std::ifstream& in, const std::string& path) {
  std::uint8_t bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4))
    throw std::runtime_error("idx: truncated header in " + path);
  return (std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) |
         (std::uint32_t{bytes[2]} << 8) | std::uint32_t{bytes[3]};
}

// IDX: big-endian magic whose third byte is the dtype (0x08 = unsigned byte)
// and low byte the rank, followed by rank u32 dims and raw data.
IdxFile read_idx_u8(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("idx: cannot open " + path);
  const std::uint32_t magic = read_be_u32(in, path);
  const std::uint32_t dtype = (magic >> 8) & 0xff;
  const std::uint32_t rank = magic & 0xff;
  if ((magic >> 16) != 0 || dtype != 0x08 || rank < 1 || rank > 4)
    throw std::runtime_error("idx: bad magic in " + path);

  IdxFile file;
  std::size_t total = 1;
  for (std::uint32_t d = 0; d < rank; ++d) {
    const std::uint32_t extent = read_be_u32(in, path);
    file.dims.push_back(static_cast<Index>(extent));
    total *= extent;
  }
  file.data.resize(total);
  if (!in.read(reinterpret_cast<char*>(file.data.data()),
               static_cast<std::streamsize>(total)))
    throw std::runtime_error("idx: truncated data in " + path);
  return file;
}

}  // namespace

LabeledDataset load_idx(const std::string& images_path,
                        const std::string& labels_path) {
  const IdxFile images = read_idx_u8(images_path);
  if (images.dims.size() < 2)
    throw std::runtime_error("idx: " + images_path +
                             " is not an image file (rank < 2)");
  const IdxFile labels = read_idx_u8(labels_path);
  if (labels.dims.size() != 1)
    throw std::runtime_error("idx: " + labels_path +
                             " is not a label file (rank != 1)");
  const Index n = images.dims[0];
  if (n != labels.dims[0])
    throw std::runtime_error(
        "idx: " + std::to_string(n) + " images in " + images_path + " vs " +
        std::to_string(labels.dims[0]) + " labels in " + labels_path);
  if (n == 0) throw std::runtime_error("idx: empty dataset in " + images_path);

  Index dim = 1;
  for (std::size_t d = 1; d < images.dims.size(); ++d) dim *= images.dims[d];

  LabeledDataset ds;
  ds.inputs.resize(n, dim);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < dim; ++j)
      ds.inputs(i, j) =
          static_cast<double>(
              images.data[static_cast<std::size_t>(i * dim + j)]) /
          255.0;

  ds.labels.resize(static_cast<std::size_t>(n));
  std::int32_t max_label = 0;
  for (Index i = 0; i < n; ++i) {
    const auto label =
        static_cast<std::int32_t>(labels.data[static_cast<std::size_t>(i)]);
    ds.labels[static_cast<std::size_t>(i)] = label;
    max_label = std::max(max_label, label);
  }
  ds.class_count = max_label + 1;
  return ds;
}

LabeledDataset rebalance(const LabeledDataset& ds, Index per_class_n,
                         std::uint64_t seed) {
  if (per_class_n < 1)
    throw std::invalid_argument("rebalance: per_class_n must be >= 1");

  std::vector<std::vector<Index>> by_class(
      static_cast<std::size_t>(ds.class_count));
  for (Index i = 0; i < ds.size(); ++i)
    by_class[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])]
        .push_back(i);
  for (Index c = 0; c < ds.class_count; ++c) {
    const auto available =
        static_cast<Index>(by_class[static_cast<std::size_t>(c)].size());
    if (available < per_class_n)
      throw std::runtime_error("rebalance: class " + std::to_string(c) +
                               " has " + std::to_string(available) +
                               " samples, need " + std::to_string(per_class_n));
  }

  std::mt19937_64 rng(seed);
  LabeledDataset out;
  out.class_count = ds.class_count;
  out.inputs.resize(ds.class_count * per_class_n, ds.input_dim());
  out.labels.resize(static_cast<std::size_t>(ds.class_count * per_class_n));

  Index row = 0;
  for (Index c = 0; c < ds.class_count; ++c) {
    auto& pool = by_class[static_cast<std::size_t>(c)];
    for (Index i = 0; i < per_class_n; ++i) {
      std::uniform_int_distribution<Index> pick(
          i, static_cast<Index>(pool.size()) - 1);
      std::swap(pool[static_cast<std::size_t>(i)],
                pool[static_cast<std::size_t>(pick(rng))]);
    }
    pool.resize(static_cast<std::size_t>(per_class_n));
    std::sort(pool.begin(), pool.end());  // original index order within class
    for (const Index src : pool) {
      out.inputs.row(row) = ds.inputs.row(src);
      out.labels[static_cast<std::size_t>(row)] =
          ds.labels[static_cast<std::size_t>(src)];
      ++row;
    }
  }
  return out;
}

std::pair<LabeledDataset, NormalizationStats> normalize(
    const LabeledDataset& ds) {
  if (ds.size() < 2)
    throw std::invalid_argument("normalize: need at least 2 samples");

  NormalizationStats stats;
  stats.mean = ds.inputs.colwise().mean().transpose();
  const Matrix centered = ds.inputs.rowwise() - stats.mean.transpose();
  stats.std = (centered.array().square().colwise().mean())
                  .sqrt()
                  .matrix()
                  .transpose();

  LabeledDataset out = ds;
  out.inputs = centered;
  for (Index j = 0; j < out.input_dim(); ++j)
    if (stats.std[j] >= 1e-12) out.inputs.col(j) /= stats.std[j];
  return {std::move(out), std::move(stats)};
}

Matrix simplex_means(Index class_count, Index input_dim, double radius) {
  if (class_count < 2)
    throw std::invalid_argument("simplex_means: need at least 2 classes");
  if (input_dim < class_count - 1)
    throw std::invalid_argument(
        "simplex_means: input_dim " + std::to_string(input_dim) +
        " cannot embed a " + std::to_string(class_count) + "-class simplex");
  if (!(radius > 0.0))
    throw std::invalid_argument("simplex_means: radius must be > 0");

  const auto c = static_cast<double>(class_count);
  // Centered one-hot vertices span the (C-1)-dim simplex plane; rotate them
  // into explicit coordinates via the plane's orthonormal basis.
  const Matrix centered = Matrix::Identity(class_count, class_count) -
                          Matrix::Constant(class_count, class_count, 1.0 / c);
  Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeThinU);
  Matrix coords =
      svd.matrixU().leftCols(class_count - 1).transpose() * centered;

  // Fix each axis orientation so the construction is unambiguous.
  for (Index r = 0; r < coords.rows(); ++r) {
    for (Index j = 0; j < coords.cols(); ++j) {
      if (std::abs(coords(r, j)) > 1e-9) {
        if (coords(r, j) < 0.0) coords.row(r) = -coords.row(r);
        break;
      }
    }
  }

  Matrix means = Matrix::Zero(class_count, input_dim);
  for (Index k = 0; k < class_count; ++k)
    means.row(k).head(class_count - 1) =
        coords.col(k).transpose() * (radius / coords.col(k).norm());
  return means;
}

LabeledDataset synthesize(const SyntheticSpec& spec) {
  if (spec.per_class_n < 1)
    throw std::invalid_argument("synthesize: per_class_n must be >= 1");
  if (!(spec.noise_std > 0.0))
    throw std::invalid_argument("synthesize: noise_std must be > 0");
  const Matrix means =
      simplex_means(spec.class_count, spec.input_dim, spec.separation);

  const Index n = spec.class_count * spec.per_class_n;
  LabeledDataset ds;
  ds.class_count = spec.class_count;
  ds.inputs.resize(n, spec.input_dim);
  ds.labels.resize(static_cast<std::size_t>(n));

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Index row = 0;
  for (Index c = 0; c < spec.class_count; ++c) {
    for (Index i = 0; i < spec.per_class_n; ++i) {
      for (Index j = 0; j < spec.input_dim; ++j)
        ds.inputs(row, j) = means(c, j) + spec.noise_std * gauss(rng);
      ds.labels[static_cast<std::size_t>(row)] = static_cast<std::int32_t>(c);
      ++row;
    }
  }
  return ds;
}

}  // namespace nc
