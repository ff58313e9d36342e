#pragma once

#include "nc/dataset.hpp"
#include "nc/metrics.hpp"
#include "nc/mlp.hpp"
#include "nc/optimizer.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nc {

struct DataConfig {
  enum class Source { kSynthetic, kIdx };
  Source source = Source::kSynthetic;

  // idx source
  std::string images_path;
  std::string labels_path;

  // per-class sample count; for idx sources 0 means "keep everything",
  // otherwise rebalance to exactly this many per class
  Index per_class_n = 500;

  bool normalize = true;

  // synthetic source
  Index classes = 4;
  Index dim = 32;
  double separation = 4.0;
  double noise_std = 1.0;
};

struct ExperimentConfig {
  Index depth = 6;  // hidden layer count
  Index width = 64;
  Activation activation = Activation::kRelu;
  double leaky_slope = 0.01;

  DataConfig data;

  double momentum = 0.9;
  double weight_decay = 1e-5;
  double max_lr = 0.05;
  double warmup_fraction = 0.3;
  double start_div = 25.0;
  double final_div = 1e4;

  std::int64_t epochs = 64;
  Index batch_size = 128;

  // empty -> log-spaced {0,1,2,4,...,epochs}; explicit lists must be sorted
  // and within [0, epochs]; epoch 0 is always added
  std::vector<std::int64_t> checkpoint_epochs;

  Index coordinate_cap = 2048;

  std::uint64_t seed_model = 1;
  std::uint64_t seed_data = 2;
  std::uint64_t seed_subsample = 3;
};

struct CheckpointRecord {
  std::int64_t epoch = 0;
  double train_error = 0.0;
  std::vector<LayerMetrics> layers;  // ordered by depth, 1-based layer index
};

struct NcReport {
  std::vector<CheckpointRecord> checkpoints;  // strictly increasing epochs
  std::optional<std::int64_t> tpt_epoch;
  std::string fingerprint;
  std::vector<std::pair<std::string, std::string>> effective_config;
};

using CheckpointSink = std::function<void(const NcReport&)>;

std::vector<std::int64_t> default_checkpoint_epochs(std::int64_t epochs);

// Field-level sanity checks (ranges, sortedness of the checkpoint list).
// run() applies this first; the CLI applies it while config errors still map
// to the usage exit code.
void validate_config(const ExperimentConfig& config);

// Trains per the config, pausing at every checkpoint epoch to freeze the
// network, forward the full training set, and record the four collapse
// metrics for every hidden layer. Epoch 0 records the initialized model.
// The sink, when set, is invoked with the growing report after each
// checkpoint (cheap crash-resilient persistence). If trained_model is
// non-null it receives the final parameters.
NcReport run(const ExperimentConfig& config, const CheckpointSink& sink = {},
             MlpModel* trained_model = nullptr);

// First checkpoint epoch with zero training error.
std::optional<std::int64_t> detect_tpt(const NcReport& report);

struct MetricTrend {
  std::string metric;
  double first_to_last_ratio = 0.0;
  std::vector<double> deltas;  // value[j+1] - value[j] over layer depth
  Index plateau_onset = 0;     // first 1-based layer after which every
                               // successive relative change is < 10%
};

// Layer-depth trend descriptors for the final checkpoint.
std::vector<MetricTrend> trend_summary(const NcReport& report);

// Per-layer metrics for every captured hidden layer of one trace; layer jobs
// may fan out across threads (capped by NC_THREADS), results are ordered by
// depth regardless of completion order.
std::vector<LayerMetrics> analyze_trace(const ForwardTrace& trace,
                                        std::span<const std::int32_t> labels,
                                        std::span<const std::int32_t> predictions,
                                        Index class_count,
                                        const LayerAnalysisOptions& options);

}  // namespace nc
