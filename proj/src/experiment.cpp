#include "nc/experiment.hpp"

#include "nc/config.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

namespace nc {

namespace {

constexpr std::uint64_t kShuffleStream = 0x5u;

LabeledDataset build_dataset(const ExperimentConfig& config) {
  LabeledDataset ds;
  switch (config.data.source) {
    case DataConfig::Source::kSynthetic: {
      SyntheticSpec spec;
      spec.class_count = config.data.classes;
      spec.input_dim = config.data.dim;
      spec.per_class_n = config.data.per_class_n;
      spec.separation = config.data.separation;
      spec.noise_std = config.data.noise_std;
      spec.seed = config.seed_data;
      ds = synthesize(spec);
      break;
    }
    case DataConfig::Source::kIdx: {
      ds = load_idx(config.data.images_path, config.data.labels_path);
      if (config.data.per_class_n > 0)
        ds = rebalance(ds, config.data.per_class_n, config.seed_data);
      break;
    }
  }
  if (config.data.normalize) ds = normalize(ds).first;
  return ds;
}

int analysis_thread_cap() {
  if (const char* env = std::getenv("NC_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && parsed >= 1) return static_cast<int>(parsed);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::vector<std::int64_t> sanitize_checkpoints(
    const std::vector<std::int64_t>& requested, std::int64_t epochs) {
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < requested.size(); ++i) {
    const std::int64_t epoch = requested[i];
    if (epoch < 0 || epoch > epochs)
      throw std::invalid_argument("checkpoint epoch " + std::to_string(epoch) +
                                  " outside [0, " + std::to_string(epochs) +
                                  "]");
    if (i > 0 && epoch < requested[i - 1])
      throw std::invalid_argument("checkpoint epochs must be sorted");
    if (out.empty() || out.back() != epoch) out.push_back(epoch);
  }
  if (out.empty() || out.front() != 0) out.insert(out.begin(), 0);
  return out;
}

}  // namespace

std::vector<std::int64_t> default_checkpoint_epochs(std::int64_t epochs) {
  std::vector<std::int64_t> out{0};
  for (std::int64_t e = 1; e < epochs; e *= 2) out.push_back(e);
  if (epochs > 0) out.push_back(epochs);
  return out;
}

void validate_config(const ExperimentConfig& config) {
  if (config.epochs < 0)
    throw std::invalid_argument("config: epochs must be >= 0");
  if (config.batch_size < 1)
    throw std::invalid_argument("config: batch_size must be >= 1");
  if (config.depth < 1)
    throw std::invalid_argument("config: depth must be >= 1");
  if (config.width < 1)
    throw std::invalid_argument("config: width must be >= 1");
  if (config.coordinate_cap < 1)
    throw std::invalid_argument("config: coordinate_cap must be >= 1");
  if (!(config.max_lr > 0.0))
    throw std::invalid_argument("config: max_lr must be > 0");
  if (!(config.start_div > 0.0) || !(config.final_div > 0.0))
    throw std::invalid_argument("config: start_div and final_div must be > 0");
  if (config.warmup_fraction < 0.0 || config.warmup_fraction > 1.0)
    throw std::invalid_argument("config: warmup_fraction must be in [0, 1]");
  if (config.momentum < 0.0 || config.momentum >= 1.0)
    throw std::invalid_argument("config: momentum must be in [0, 1)");
  if (config.weight_decay < 0.0)
    throw std::invalid_argument("config: weight_decay must be >= 0");
  if (config.data.source == DataConfig::Source::kSynthetic &&
      config.data.per_class_n < 1)
    throw std::invalid_argument(
        "config: synthetic data needs per_class_n >= 1");
  sanitize_checkpoints(config.checkpoint_epochs, config.epochs);
}

std::vector<LayerMetrics> analyze_trace(const ForwardTrace& trace,
                                        std::span<const std::int32_t> labels,
                                        std::span<const std::int32_t> predictions,
                                        Index class_count,
                                        const LayerAnalysisOptions& options) {
  const std::size_t layer_count = trace.hidden.size();
  std::vector<LayerMetrics> out(layer_count);
  auto analyze_one = [&](std::size_t j) {
    out[j] = analyze_layer(trace.hidden[j], labels, predictions, class_count,
                           options);
    out[j].layer = static_cast<Index>(j) + 1;
  };

  const int workers = static_cast<int>(
      std::min<std::size_t>(analysis_thread_cap(), layer_count));
  if (workers <= 1) {
    for (std::size_t j = 0; j < layer_count; ++j) analyze_one(j);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t j = next.fetch_add(1);
        if (j >= layer_count) return;
        try {
          analyze_one(j);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& thread : pool) thread.join();
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

NcReport run(const ExperimentConfig& config, const CheckpointSink& sink,
             MlpModel* trained_model) {
  validate_config(config);

  const LabeledDataset ds = build_dataset(config);
  if (ds.class_count < 2)
    throw std::runtime_error("run: dataset has " +
                             std::to_string(ds.class_count) +
                             " classes, need at least 2");

  MlpConfig arch;
  arch.input_dim = ds.input_dim();
  arch.class_count = ds.class_count;
  arch.hidden_widths.assign(static_cast<std::size_t>(config.depth),
                            config.width);
  arch.activation = config.activation;
  arch.leaky_slope = config.leaky_slope;
  MlpModel model = init_model(arch, config.seed_model);

  const Index n = ds.size();
  const std::int64_t steps_per_epoch =
      (n + config.batch_size - 1) / config.batch_size;
  const OneCycleSchedule schedule{config.max_lr,
                                  config.epochs * steps_per_epoch,
                                  config.warmup_fraction, config.start_div,
                                  config.final_div};
  SgdState state(model, config.momentum, config.weight_decay);

  const std::vector<std::int64_t> checkpoints =
      config.checkpoint_epochs.empty()
          ? default_checkpoint_epochs(config.epochs)
          : sanitize_checkpoints(config.checkpoint_epochs, config.epochs);

  NcReport report;
  report.effective_config = to_key_values(config);
  report.fingerprint = config_fingerprint(report.effective_config);

  const LayerAnalysisOptions analysis{config.coordinate_cap,
                                      config.seed_subsample, 0.0};

  auto run_checkpoint = [&](std::int64_t epoch) {
    const ForwardTrace trace = forward(model, ds.inputs);
    if (!trace.logits.allFinite())
      throw std::runtime_error("run: non-finite activations at epoch " +
                               std::to_string(epoch) +
                               " (training diverged; lower max_lr)");
    const std::vector<std::int32_t> predictions = predict(trace.logits);
    CheckpointRecord record;
    record.epoch = epoch;
    record.train_error = error_fraction(predictions, ds.labels);
    if (report.tpt_epoch && record.train_error > 0.0)
      std::cerr << "warning: train error rebounded to " << record.train_error
                << " at epoch " << epoch << " after reaching zero at epoch "
                << *report.tpt_epoch << "\n";
    record.layers =
        analyze_trace(trace, ds.labels, predictions, ds.class_count, analysis);
    report.checkpoints.push_back(std::move(record));
    report.tpt_epoch = detect_tpt(report);
    if (sink) sink(report);
  };

  run_checkpoint(0);

  // The shuffle stream is private to training; checkpoints never draw from
  // it, so the checkpoint schedule cannot perturb the trajectory.
  std::mt19937_64 shuffle_rng(derive_seed(config.seed_data, kShuffleStream));
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});

  std::int64_t step = 0;
  std::size_t next_checkpoint = 1;  // index into checkpoints; 0 already done
  for (std::int64_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (Index start = 0; start < n; start += config.batch_size) {
      const Index rows = std::min<Index>(config.batch_size, n - start);
      Matrix batch(rows, ds.input_dim());
      std::vector<std::int32_t> batch_labels(static_cast<std::size_t>(rows));
      for (Index r = 0; r < rows; ++r) {
        const Index src = order[static_cast<std::size_t>(start + r)];
        batch.row(r) = ds.inputs.row(src);
        batch_labels[static_cast<std::size_t>(r)] =
            ds.labels[static_cast<std::size_t>(src)];
      }
      const Gradients grads = backward(model, batch, batch_labels);
      sgd_step(model, grads, state, lr_at(schedule, step));
      ++step;
    }
    while (next_checkpoint < checkpoints.size() &&
           checkpoints[next_checkpoint] == epoch) {
      run_checkpoint(epoch);
      ++next_checkpoint;
    }
  }

  if (trained_model) *trained_model = std::move(model);
  return report;
}

std::optional<std::int64_t> detect_tpt(const NcReport& report) {
  for (const CheckpointRecord& record : report.checkpoints)
    if (record.train_error == 0.0) return record.epoch;
  return std::nullopt;
}

namespace {

Index plateau_onset(const std::vector<double>& values) {
  const auto layer_count = static_cast<Index>(values.size());
  Index onset = 1;
  for (Index k = 1; k < layer_count; ++k) {
    const double prev = values[static_cast<std::size_t>(k - 1)];
    const double delta =
        std::abs(values[static_cast<std::size_t>(k)] - prev);
    const bool settled =
        delta == 0.0 ? true : (prev != 0.0 && delta / std::abs(prev) < 0.1);
    if (!settled) onset = k + 1;  // change (k-1)->(k) too large; 1-based
  }
  return onset;
}

}  // namespace

std::vector<MetricTrend> trend_summary(const NcReport& report) {
  if (report.checkpoints.empty())
    throw std::invalid_argument("trend_summary: report has no checkpoints");
  const CheckpointRecord& last = report.checkpoints.back();
  if (last.layers.empty())
    throw std::invalid_argument("trend_summary: final checkpoint has no layers");

  const std::vector<std::pair<std::string, double LayerMetrics::*>> fields = {
      {"nc1", &LayerMetrics::nc1},
      {"nc2_norms", &LayerMetrics::nc2_equal_norms},
      {"nc2_angles", &LayerMetrics::nc2_max_angles},
      {"nc4", &LayerMetrics::nc4},
  };

  std::vector<MetricTrend> trends;
  trends.reserve(fields.size());
  for (const auto& [name, field] : fields) {
    std::vector<double> values;
    values.reserve(last.layers.size());
    for (const LayerMetrics& layer : last.layers) values.push_back(layer.*field);

    MetricTrend trend;
    trend.metric = name;
    if (values.front() != 0.0)
      trend.first_to_last_ratio = values.back() / values.front();
    else
      trend.first_to_last_ratio =
          values.back() == 0.0 ? 1.0
                               : std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < values.size(); ++j)
      trend.deltas.push_back(values[j + 1] - values[j]);
    trend.plateau_onset = plateau_onset(values);
    trends.push_back(std::move(trend));
  }
  return trends;
}

}  // namespace nc
