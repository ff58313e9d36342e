#pragma once

#include "nc/experiment.hpp"
#include "nc/mlp.hpp"
#include "nc/types.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nc {

// Raised for unreadable, truncated, or malformed files (distinct from
// runtime failures so the CLI can map it to the usage exit code).
struct FileFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- model snapshot ("NCMD", version 1, little-endian) ----
// magic, version u32, layer count u32, dims u32[layer_count+1],
// activation tag u32, leaky slope f64, then per layer the weight matrix
// row-major and the bias vector as f64.

void save_model(const std::string& path, const MlpModel& model);
MlpModel load_model(const std::string& path);

// ---- activation dump ("NCAD", version 1, little-endian) ----
// magic, version u32, N u64, p u64, C u32, dtype u32 (0=f32, 1=f64),
// N labels u32, N network predictions u32, N*p activations row-major.

enum class DumpScalar : std::uint32_t { kF32 = 0, kF64 = 1 };

struct ActivationDump {
  Matrix activations;  // N x p, held as f64 regardless of storage dtype
  std::vector<std::int32_t> labels;
  std::vector<std::int32_t> predictions;
  Index class_count = 0;
  DumpScalar scalar = DumpScalar::kF64;
};

void write_activation_dump(const std::string& path, const ActivationDump& dump);
ActivationDump read_activation_dump(const std::string& path);

// ---- report persistence ----

void write_report_json(const std::string& path, const NcReport& report);
NcReport read_report_json(const std::string& path);

// One row per (checkpoint, layer):
// epoch,layer,nc1,nc2_norms,nc2_angles,nc4,train_error
std::string report_csv_string(const NcReport& report);
void write_report_csv(const std::string& path, const NcReport& report);

// Per-metric TSV tables (layer rows, one value column per checkpoint epoch)
// plus trend_summary.tsv; returns the paths written.
std::vector<std::string> write_plot_data(const std::string& out_dir,
                                         const NcReport& report);

// 17 significant digits; round-trips any double exactly.
std::string format_real(double value);

}  // namespace nc
