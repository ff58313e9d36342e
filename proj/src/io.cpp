#include "nc/io.hpp"

#include <json.hpp>

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace nc {

namespace {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; add byte swapping for this host");

template <typename T>
void write_pod(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
  T value;
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw FileFormatError("truncated file: " + path);
  return value;
}

void write_magic(std::ofstream& out, const char magic[5]) {
  out.write(magic, 4);
}

void expect_magic(std::ifstream& in, const char magic[5],
                  const std::string& path) {
  char buffer[4];
  if (!in.read(buffer, 4) || std::memcmp(buffer, magic, 4) != 0)
    throw FileFormatError("bad magic in " + path + " (expected " +
                          std::string(magic, 4) + ")");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileFormatError("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileFormatError("cannot open: " + path);
  return in;
}

void write_matrix_rowmajor(std::ofstream& out,
                           const Eigen::Ref<const Matrix>& m) {
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) write_pod<double>(out, m(r, c));
}

constexpr std::uint32_t kSnapshotVersion = 1;
constexpr std::uint32_t kDumpVersion = 1;

std::uint32_t activation_tag(Activation kind) {
  switch (kind) {
    case Activation::kRelu:
      return 0;
    case Activation::kTanh:
      return 1;
    case Activation::kLeakyRelu:
      return 2;
  }
  throw std::logic_error("unknown activation tag");
}

Activation activation_from_tag(std::uint32_t tag, const std::string& path) {
  switch (tag) {
    case 0:
      return Activation::kRelu;
    case 1:
      return Activation::kTanh;
    case 2:
      return Activation::kLeakyRelu;
    default:
      throw FileFormatError("unknown activation tag " + std::to_string(tag) +
                            " in " + path);
  }
}

}  // namespace

void save_model(const std::string& path, const MlpModel& model) {
  std::ofstream out = open_out(path);
  write_magic(out, "NCMD");
  write_pod<std::uint32_t>(out, kSnapshotVersion);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(model.layers.size()));
  write_pod<std::uint32_t>(out,
                           static_cast<std::uint32_t>(model.input_dim()));
  for (const LayerParams& layer : model.layers)
    write_pod<std::uint32_t>(out,
                             static_cast<std::uint32_t>(layer.weight.rows()));
  write_pod<std::uint32_t>(out, activation_tag(model.activation));
  write_pod<double>(out, model.leaky_slope);
  for (const LayerParams& layer : model.layers) {
    write_matrix_rowmajor(out, layer.weight);
    for (Index i = 0; i < layer.bias.size(); ++i)
      write_pod<double>(out, layer.bias[i]);
  }
  if (!out) throw FileFormatError("write failed: " + path);
}

MlpModel load_model(const std::string& path) {
  std::ifstream in = open_in(path);
  expect_magic(in, "NCMD", path);
  const auto version = read_pod<std::uint32_t>(in, path);
  if (version != kSnapshotVersion)
    throw FileFormatError("unsupported snapshot version " +
                          std::to_string(version) + " in " + path);
  const auto layer_count = read_pod<std::uint32_t>(in, path);
  if (layer_count < 1)
    throw FileFormatError("snapshot has no layers: " + path);
  std::vector<Index> dims;
  dims.push_back(static_cast<Index>(read_pod<std::uint32_t>(in, path)));
  for (std::uint32_t k = 0; k < layer_count; ++k)
    dims.push_back(static_cast<Index>(read_pod<std::uint32_t>(in, path)));
  for (const Index d : dims)
    if (d < 1) throw FileFormatError("snapshot has a zero-width layer: " + path);

  MlpModel model;
  model.activation = activation_from_tag(read_pod<std::uint32_t>(in, path), path);
  model.leaky_slope = read_pod<double>(in, path);
  model.layers.resize(layer_count);
  for (std::uint32_t k = 0; k < layer_count; ++k) {
    LayerParams& layer = model.layers[k];
    layer.weight.resize(dims[k + 1], dims[k]);
    for (Index r = 0; r < layer.weight.rows(); ++r)
      for (Index c = 0; c < layer.weight.cols(); ++c)
        layer.weight(r, c) = read_pod<double>(in, path);
    layer.bias.resize(dims[k + 1]);
    for (Index i = 0; i < layer.bias.size(); ++i)
      layer.bias[i] = read_pod<double>(in, path);
  }
  for (const LayerParams& layer : model.layers)
    if (!all_finite(layer.weight) || !layer.bias.allFinite())
      throw FileFormatError("non-finite parameters in " + path);
  return model;
}

void write_activation_dump(const std::string& path,
                           const ActivationDump& dump) {
  const Index n = dump.activations.rows();
  const Index p = dump.activations.cols();
  if (n != static_cast<Index>(dump.labels.size()) ||
      n != static_cast<Index>(dump.predictions.size()))
    throw std::invalid_argument(
        "activation dump: row/label/prediction counts differ");

  std::ofstream out = open_out(path);
  write_magic(out, "NCAD");
  write_pod<std::uint32_t>(out, kDumpVersion);
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(n));
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(p));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(dump.class_count));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(dump.scalar));
  for (const std::int32_t label : dump.labels)
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(label));
  for (const std::int32_t pred : dump.predictions)
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(pred));
  if (dump.scalar == DumpScalar::kF32) {
    std::vector<float> row(static_cast<std::size_t>(p));
    for (Index r = 0; r < n; ++r) {
      for (Index c = 0; c < p; ++c)
        row[static_cast<std::size_t>(c)] =
            static_cast<float>(dump.activations(r, c));
      out.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
  } else {
    std::vector<double> row(static_cast<std::size_t>(p));
    for (Index r = 0; r < n; ++r) {
      for (Index c = 0; c < p; ++c)
        row[static_cast<std::size_t>(c)] = dump.activations(r, c);
      out.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
  }
  if (!out) throw FileFormatError("write failed: " + path);
}

ActivationDump read_activation_dump(const std::string& path) {
  std::ifstream in = open_in(path);
  expect_magic(in, "NCAD", path);
  const auto version = read_pod<std::uint32_t>(in, path);
  if (version != kDumpVersion)
    throw FileFormatError("unsupported dump version " +
                          std::to_string(version) + " in " + path);
  const auto n = static_cast<Index>(read_pod<std::uint64_t>(in, path));
  const auto p = static_cast<Index>(read_pod<std::uint64_t>(in, path));
  const auto class_count =
      static_cast<Index>(read_pod<std::uint32_t>(in, path));
  const auto scalar_tag = read_pod<std::uint32_t>(in, path);
  if (scalar_tag > 1)
    throw FileFormatError("unknown dtype tag " + std::to_string(scalar_tag) +
                          " in " + path);
  if (n < 1 || p < 1 || class_count < 1)
    throw FileFormatError("empty dump: " + path);

  ActivationDump dump;
  dump.class_count = class_count;
  dump.scalar = static_cast<DumpScalar>(scalar_tag);
  dump.labels.resize(static_cast<std::size_t>(n));
  dump.predictions.resize(static_cast<std::size_t>(n));
  for (auto& label : dump.labels) {
    const auto value = read_pod<std::uint32_t>(in, path);
    if (value >= static_cast<std::uint32_t>(class_count))
      throw FileFormatError("label " + std::to_string(value) +
                            " out of range in " + path);
    label = static_cast<std::int32_t>(value);
  }
  for (auto& pred : dump.predictions) {
    const auto value = read_pod<std::uint32_t>(in, path);
    if (value >= static_cast<std::uint32_t>(class_count))
      throw FileFormatError("prediction " + std::to_string(value) +
                            " out of range in " + path);
    pred = static_cast<std::int32_t>(value);
  }
  dump.activations.resize(n, p);
  if (dump.scalar == DumpScalar::kF32) {
    std::vector<float> row(static_cast<std::size_t>(p));
    for (Index r = 0; r < n; ++r) {
      if (!in.read(reinterpret_cast<char*>(row.data()),
                   static_cast<std::streamsize>(row.size() * sizeof(float))))
        throw FileFormatError("truncated file: " + path);
      for (Index c = 0; c < p; ++c)
        dump.activations(r, c) =
            static_cast<double>(row[static_cast<std::size_t>(c)]);
    }
  } else {
    std::vector<double> row(static_cast<std::size_t>(p));
    for (Index r = 0; r < n; ++r) {
      if (!in.read(reinterpret_cast<char*>(row.data()),
                   static_cast<std::streamsize>(row.size() * sizeof(double))))
        throw FileFormatError("truncated file: " + path);
      for (Index c = 0; c < p; ++c)
        dump.activations(r, c) = row[static_cast<std::size_t>(c)];
    }
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw FileFormatError("trailing bytes in " + path);
  if (!all_finite(dump.activations))
    throw FileFormatError("non-finite activations in " + path);
  return dump;
}

std::string format_real(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

namespace {

using nlohmann::json;

json layer_to_json(const LayerMetrics& layer) {
  return json{{"layer", layer.layer},
              {"nc1", layer.nc1},
              {"nc2_norms", layer.nc2_equal_norms},
              {"nc2_angles", layer.nc2_max_angles},
              {"nc4", layer.nc4}};
}

}  // namespace

void write_report_json(const std::string& path, const NcReport& report) {
  json root;
  root["format"] = "nc-report";
  root["version"] = 1;
  root["fingerprint"] = report.fingerprint;
  json config = json::object();
  for (const auto& [key, value] : report.effective_config) config[key] = value;
  root["config"] = config;
  if (report.tpt_epoch)
    root["tpt_epoch"] = *report.tpt_epoch;
  else
    root["tpt_epoch"] = nullptr;
  json checkpoints = json::array();
  for (const CheckpointRecord& record : report.checkpoints) {
    json layers = json::array();
    for (const LayerMetrics& layer : record.layers)
      layers.push_back(layer_to_json(layer));
    checkpoints.push_back(json{{"epoch", record.epoch},
                               {"train_error", record.train_error},
                               {"layers", layers}});
  }
  root["checkpoints"] = checkpoints;

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FileFormatError("cannot open for writing: " + path);
  out << root.dump(2) << "\n";
  if (!out) throw FileFormatError("write failed: " + path);
}

NcReport read_report_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileFormatError("cannot open: " + path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw FileFormatError("malformed report JSON in " + path + ": " + e.what());
  }
  try {
    NcReport report;
    report.fingerprint = root.value("fingerprint", std::string{});
    if (root.contains("config"))
      for (const auto& [key, value] : root.at("config").items())
        report.effective_config.emplace_back(key, value.get<std::string>());
    if (root.contains("tpt_epoch") && !root.at("tpt_epoch").is_null())
      report.tpt_epoch = root.at("tpt_epoch").get<std::int64_t>();
    std::int64_t previous_epoch = -1;
    for (const json& entry : root.at("checkpoints")) {
      CheckpointRecord record;
      record.epoch = entry.at("epoch").get<std::int64_t>();
      if (record.epoch <= previous_epoch)
        throw FileFormatError("checkpoint epochs not strictly increasing in " +
                              path);
      previous_epoch = record.epoch;
      record.train_error = entry.at("train_error").get<double>();
      for (const json& layer_json : entry.at("layers")) {
        LayerMetrics layer;
        layer.layer = layer_json.at("layer").get<Index>();
        layer.nc1 = layer_json.at("nc1").get<double>();
        layer.nc2_equal_norms = layer_json.at("nc2_norms").get<double>();
        layer.nc2_max_angles = layer_json.at("nc2_angles").get<double>();
        layer.nc4 = layer_json.at("nc4").get<double>();
        record.layers.push_back(layer);
      }
      report.checkpoints.push_back(std::move(record));
    }
    return report;
  } catch (const json::exception& e) {
    throw FileFormatError("malformed report JSON in " + path + ": " + e.what());
  }
}

std::string report_csv_string(const NcReport& report) {
  std::ostringstream out;
  out << "epoch,layer,nc1,nc2_norms,nc2_angles,nc4,train_error\n";
  for (const CheckpointRecord& record : report.checkpoints) {
    for (const LayerMetrics& layer : record.layers) {
      out << record.epoch << ',' << layer.layer << ','
          << format_real(layer.nc1) << ',' << format_real(layer.nc2_equal_norms)
          << ',' << format_real(layer.nc2_max_angles) << ','
          << format_real(layer.nc4) << ',' << format_real(record.train_error)
          << '\n';
    }
  }
  return out.str();
}

void write_report_csv(const std::string& path, const NcReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FileFormatError("cannot open for writing: " + path);
  out << report_csv_string(report);
  if (!out) throw FileFormatError("write failed: " + path);
}

std::vector<std::string> write_plot_data(const std::string& out_dir,
                                         const NcReport& report) {
  if (report.checkpoints.empty())
    throw std::invalid_argument("write_plot_data: report has no checkpoints");
  std::filesystem::create_directories(out_dir);

  const std::vector<std::pair<std::string, double LayerMetrics::*>> fields = {
      {"nc1", &LayerMetrics::nc1},
      {"nc2_norms", &LayerMetrics::nc2_equal_norms},
      {"nc2_angles", &LayerMetrics::nc2_max_angles},
      {"nc4", &LayerMetrics::nc4},
  };

  std::vector<std::string> written;
  const std::size_t layer_count = report.checkpoints.front().layers.size();
  for (const auto& [name, field] : fields) {
    const std::string path = out_dir + "/" + name + ".tsv";
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FileFormatError("cannot open for writing: " + path);
    out << "layer";
    for (const CheckpointRecord& record : report.checkpoints)
      out << "\tepoch_" << record.epoch;
    out << '\n';
    for (std::size_t j = 0; j < layer_count; ++j) {
      out << (j + 1);
      for (const CheckpointRecord& record : report.checkpoints)
        out << '\t' << format_real(record.layers.at(j).*field);
      out << '\n';
    }
    written.push_back(path);
  }

  const std::string trend_path = out_dir + "/trend_summary.tsv";
  std::ofstream out(trend_path, std::ios::trunc);
  if (!out) throw FileFormatError("cannot open for writing: " + trend_path);
  out << "metric\tfirst_to_last_ratio\tplateau_onset\tdeltas...\n";
  for (const MetricTrend& trend : trend_summary(report)) {
    out << trend.metric << '\t' << format_real(trend.first_to_last_ratio)
        << '\t' << trend.plateau_onset;
    for (const double delta : trend.deltas) out << '\t' << format_real(delta);
    out << '\n';
  }
  written.push_back(trend_path);
  return written;
}

}  // namespace nc
