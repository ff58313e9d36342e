#include "nc/config.hpp"

#include "nc/io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nc {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const std::int64_t parsed = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects an integer, got '" +
                      value + "'");
  }
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const std::uint64_t parsed = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects a seed, got '" +
                      value + "'");
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects a real, got '" +
                      value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config: key '" + key + "' expects true|false, got '" +
                    value + "'");
}

std::vector<std::int64_t> parse_checkpoints(const std::string& value) {
  if (value == "log") return {};
  std::vector<std::int64_t> out;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw ConfigError("config: empty entry in analysis.checkpoints");
    out.push_back(parse_int("analysis.checkpoints", item));
  }
  if (out.empty())
    throw ConfigError("config: analysis.checkpoints expects 'log' or a "
                      "comma-separated epoch list");
  return out;
}

std::string checkpoints_to_string(const std::vector<std::int64_t>& epochs) {
  if (epochs.empty()) return "log";
  std::ostringstream out;
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    if (i > 0) out << ',';
    out << epochs[i];
  }
  return out.str();
}

}  // namespace

std::map<std::string, std::string> parse_flat_config(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(line_number) +
                        " is not 'section.key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key.find('.') == std::string::npos)
      throw ConfigError("config: line " + std::to_string(line_number) +
                        " has a malformed key '" + key + "'");
    if (!out.emplace(key, value).second)
      throw ConfigError("config: duplicate key '" + key + "'");
  }
  return out;
}

ExperimentConfig config_from_map(
    const std::map<std::string, std::string>& map) {
  ExperimentConfig config;
  for (const auto& [key, value] : map) {
    if (key == "model.depth") {
      config.depth = parse_int(key, value);
    } else if (key == "model.width") {
      config.width = parse_int(key, value);
    } else if (key == "model.activation") {
      try {
        config.activation = activation_from_string(value);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
    } else if (key == "model.leaky_slope") {
      config.leaky_slope = parse_real(key, value);
    } else if (key == "data.source") {
      if (value == "synthetic")
        config.data.source = DataConfig::Source::kSynthetic;
      else if (value == "idx")
        config.data.source = DataConfig::Source::kIdx;
      else
        throw ConfigError("config: data.source expects synthetic|idx, got '" +
                          value + "'");
    } else if (key == "data.images") {
      config.data.images_path = value;
    } else if (key == "data.labels") {
      config.data.labels_path = value;
    } else if (key == "data.per_class_n") {
      config.data.per_class_n = parse_int(key, value);
    } else if (key == "data.normalize") {
      config.data.normalize = parse_bool(key, value);
    } else if (key == "data.classes") {
      config.data.classes = parse_int(key, value);
    } else if (key == "data.dim") {
      config.data.dim = parse_int(key, value);
    } else if (key == "data.separation") {
      config.data.separation = parse_real(key, value);
    } else if (key == "data.noise_std") {
      config.data.noise_std = parse_real(key, value);
    } else if (key == "train.epochs") {
      config.epochs = parse_int(key, value);
    } else if (key == "train.batch_size") {
      config.batch_size = parse_int(key, value);
    } else if (key == "train.max_lr") {
      config.max_lr = parse_real(key, value);
    } else if (key == "train.momentum") {
      config.momentum = parse_real(key, value);
    } else if (key == "train.weight_decay") {
      config.weight_decay = parse_real(key, value);
    } else if (key == "train.warmup_fraction") {
      config.warmup_fraction = parse_real(key, value);
    } else if (key == "train.start_div") {
      config.start_div = parse_real(key, value);
    } else if (key == "train.final_div") {
      config.final_div = parse_real(key, value);
    } else if (key == "analysis.coordinate_cap") {
      config.coordinate_cap = parse_int(key, value);
    } else if (key == "analysis.checkpoints") {
      config.checkpoint_epochs = parse_checkpoints(value);
    } else if (key == "seed.model") {
      config.seed_model = parse_seed(key, value);
    } else if (key == "seed.data") {
      config.seed_data = parse_seed(key, value);
    } else if (key == "seed.subsample") {
      config.seed_subsample = parse_seed(key, value);
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  if (config.data.source == DataConfig::Source::kIdx &&
      (config.data.images_path.empty() || config.data.labels_path.empty()))
    throw ConfigError("config: data.source=idx requires data.images and "
                      "data.labels");
  return config;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  const auto map = parse_flat_config(in);
  return config_from_map(map);
}

KeyValues to_key_values(const ExperimentConfig& config) {
  KeyValues kv;
  kv.emplace_back("analysis.checkpoints",
                  checkpoints_to_string(config.checkpoint_epochs));
  kv.emplace_back("analysis.coordinate_cap",
                  std::to_string(config.coordinate_cap));
  if (config.data.source == DataConfig::Source::kIdx) {
    kv.emplace_back("data.images", config.data.images_path);
    kv.emplace_back("data.labels", config.data.labels_path);
  } else {
    kv.emplace_back("data.classes", std::to_string(config.data.classes));
    kv.emplace_back("data.dim", std::to_string(config.data.dim));
    kv.emplace_back("data.noise_std", format_real(config.data.noise_std));
    kv.emplace_back("data.separation", format_real(config.data.separation));
  }
  kv.emplace_back("data.normalize", config.data.normalize ? "true" : "false");
  kv.emplace_back("data.per_class_n", std::to_string(config.data.per_class_n));
  kv.emplace_back("data.source",
                  config.data.source == DataConfig::Source::kIdx ? "idx"
                                                                 : "synthetic");
  kv.emplace_back("model.activation", to_string(config.activation));
  kv.emplace_back("model.depth", std::to_string(config.depth));
  kv.emplace_back("model.leaky_slope", format_real(config.leaky_slope));
  kv.emplace_back("model.width", std::to_string(config.width));
  kv.emplace_back("seed.data", std::to_string(config.seed_data));
  kv.emplace_back("seed.model", std::to_string(config.seed_model));
  kv.emplace_back("seed.subsample", std::to_string(config.seed_subsample));
  kv.emplace_back("train.batch_size", std::to_string(config.batch_size));
  kv.emplace_back("train.epochs", std::to_string(config.epochs));
  kv.emplace_back("train.final_div", format_real(config.final_div));
  kv.emplace_back("train.max_lr", format_real(config.max_lr));
  kv.emplace_back("train.momentum", format_real(config.momentum));
  kv.emplace_back("train.start_div", format_real(config.start_div));
  kv.emplace_back("train.warmup_fraction",
                  format_real(config.warmup_fraction));
  kv.emplace_back("train.weight_decay", format_real(config.weight_decay));
  std::sort(kv.begin(), kv.end());
  return kv;
}

void write_config_file(const std::string& path, const KeyValues& kv) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("config: cannot open for writing " + path);
  for (const auto& [key, value] : kv) out << key << " = " << value << "\n";
  if (!out) throw ConfigError("config: write failed " + path);
}

std::string config_fingerprint(const KeyValues& kv) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto mix = [&hash](const std::string& text) {
    for (const char ch : text) {
      hash ^= static_cast<std::uint8_t>(ch);
      hash *= 0x100000001b3ULL;
    }
  };
  for (const auto& [key, value] : kv) {
    mix(key);
    mix("=");
    mix(value);
    mix("\n");
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

}  // namespace nc
