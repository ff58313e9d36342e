#include "nc/cli.hpp"

#include "nc/config.hpp"
#include "nc/experiment.hpp"
#include "nc/io.hpp"
#include "nc/metrics.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace nc::cli {

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeFailure = 1;
constexpr int kUsageFailure = 2;

struct TrainOptions {
  std::string config_path;
  std::string out_dir = "nc-out";
  CLI::App* sub = nullptr;

  std::uint64_t seed_model = 0, seed_data = 0, seed_subsample = 0, seed = 0;
  std::int64_t epochs = 0;
  Index width = 0, depth = 0, coord_cap = 0, per_class_n = 0;
  std::string activation;
  double max_lr = 0.0;
  std::string images, labels;
};

struct AnalyzeOptions {
  std::vector<std::string> dumps;
  std::string out = "-";
  Index coord_cap = 2048;
  std::uint64_t seed_subsample = 0;
};

struct ReportOptions {
  std::string report_path;
  std::string out_dir = "nc-plots";
};

void apply_overrides(ExperimentConfig& config, const TrainOptions& opt) {
  const CLI::App& sub = *opt.sub;
  if (sub.count("--seed-model")) config.seed_model = opt.seed_model;
  if (sub.count("--seed")) config.seed_data = opt.seed;
  if (sub.count("--seed-data")) config.seed_data = opt.seed_data;
  if (sub.count("--seed-subsample")) config.seed_subsample = opt.seed_subsample;
  if (sub.count("--epochs")) config.epochs = opt.epochs;
  if (sub.count("--width")) config.width = opt.width;
  if (sub.count("--depth")) config.depth = opt.depth;
  if (sub.count("--coord-cap")) config.coordinate_cap = opt.coord_cap;
  if (sub.count("--max-lr")) config.max_lr = opt.max_lr;
  if (sub.count("--per-class-n")) config.data.per_class_n = opt.per_class_n;
  if (sub.count("--activation"))
    config.activation = activation_from_string(opt.activation);
  if (sub.count("--images")) {
    config.data.images_path = opt.images;
    config.data.source = DataConfig::Source::kIdx;
  }
  if (sub.count("--labels")) {
    config.data.labels_path = opt.labels;
    config.data.source = DataConfig::Source::kIdx;
  }
  if (config.data.source == DataConfig::Source::kIdx &&
      (config.data.images_path.empty() || config.data.labels_path.empty()))
    throw ConfigError("config: idx data needs both images and labels paths");
}

int cmd_train(const TrainOptions& opt) {
  ExperimentConfig config;
  try {
    config = load_config_file(opt.config_path);
    apply_overrides(config, opt);
    validate_config(config);
  } catch (const std::exception& e) {
    std::cerr << "nclab train: " << e.what() << "\n";
    return kUsageFailure;
  }

  try {
    std::filesystem::create_directories(opt.out_dir);
    const std::string json_path = opt.out_dir + "/report.json";
    const std::string csv_path = opt.out_dir + "/report.csv";
    const KeyValues kv = to_key_values(config);
    write_config_file(opt.out_dir + "/effective.config", kv);

    // Flush the report at every checkpoint so aborted runs keep a usable
    // partial record.
    MlpModel trained;
    const NcReport report = run(
        config,
        [&](const NcReport& partial) {
          write_report_json(json_path, partial);
          write_report_csv(csv_path, partial);
        },
        &trained);
    save_model(opt.out_dir + "/model.ncmd", trained);

    std::cout << "wrote " << json_path << ", " << csv_path << ", "
              << opt.out_dir << "/model.ncmd (fingerprint "
              << report.fingerprint << ")\n";
    if (report.tpt_epoch)
      std::cout << "zero training error first reached at epoch "
                << *report.tpt_epoch << "\n";
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "nclab train: " << e.what() << "\n";
    return kRuntimeFailure;
  }
}

int cmd_analyze(const AnalyzeOptions& opt) {
  std::ostringstream csv;
  csv << "layer,nc1,nc2_norms,nc2_angles,nc4\n";
  for (std::size_t i = 0; i < opt.dumps.size(); ++i) {
    ActivationDump dump;
    try {
      dump = read_activation_dump(opt.dumps[i]);
    } catch (const FileFormatError& e) {
      std::cerr << "nclab analyze: " << e.what() << "\n";
      return kUsageFailure;
    }
    try {
      const LayerAnalysisOptions options{opt.coord_cap, opt.seed_subsample,
                                         0.0};
      LayerMetrics metrics =
          analyze_layer(dump.activations, dump.labels, dump.predictions,
                        dump.class_count, options);
      metrics.layer = static_cast<Index>(i) + 1;
      csv << metrics.layer << ',' << format_real(metrics.nc1) << ','
          << format_real(metrics.nc2_equal_norms) << ','
          << format_real(metrics.nc2_max_angles) << ','
          << format_real(metrics.nc4) << '\n';
    } catch (const std::exception& e) {
      std::cerr << "nclab analyze: " << opt.dumps[i] << ": " << e.what()
                << "\n";
      return kRuntimeFailure;
    }
  }
  if (opt.out == "-") {
    std::cout << csv.str();
  } else {
    std::ofstream out(opt.out, std::ios::trunc);
    if (!out) {
      std::cerr << "nclab analyze: cannot open for writing: " << opt.out
                << "\n";
      return kRuntimeFailure;
    }
    out << csv.str();
  }
  return kOk;
}

int cmd_report(const ReportOptions& opt) {
  NcReport report;
  try {
    report = read_report_json(opt.report_path);
  } catch (const std::exception& e) {
    std::cerr << "nclab report: " << e.what() << "\n";
    return kUsageFailure;
  }
  if (report.checkpoints.empty()) {
    std::cerr << "nclab report: " << opt.report_path
              << " has an empty checkpoint list\n";
    return kUsageFailure;
  }
  try {
    for (const std::string& path : write_plot_data(opt.out_dir, report))
      std::cout << "wrote " << path << "\n";
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "nclab report: " << e.what() << "\n";
    return kRuntimeFailure;
  }
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  CLI::App app{
      "nclab: train small classifiers into the terminal phase of training "
      "and measure layerwise neural-collapse metrics"};
  app.require_subcommand(1);

  TrainOptions train_opt;
  CLI::App* train = app.add_subcommand(
      "train", "train per a config file and write NC reports");
  train_opt.sub = train;
  train->add_option("--config", train_opt.config_path,
                    "flat `section.key = value` config file")
      ->required();
  train->add_option("--out-dir", train_opt.out_dir,
                    "output directory (report.json, report.csv, "
                    "effective.config, model.ncmd)");
  train->add_option("--seed-model", train_opt.seed_model, "model init seed");
  train->add_option("--seed-data", train_opt.seed_data,
                    "data generation/shuffling seed");
  train->add_option("--seed", train_opt.seed, "alias for --seed-data");
  train->add_option("--seed-subsample", train_opt.seed_subsample,
                    "coordinate subsampling seed");
  train->add_option("--epochs", train_opt.epochs, "training epochs");
  train->add_option("--width", train_opt.width, "hidden layer width");
  train->add_option("--depth", train_opt.depth, "hidden layer count");
  train->add_option("--activation", train_opt.activation,
                    "relu|tanh|leakyrelu");
  train->add_option("--coord-cap", train_opt.coord_cap,
                    "max analyzed coordinates per layer");
  train->add_option("--max-lr", train_opt.max_lr, "one-cycle peak LR");
  train->add_option("--images", train_opt.images, "IDX image file");
  train->add_option("--labels", train_opt.labels, "IDX label file");
  train->add_option("--per-class-n", train_opt.per_class_n,
                    "per-class sample count");

  AnalyzeOptions analyze_opt;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "compute NC metrics from activation dump files");
  analyze->add_option("--dump", analyze_opt.dumps,
                      "NCAD activation dump, one per layer (repeatable)")
      ->required();
  analyze->add_option("--out", analyze_opt.out, "CSV path ('-' for stdout)");
  analyze->add_option("--coord-cap", analyze_opt.coord_cap,
                      "max analyzed coordinates per layer");
  analyze->add_option("--seed-subsample", analyze_opt.seed_subsample,
                      "coordinate subsampling seed");

  ReportOptions report_opt;
  CLI::App* report = app.add_subcommand(
      "report", "emit per-metric plot tables from a report JSON");
  report->add_option("--report", report_opt.report_path, "report.json path")
      ->required();
  report->add_option("--out-dir", report_opt.out_dir,
                     "directory for the TSV tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageFailure;
  }

  if (train->parsed()) return cmd_train(train_opt);
  if (analyze->parsed()) return cmd_analyze(analyze_opt);
  if (report->parsed()) return cmd_report(report_opt);
  return kUsageFailure;
}

int dispatch(const std::vector<std::string>& args) {
  std::vector<std::string> with_program;
  with_program.reserve(args.size() + 1);
  with_program.emplace_back("nclab");
  with_program.insert(with_program.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(with_program.size());
  for (const std::string& arg : with_program) argv.push_back(arg.c_str());
  return dispatch(static_cast<int>(argv.size()), argv.data());
}

}  // namespace nc::cli
