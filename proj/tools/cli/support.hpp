#pragma once

#include "deepproj/deepproj.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace deepproj::cli {

namespace fs = std::filesystem;

enum class Format { automatic, csv, idx };

struct DataOptions {
  fs::path path;
  std::string labels;
  Format format = Format::automatic;
  char delimiter = ',';
};

struct ProjectionOptions {
  std::string method = "tsne";
  double perplexity = 30.0;
  Index k = 10;
  Index tsne_iterations = 1000;
  double lle_regularization = 1e-3;
};

struct TrainOptions {
  Index max_epochs = 200;
  double target_loss = 0.005;
  Index patience = 10;
  double min_delta = 1e-5;
  Index batch_size = 32;
  double learning_rate = 1e-3;
  std::string loss = "mse";
  double train_fraction = 0.8;
  double val_fraction = 0.1;
};

/// Everything a subcommand may read; each subcommand registers the subset it uses.
struct RunConfig {
  DataOptions data;
  ProjectionOptions projection;
  TrainOptions training;
  fs::path model;
  fs::path out_dir = ".";
  std::uint64_t seed = 0;
  Index hit_k = kDefaultHitK;
};

void add_data_options(CLI::App& app, DataOptions& d, const std::string& positional = "data");
void add_projection_options(CLI::App& app, ProjectionOptions& p);
void add_train_options(CLI::App& app, TrainOptions& t);
void add_common_options(CLI::App& app, RunConfig& c);

Dataset load_dataset(const DataOptions& d);

ProjectionParams projection_params(const ProjectionOptions& p, std::uint64_t seed);
PipelineConfig pipeline_config(const ProjectionOptions& p, const TrainOptions& t, std::uint64_t seed);

/// Reads `key=value` lines (blank lines and `#` comments skipped) and returns
/// them as `--key value` arguments.
std::vector<std::string> config_arguments(const fs::path& path);

/// Tracks files written by a command and deletes them unless committed.
class Outputs {
 public:
  explicit Outputs(fs::path dir);
  ~Outputs();
  Outputs(const Outputs&) = delete;
  Outputs& operator=(const Outputs&) = delete;

  fs::path add(const std::string& name);
  void commit() { committed_ = true; }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
  bool committed_ = false;
};

/// Opens `path` for writing or throws IoError.
std::ofstream open_output(const fs::path& path);

}  // namespace deepproj::cli
