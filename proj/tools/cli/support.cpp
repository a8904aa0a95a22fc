#include "support.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>

namespace deepproj::cli {

void add_data_options(CLI::App& app, DataOptions& d, const std::string& positional) {
  app.add_option(positional, d.path, "Dataset file (.csv, .idx, .ubyte)")->required()->check(CLI::ExistingFile);
  app.add_option("--labels", d.labels,
                 "CSV label column (name or 0-based index) or IDX labels file; CSV files with a "
                 "'label' column use it by default");
  const std::map<std::string, Format> formats{{"auto", Format::automatic}, {"csv", Format::csv}, {"idx", Format::idx}};
  app.add_option("--format", d.format, "Dataset format")->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  app.add_option("--delimiter", d.delimiter, "CSV delimiter");
}

void add_projection_options(CLI::App& app, ProjectionOptions& p) {
  app.add_option("--method", p.method, "Reference projection")
      ->check(CLI::IsMember({"pca", "mds", "isomap", "lle", "tsne"}));
  app.add_option("--perplexity", p.perplexity, "t-SNE perplexity");
  app.add_option("--k", p.k, "Neighbors for Isomap and LLE graphs");
  app.add_option("--tsne-iterations", p.tsne_iterations, "t-SNE gradient iterations");
  app.add_option("--lle-regularization", p.lle_regularization, "LLE local Gram regularization");
}

void add_train_options(CLI::App& app, TrainOptions& t) {
  app.add_option("--max-epochs", t.max_epochs, "Epoch budget");
  app.add_option("--target-loss", t.target_loss, "Stop once validation loss reaches this value");
  app.add_option("--patience", t.patience, "Epochs without improvement before stopping");
  app.add_option("--min-delta", t.min_delta, "Smallest validation improvement that counts");
  app.add_option("--batch-size", t.batch_size, "Mini-batch size");
  app.add_option("--learning-rate", t.learning_rate, "Adam step size");
  app.add_option("--loss", t.loss, "Regression loss")->check(CLI::IsMember({"mse", "mae", "logcosh"}));
  app.add_option("--train-fraction", t.train_fraction, "Fraction of rows projected and learned");
  app.add_option("--val-fraction", t.val_fraction, "Fraction of the training rows held out for early stopping");
}

void add_common_options(CLI::App& app, RunConfig& c) {
  app.add_option("--seed", c.seed, "Random seed");
  app.add_option("--out-dir", c.out_dir, "Directory for outputs");
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return s;
}

Format detect_format(const fs::path& path) {
  const std::string ext = lower(path.extension().string());
  const std::string name = lower(path.filename().string());
  if (ext == ".csv" || ext == ".tsv" || ext == ".txt") return Format::csv;
  if (ext == ".idx" || ext == ".ubyte" || name.find("-ubyte") != std::string::npos) return Format::idx;
  throw ParameterError("cannot infer the format of " + path.string() + "; pass --format csv|idx");
}

bool header_has_label_column(const fs::path& path, char delimiter) {
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t end = line.find(delimiter, start);
    if (end == std::string::npos) end = line.size();
    std::string cell = line.substr(start, end - start);
    if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') cell = cell.substr(1, cell.size() - 2);
    if (cell == "label") return true;
    start = end + 1;
  }
  return false;
}

}  // namespace

Dataset load_dataset(const DataOptions& d) {
  const Format format = d.format == Format::automatic ? detect_format(d.path) : d.format;
  if (format == Format::idx) {
    std::optional<fs::path> labels;
    if (!d.labels.empty()) labels = d.labels;
    return load_idx(d.path, labels);
  }
  CsvOptions options;
  options.delimiter = d.delimiter;
  if (d.delimiter == ',' && lower(d.path.extension().string()) == ".tsv") options.delimiter = '\t';
  if (!d.labels.empty()) {
    std::size_t index = 0;
    const auto* end = d.labels.data() + d.labels.size();
    const auto [ptr, ec] = std::from_chars(d.labels.data(), end, index);
    if (ec == std::errc() && ptr == end) {
      options.label_column = index;
    } else {
      options.label_column = d.labels;
    }
  } else if (header_has_label_column(d.path, options.delimiter)) {
    options.label_column = std::string("label");
  }
  return load_csv(d.path, options);
}

ProjectionParams projection_params(const ProjectionOptions& p, std::uint64_t seed) {
  ProjectionParams params;
  params.graph.k = p.k;
  params.graph.lle_regularization = p.lle_regularization;
  params.tsne.perplexity = p.perplexity;
  params.tsne.n_iter = p.tsne_iterations;
  params.tsne.seed = seed;
  return params;
}

PipelineConfig pipeline_config(const ProjectionOptions& p, const TrainOptions& t, std::uint64_t seed) {
  PipelineConfig cfg;
  cfg.method = parse_method(p.method);
  cfg.projection = projection_params(p, seed);
  cfg.train.max_epochs = t.max_epochs;
  cfg.train.target_loss = t.target_loss;
  cfg.train.patience = t.patience;
  cfg.train.min_delta = t.min_delta;
  cfg.train.batch_size = t.batch_size;
  cfg.train.adam.learning_rate = t.learning_rate;
  cfg.train.loss = parse_loss(t.loss);
  cfg.train.seed = seed;
  cfg.validation_fraction = t.val_fraction;
  return cfg;
}

std::vector<std::string> config_arguments(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::vector<std::string> args;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return std::string();
    return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key=value in " + path.string());
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "empty key in " + path.string());
    const std::string flag = "--" + (key.rfind("--", 0) == 0 ? key.substr(2) : key);
    if (value == "true") {
      args.push_back(flag);
    } else if (value != "false") {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

Outputs::Outputs(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

Outputs::~Outputs() {
  if (committed_) return;
  std::error_code ec;
  for (const auto& f : files_) fs::remove(f, ec);
}

fs::path Outputs::add(const std::string& name) {
  files_.push_back(dir_ / name);
  return files_.back();
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace deepproj::cli
