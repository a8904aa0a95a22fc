#include "commands.hpp"

#include "support.hpp"

#include <iostream>
#include <memory>
#include <sstream>

namespace deepproj::cli {
namespace {

std::vector<Index> iota_rows(Index begin, Index end) {
  std::vector<Index> rows;
  for (Index i = begin; i < end; ++i) rows.push_back(i);
  return rows;
}

void report_hit(const Embedding& e, const std::optional<Labels>& labels, Index k, Outputs& out,
                const std::string& name) {
  if (!labels) return;
  const MetricReport r = neighborhood_hit(e.coords, *labels, k);
  auto f = open_output(out.add(name));
  write_metric_csv(r, f);
  std::cout << format_metric_report(r);
}

// ---- project ----

void project(const RunConfig& c, bool plot) {
  const Dataset d = load_dataset(c.data);
  const auto projector = make_projector(parse_method(c.projection.method), projection_params(c.projection, c.seed));
  const Embedding e = projector->project(d.features);

  Outputs out(c.out_dir);
  save_embedding_csv(e, d.labels, out.add("embedding.csv"));
  report_hit(e, d.labels, c.hit_k, out, "metrics.csv");
  if (plot) {
    PlotSpec spec;
    spec.title = std::string(projector->name());
    render_scatter(e.coords, d.labels, spec, out.add("embedding.svg"));
  }
  out.commit();
}

// ---- train / finetune ----

struct SampledData {
  Dataset sample;  // D_s: training rows followed by validation rows
  Dataset test;
  Index n_train = 0;
};

SampledData sample_rows(const Dataset& d, const TrainOptions& t, std::uint64_t seed) {
  SplitSpec spec;
  spec.train_fraction = t.train_fraction;
  spec.validation_fraction = t.val_fraction;
  spec.seed = seed;
  Split s = split(d, spec);
  SampledData out;
  out.n_train = s.train.size();
  out.sample = concat(s.train, s.validation);
  out.test = std::move(s.test);
  return out;
}

void write_reports(const TrainReport& r, Outputs& out) {
  auto report = open_output(out.add("train_report.csv"));
  write_train_report_csv(r, report);
  auto summary = open_output(out.add("train_summary.csv"));
  write_train_summary_csv(r, summary);
  std::cout << "stop reason: " << stop_reason_name(r.stop_reason) << " after " << r.stopped_epoch
            << " epochs (best " << r.best_epoch << ")\n";
}

void write_test_embedding(const NetworkModel& model, const Dataset& test, Index k, Outputs& out) {
  if (test.size() == 0) return;
  const Embedding e = infer(model, test.features);
  save_embedding_csv(e, test.labels, out.add("test.csv"));
  report_hit(e, test.labels, k, out, "test_metrics.csv");
}

void train_command(const RunConfig& c) {
  const Dataset d = load_dataset(c.data);
  const PipelineConfig cfg = pipeline_config(c.projection, c.training, c.seed);
  const SampledData s = sample_rows(d, c.training, c.seed);
  const auto projector = make_projector(cfg.method, cfg.projection);
  const Embedding reference = projector->project(s.sample.features);
  const LearnedProjection learned =
      learn_with_holdout(s.sample.features, reference, cfg.method, cfg.train, iota_rows(0, s.n_train),
                         iota_rows(s.n_train, s.sample.size()));

  Outputs out(c.out_dir);
  save_model(learned.result.model, out.add("model.nnpm"));
  write_reports(learned.result.report, out);
  save_embedding_csv(reference, s.sample.labels, out.add("reference.csv"));
  write_test_embedding(learned.result.model, s.test, c.hit_k, out);
  out.commit();
}

void finetune_command(const RunConfig& c) {
  const NetworkModel model = load_model(c.model);
  const Dataset d = load_dataset(c.data);
  if (d.dims() != model.n_input())
    throw ShapeError("model expects " + std::to_string(model.n_input()) + " features, dataset has " +
                     std::to_string(d.dims()));
  const PipelineConfig cfg = pipeline_config(c.projection, c.training, c.seed);
  const SampledData s = sample_rows(d, c.training, c.seed);
  const auto projector = make_projector(cfg.method, cfg.projection);
  const Embedding reference = projector->project(s.sample.features);
  const Normalizer target_norm = fit_minmax(reference.coords);
  const Matrix targets = target_norm.apply(reference.coords);
  const TrainResult tuned =
      fine_tune(model, gather(s.sample.features, targets, iota_rows(0, s.n_train)),
                gather(s.sample.features, targets, iota_rows(s.n_train, s.sample.size())), cfg.train, target_norm);

  Outputs out(c.out_dir);
  save_model(tuned.model, out.add("model.nnpm"));
  write_reports(tuned.report, out);
  save_embedding_csv(reference, s.sample.labels, out.add("reference.csv"));
  write_test_embedding(tuned.model, s.test, c.hit_k, out);
  out.commit();
}

// ---- infer ----

void infer_command(const RunConfig& c, bool reference_scale) {
  const NetworkModel model = load_model(c.model);
  const Dataset d = load_dataset(c.data);
  if (d.dims() != model.n_input())
    throw ShapeError("model expects " + std::to_string(model.n_input()) + " features, dataset has " +
                     std::to_string(d.dims()));
  Embedding e = infer(model, d.features);
  Outputs out(c.out_dir);
  report_hit(e, d.labels, c.hit_k, out, "metrics.csv");
  if (reference_scale) e = to_reference_scale(model, e);
  save_embedding_csv(e, d.labels, out.add("embedding.csv"));
  out.commit();
}

// ---- eval ----

void eval_command(const fs::path& embedding, const fs::path& baseline, const fs::path& out_file, Index k) {
  const LabeledEmbedding e = load_embedding_csv(embedding);
  if (!e.labels) throw ParameterError(embedding.string() + " has no label column");
  MetricReport r = neighborhood_hit(e.embedding.coords, *e.labels, k);
  if (!baseline.empty()) {
    const LabeledEmbedding b = load_embedding_csv(baseline);
    const auto rows = iota_rows(0, std::min(b.embedding.size(), e.embedding.size()));
    r.displacement = stability_displacement(b.embedding.coords, e.embedding.coords, rows);
  }
  std::cout << format_metric_report(r);
  if (!out_file.empty()) {
    Outputs out(out_file.parent_path().empty() ? fs::path(".") : out_file.parent_path());
    auto f = open_output(out.add(out_file.filename().string()));
    write_metric_csv(r, f);
    f.close();
    if (!f) throw IoError("write failed for " + out_file.string());
    out.commit();
  }
}

// ---- plot ----

void plot_command(const fs::path& embedding, const fs::path& out_file, const PlotSpec& spec) {
  const LabeledEmbedding e = load_embedding_csv(embedding);
  render_scatter(e.embedding.coords, e.labels, spec, out_file);
}

// ---- make-blobs ----

struct BlobOptions {
  Index classes = 3;
  Index per_class = 100;
  Index dims = 10;
  double spread = 1.0;
  double center_box = 10.0;
  std::string universe;
  fs::path out = "blobs.csv";
};

void make_blobs_command(const BlobOptions& o, std::uint64_t seed) {
  Dataset d;
  if (o.universe.empty()) {
    BlobSpec spec;
    spec.n_classes = o.classes;
    spec.samples_per_class = o.per_class;
    spec.dims = o.dims;
    spec.spread = o.spread;
    spec.center_box = o.center_box;
    spec.seed = seed;
    d = make_blobs(spec);
  } else {
    UniversePairSpec spec;
    spec.n_classes = o.classes;
    spec.dims = o.dims;
    spec.spread = o.spread;
    spec.center_box = o.center_box;
    d = sample_universe(spec, o.universe == "a" ? Universe::a : Universe::b, o.classes * o.per_class, seed);
  }
  if (!o.out.parent_path().empty()) fs::create_directories(o.out.parent_path());
  save_csv(d, o.out);
}

// ---- bench ----

struct BenchOptions {
  std::string suite = "scaling";
  fs::path data;
  std::vector<Index> sizes;
  std::vector<std::string> methods{"nnp"};
  std::vector<Index> classes{2, 10};
  Index dims = 50;
  double spread = 8.0;
  Index train_size = 5000;
  Index warmup = 1;
  Index repetitions = 3;
  fs::path out;
};

void bench_command(const RunConfig& c, const BenchOptions& b) {
  PipelineConfig pipeline = pipeline_config(c.projection, c.training, c.seed);
  fs::create_directories(c.out_dir);

  if (b.suite == "scaling") {
    Dataset source;
    if (!b.data.empty()) {
      DataOptions d = c.data;
      d.path = b.data;
      source = load_dataset(d);
    } else {
      source = blob_source(b.dims, b.spread)(10, 1000, c.seed);
    }
    BenchConfig cfg;
    cfg.pipeline = pipeline;
    cfg.train_size = b.train_size;
    cfg.warmup = b.warmup;
    cfg.repetitions = b.repetitions;
    cfg.seed = c.seed;
    const auto sizes = b.sizes.empty() ? std::vector<Index>{1000, 2000, 4000, 8000} : b.sizes;
    const BenchResult r = run_scaling_suite(source, sizes, b.methods, cfg);
    const fs::path path = b.out.empty() ? c.out_dir / "bench.csv" : b.out;
    append_bench_csv(r.records, path);
    for (const auto& s : r.skipped) std::cerr << "skipped " << s.method << " at " << s.n_samples << ": " << s.reason << '\n';
    std::cout << r.records.size() << " records appended to " << path.string() << '\n';
  } else if (b.suite == "epochs") {
    EpochsTableConfig cfg;
    if (!b.sizes.empty()) cfg.sample_counts = b.sizes;
    cfg.class_counts = b.classes;
    cfg.pipeline = pipeline;
    cfg.seed = c.seed;
    const auto cells = epochs_table(blob_source(b.dims, b.spread), cfg);
    const fs::path path = b.out.empty() ? c.out_dir / "epochs.csv" : b.out;
    Outputs out(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    write_epochs_csv(cells, method_name(pipeline.method), out.add(path.filename().string()));
    out.commit();
    for (const auto& cell : cells)
      std::cout << cell.classes << " classes, " << cell.samples << " samples: "
                << (cell.ok() ? std::to_string(cell.epochs) + " epochs, " + std::string(stop_reason_name(cell.stop_reason))
                              : "error: " + cell.error)
                << '\n';
  } else {
    FineTuneExperimentConfig cfg;
    cfg.pipeline = pipeline;
    cfg.seed = c.seed;
    const FineTuneOutcome o = fine_tune_experiment(cfg);
    const fs::path path = b.out.empty() ? c.out_dir / "finetune.csv" : b.out;
    Outputs out(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    write_fine_tune_csv(o, out.add(path.filename().string()));
    out.commit();
    std::cout << "neighborhood hit on universe B: untuned " << o.untuned_hit << ", scratch " << o.scratch_hit
              << ", fine-tuned " << o.fine_tuned_hit << '\n';
  }
}

}  // namespace

void register_commands(CLI::App& app, std::function<void()>& run) {
  auto c = std::make_shared<RunConfig>();

  {
    auto* cmd = app.add_subcommand("project", "Project a dataset with a classical technique");
    auto plot = std::make_shared<bool>(false);
    add_data_options(*cmd, c->data);
    add_projection_options(*cmd, c->projection);
    add_common_options(*cmd, *c);
    cmd->add_option("--hit-k", c->hit_k, "Neighbors for the neighborhood hit");
    cmd->add_flag("--plot", *plot, "Also write embedding.svg");
    cmd->callback([c, plot, &run] { run = [c, plot] { project(*c, *plot); }; });
  }
  {
    auto* cmd = app.add_subcommand("train", "Learn a projection network from a reference projection");
    add_data_options(*cmd, c->data);
    add_projection_options(*cmd, c->projection);
    add_train_options(*cmd, c->training);
    add_common_options(*cmd, *c);
    cmd->add_option("--hit-k", c->hit_k, "Neighbors for the neighborhood hit");
    cmd->callback([c, &run] { run = [c] { train_command(*c); }; });
  }
  {
    auto* cmd = app.add_subcommand("finetune", "Continue training a model on a new dataset");
    cmd->add_option("model", c->model, "Model file")->required()->check(CLI::ExistingFile);
    add_data_options(*cmd, c->data);
    add_projection_options(*cmd, c->projection);
    add_train_options(*cmd, c->training);
    add_common_options(*cmd, *c);
    cmd->add_option("--hit-k", c->hit_k, "Neighbors for the neighborhood hit");
    cmd->callback([c, &run] { run = [c] { finetune_command(*c); }; });
  }
  {
    auto* cmd = app.add_subcommand("infer", "Project a dataset with a trained model");
    auto reference_scale = std::make_shared<bool>(false);
    cmd->add_option("model", c->model, "Model file")->required()->check(CLI::ExistingFile);
    add_data_options(*cmd, c->data);
    add_common_options(*cmd, *c);
    cmd->add_option("--hit-k", c->hit_k, "Neighbors for the neighborhood hit");
    cmd->add_flag("--reference-scale", *reference_scale, "Write coordinates in the reference projection's scale");
    cmd->callback([c, reference_scale, &run] { run = [c, reference_scale] { infer_command(*c, *reference_scale); }; });
  }
  {
    auto* cmd = app.add_subcommand("eval", "Neighborhood hit of a labelled embedding");
    struct Opts {
      fs::path embedding, baseline, out;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("embedding", o->embedding, "Embedding CSV (x,y,label)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--k", c->hit_k, "Neighbors for the neighborhood hit");
    cmd->add_option("--baseline", o->baseline, "Earlier embedding; reports displacement of shared leading rows")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", o->out, "Metric CSV to write");
    cmd->callback([c, o, &run] { run = [c, o] { eval_command(o->embedding, o->baseline, o->out, c->hit_k); }; });
  }
  {
    auto* cmd = app.add_subcommand("plot", "Render an embedding as an SVG scatter plot");
    struct Opts {
      fs::path embedding, out = "embedding.svg";
      PlotSpec spec;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("embedding", o->embedding, "Embedding CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", o->out, "SVG file");
    cmd->add_option("--width", o->spec.width, "Canvas width");
    cmd->add_option("--height", o->spec.height, "Canvas height");
    cmd->add_option("--radius", o->spec.point_radius, "Point radius");
    cmd->add_option("--title", o->spec.title, "Title");
    cmd->callback([o, &run] { run = [o] { plot_command(o->embedding, o->out, o->spec); }; });
  }
  {
    auto* cmd = app.add_subcommand("make-blobs", "Write a synthetic Gaussian blob dataset");
    auto o = std::make_shared<BlobOptions>();
    cmd->add_option("--classes", o->classes, "Number of classes");
    cmd->add_option("--per-class", o->per_class, "Samples per class");
    cmd->add_option("--dims", o->dims, "Dimensions");
    cmd->add_option("--spread", o->spread, "Standard deviation around each center");
    cmd->add_option("--center-box", o->center_box, "Centers are drawn from [-box, box]");
    cmd->add_option("--universe", o->universe, "Sample one of two related universes instead")
        ->check(CLI::IsMember({"a", "b"}));
    cmd->add_option("--seed", c->seed, "Random seed");
    cmd->add_option("--out", o->out, "CSV file");
    cmd->callback([c, o, &run] { run = [c, o] { make_blobs_command(*o, c->seed); }; });
  }
  {
    auto* cmd = app.add_subcommand("bench", "Timing and convergence suites");
    auto o = std::make_shared<BenchOptions>();
    cmd->add_option("--suite", o->suite, "scaling, epochs or finetune")
        ->check(CLI::IsMember({"scaling", "epochs", "finetune"}));
    cmd->add_option("--data", o->data, "Source dataset for the scaling suite (default: 10-class blobs)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--labels", c->data.labels, "Label column or file of --data");
    cmd->add_option("--sizes", o->sizes, "Sample counts")->delimiter(',');
    cmd->add_option("--methods", o->methods, "Projection names, nnp or nnp-infer")->delimiter(',');
    cmd->add_option("--class-counts", o->classes, "Class counts for the epochs suite")->delimiter(',');
    cmd->add_option("--dims", o->dims, "Blob dimensions");
    cmd->add_option("--spread", o->spread, "Blob spread");
    cmd->add_option("--train-size", o->train_size, "Training-sample size of the learned projection");
    cmd->add_option("--warmup", o->warmup, "Discarded runs before timing inference");
    cmd->add_option("--reps", o->repetitions, "Timed inference runs (median reported)");
    cmd->add_option("--out", o->out, "Output CSV");
    add_projection_options(*cmd, c->projection);
    add_train_options(*cmd, c->training);
    add_common_options(*cmd, *c);
    cmd->callback([c, o, &run] { run = [c, o] { bench_command(*c, *o); }; });
  }
}

}  // namespace deepproj::cli
