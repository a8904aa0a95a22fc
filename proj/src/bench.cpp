#include "deepproj/bench.hpp"

#include "deepproj/error.hpp"
#include "deepproj/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>

namespace deepproj {

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::reference_projection: return "reference-projection";
    case Phase::training: return "training";
    case Phase::inference: return "inference";
    case Phase::end_to_end: return "end-to-end";
  }
  return "unknown";
}

double time_median(const std::function<void()>& fn, Index warmup, Index repetitions) {
  if (repetitions < 1) throw ParameterError("time_median: repetitions must be >= 1");
  for (Index i = 0; i < warmup; ++i) fn();
  std::vector<double> samples;
  for (Index i = 0; i < repetitions; ++i) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double>(stop - start).count());
  }
  std::sort(samples.begin(), samples.end());
  const std::size_t mid = samples.size() / 2;
  return samples.size() % 2 ? samples[mid] : 0.5 * (samples[mid - 1] + samples[mid]);
}

Dataset oversample(const Dataset& d, Index n, double jitter, std::uint64_t seed) {
  if (n < 1) throw ParameterError("oversample: n must be >= 1");
  const auto order = permutation(d.size(), seed);
  std::vector<Index> rows(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) rows[i] = order[i % d.size()];
  Dataset out = d.subset(rows);
  if (n > d.size()) {
    const Vector range = d.features.colwise().maxCoeff() - d.features.colwise().minCoeff();
    Rng rng(Rng::derive(seed, 7));
    for (Index i = d.size(); i < n; ++i)
      for (Index c = 0; c < out.dims(); ++c) out.features(i, c) += jitter * range(c) * rng.normal();
  }
  return out;
}

BenchResult run_scaling_suite(const Dataset& source, const std::vector<Index>& sizes,
                              const std::vector<std::string>& methods, const BenchConfig& cfg) {
  if (sizes.empty()) throw ParameterError("bench: no sizes given");
  const Index max_size = *std::max_element(sizes.begin(), sizes.end());
  const Dataset pool = oversample(source, max_size, cfg.jitter, cfg.seed);
  const Index dims = pool.dims();
  BenchResult result;

  // The learned projection is built once per suite and reused for every size.
  std::optional<NetworkModel> model;
  double reference_seconds = 0.0;
  double training_seconds = 0.0;
  auto ensure_model = [&] {
    if (model) return;
    const Index n_train = std::min(cfg.train_size, pool.size());
    const Matrix sample = pool.features.topRows(n_train);
    const auto projector = make_projector(cfg.pipeline.method, cfg.pipeline.projection);
    Embedding reference;
    reference_seconds = time_median([&] { reference = projector->project(sample); },
                                    cfg.heavy_warmup, cfg.heavy_repetitions);
    LearnedProjection learned;
    training_seconds = time_median([&] { learned = learn_from_reference(sample, reference, cfg.pipeline); },
                                   cfg.heavy_warmup, cfg.heavy_repetitions);
    model = learned.result.model;
  };

  auto record = [&](const std::string& method, Phase phase, Index n, double seconds) {
    result.records.push_back({method, phase, n, dims, seconds, cfg.seed});
  };

  for (Index n : sizes) {
    const Matrix x = pool.features.topRows(n);
    for (const std::string& method : methods) {
      if (method == "nnp" || method == "nnp-infer") {
        ensure_model();
        const double infer_seconds =
            time_median([&] { (void)infer(*model, x); }, cfg.warmup, cfg.repetitions);
        if (method == "nnp") {
          record(method, Phase::reference_projection, n, reference_seconds);
          record(method, Phase::training, n, training_seconds);
          record(method, Phase::inference, n, infer_seconds);
          record(method, Phase::end_to_end, n, reference_seconds + training_seconds + infer_seconds);
        } else {
          record(method, Phase::inference, n, infer_seconds);
        }
        continue;
      }
      const Method m = parse_method(method);
      if (m == Method::tsne && n > cfg.tsne_cap) {
        result.skipped.push_back({method, n, "exceeds t-SNE cap of " + std::to_string(cfg.tsne_cap)});
        continue;
      }
      if ((m == Method::mds || m == Method::isomap || m == Method::lle) && n > kDenseEigenCap) {
        result.skipped.push_back({method, n, "exceeds dense eigensolver cap of " + std::to_string(kDenseEigenCap)});
        continue;
      }
      const auto projector = make_projector(m, cfg.pipeline.projection);
      const double seconds =
          time_median([&] { (void)projector->project(x); }, cfg.heavy_warmup, cfg.heavy_repetitions);
      record(method, Phase::end_to_end, n, seconds);
    }
  }
  return result;
}

std::string bench_csv_header() { return "method,phase,n_samples,n_dims,seconds,seed"; }

void append_bench_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& path) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot write " + path.string());
  if (fresh) out << bench_csv_header() << '\n';
  for (const auto& r : records)
    out << r.method << ',' << phase_name(r.phase) << ',' << r.n_samples << ',' << r.n_dims << ','
        << format_double(r.seconds) << ',' << r.seed << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

DatasetSource blob_source(Index dims, double spread, double center_box) {
  return [=](Index classes, Index samples, std::uint64_t seed) {
    BlobSpec spec;
    spec.n_classes = classes;
    spec.samples_per_class = (samples + classes - 1) / classes;
    spec.dims = dims;
    spec.spread = spread;
    spec.center_box = center_box;
    spec.seed = seed;
    const Dataset all = make_blobs(spec);
    auto order = permutation(all.size(), Rng::derive(seed, 3));
    order.resize(static_cast<std::size_t>(samples));
    return all.subset(order);
  };
}

std::vector<EpochsCell> epochs_table(const DatasetSource& source, const EpochsTableConfig& cfg) {
  std::vector<EpochsCell> cells;
  for (Index classes : cfg.class_counts) {
    for (Index samples : cfg.sample_counts) {
      EpochsCell cell;
      cell.classes = classes;
      cell.samples = samples;
      try {
        const Dataset d = source(classes, samples, Rng::derive(cfg.seed, static_cast<std::uint64_t>(classes)));
        const auto learned = learn_projection(d.features, cfg.pipeline);
        const auto& report = learned.result.report;
        cell.epochs = report.stopped_epoch;
        cell.stop_reason = report.stop_reason;
        cell.validation_loss = report.validation_loss.back();
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

void write_epochs_csv(const std::vector<EpochsCell>& cells, std::string_view projection,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "projection,classes,samples,epochs,stop_reason,validation_loss,error\n";
  for (const auto& c : cells) {
    out << projection << ',' << c.classes << ',' << c.samples << ',' << c.epochs << ','
        << (c.ok() ? stop_reason_name(c.stop_reason) : "error") << ','
        << format_double(c.validation_loss) << ",\"";
    for (char ch : c.error) out << (ch == '"' ? std::string("\"\"") : std::string(1, ch));
    out << "\"\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

FineTuneOutcome fine_tune_experiment(const FineTuneExperimentConfig& cfg) {
  const Dataset a = sample_universe(cfg.universes, Universe::a, cfg.pretrain_samples, Rng::derive(cfg.seed, 11));
  const Dataset tune = sample_universe(cfg.universes, Universe::b, cfg.tune_samples, Rng::derive(cfg.seed, 12));
  const Dataset eval = sample_universe(cfg.universes, Universe::b, cfg.eval_samples, Rng::derive(cfg.seed, 13));

  FineTuneOutcome out;
  const LearnedProjection pre = learn_projection(a.features, cfg.pipeline);
  out.pretrain_epochs = pre.result.report.stopped_epoch;

  auto hit = [&](const NetworkModel& m) {
    return neighborhood_hit(infer(m, eval.features).coords, *eval.labels, cfg.hit_k).neighborhood_hit;
  };
  out.untuned_hit = hit(pre.result.model);

  const auto projector = make_projector(cfg.pipeline.method, cfg.pipeline.projection);
  const Embedding reference = projector->project(tune.features);
  const Normalizer target_norm = fit_minmax(reference.coords);
  const Matrix targets = target_norm.apply(reference.coords);
  const auto [train_rows, validation_rows] =
      holdout_rows(tune.size(), cfg.pipeline.validation_fraction, Rng::derive(cfg.seed, 14));
  const Supervision train_set = gather(tune.features, targets, train_rows);
  const Supervision validation = gather(tune.features, targets, validation_rows);

  TrainConfig scratch_cfg = cfg.pipeline.train;
  scratch_cfg.max_epochs = cfg.scratch_epochs;
  scratch_cfg.patience = cfg.scratch_epochs;
  scratch_cfg.target_loss = cfg.tune_target_loss;
  TrainResult scratch = train(train_set, validation, scratch_cfg);
  scratch.model.target_norm = target_norm;
  out.scratch_hit = hit(scratch.model);
  out.scratch_epochs = scratch.report.stopped_epoch;

  TrainConfig tune_cfg = cfg.pipeline.train;
  tune_cfg.max_epochs = cfg.fine_tune_epochs;
  tune_cfg.patience = cfg.fine_tune_epochs;
  tune_cfg.target_loss = cfg.tune_target_loss;
  const TrainResult tuned = fine_tune(pre.result.model, train_set, validation, tune_cfg, target_norm);
  out.fine_tuned_hit = hit(tuned.model);
  out.fine_tune_epochs = tuned.report.stopped_epoch;
  return out;
}

void write_fine_tune_csv(const FineTuneOutcome& o, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "model,neighborhood_hit,epochs\n"
      << "untuned," << format_double(o.untuned_hit) << ',' << o.pretrain_epochs << '\n'
      << "scratch," << format_double(o.scratch_hit) << ',' << o.scratch_epochs << '\n'
      << "fine-tuned," << format_double(o.fine_tuned_hit) << ',' << o.fine_tune_epochs << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace deepproj
