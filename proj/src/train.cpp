#include "deepproj/error.hpp"
#include "deepproj/rng.hpp"
#include "deepproj/training.hpp"

#include <cmath>
#include <numeric>

namespace deepproj {
namespace {

void check_config(const TrainConfig& cfg, bool allow_zero_epochs) {
  if (cfg.max_epochs < (allow_zero_epochs ? 0 : 1)) throw ParameterError("max_epochs must be >= 1");
  if (!(cfg.target_loss >= 0.0)) throw ParameterError("target_loss must be >= 0");
  if (cfg.batch_size < 1) throw ParameterError("batch_size must be >= 1");
  if (cfg.patience < 1) throw ParameterError("patience must be >= 1");
}

void check_sets(const Supervision& train_set, const Supervision& validation) {
  for (const Supervision* s : {&train_set, &validation}) {
    if (s->size() < 1) throw ParameterError("training and validation sets must be non-empty");
    if (s->targets.rows() != s->size() || s->targets.cols() != kOutputDims)
      throw ShapeError("targets must be N x 2");
  }
  if (train_set.features.cols() != validation.features.cols())
    throw ShapeError("training and validation feature widths differ");
}

Matrix forward_blocked(const NetworkModel& m, const Eigen::Ref<const Matrix>& x) {
  const Index n = x.rows();
  Matrix out(n, m.n_output());
  Matrix block = Matrix::Zero(kInferenceBlock, x.cols());
  for (Index start = 0; start < n; start += kInferenceBlock) {
    const Index rows = std::min(kInferenceBlock, n - start);
    block.topRows(rows) = x.middleRows(start, rows);
    if (rows < kInferenceBlock) block.bottomRows(kInferenceBlock - rows).setZero();
    out.middleRows(start, rows) = forward(m, block).topRows(rows);
  }
  return out;
}

// Shared epoch loop for training and fine-tuning. `x` inputs are normalized.
TrainReport run_epochs(NetworkModel& model, const Matrix& train_x, const Matrix& train_y,
                       const Matrix& val_x, const Matrix& val_y, const TrainConfig& cfg) {
  TrainReport report;
  AdamState adam = AdamState::zeros_like(model);
  Rng shuffler(Rng::derive(cfg.seed, 1));

  const Index n = train_x.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Matrix batch_x, batch_y;

  double best = std::numeric_limits<double>::infinity();
  NetworkModel best_model = model;
  Index since_improvement = 0;

  for (Index epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffler.shuffle(std::span<Index>(order));
    double weighted_loss = 0.0;
    for (Index start = 0; start < n; start += cfg.batch_size) {
      const Index rows = std::min(cfg.batch_size, n - start);
      batch_x.resize(rows, train_x.cols());
      batch_y.resize(rows, train_y.cols());
      for (Index r = 0; r < rows; ++r) {
        batch_x.row(r) = train_x.row(order[start + r]);
        batch_y.row(r) = train_y.row(order[start + r]);
      }
      const Gradients g = backward(model, batch_x, batch_y, cfg.loss);
      if (!std::isfinite(g.loss)) throw DivergenceError(static_cast<std::size_t>(epoch), "training loss became non-finite");
      weighted_loss += g.loss * static_cast<double>(rows);
      adam_step(model, g, adam, cfg.adam);
    }
    const double train_loss = weighted_loss / static_cast<double>(n);
    const double val_loss = loss(forward_blocked(model, val_x), val_y, cfg.loss);
    if (!std::isfinite(val_loss)) throw DivergenceError(static_cast<std::size_t>(epoch), "validation loss became non-finite");

    report.train_loss.push_back(train_loss);
    report.validation_loss.push_back(val_loss);
    report.stopped_epoch = epoch;

    if (val_loss < best - cfg.min_delta) {
      best = val_loss;
      best_model = model;
      report.best_epoch = epoch;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    // The running best is tracked without the min_delta threshold.
    const double running = report.best_validation.empty()
                               ? val_loss
                               : std::min(report.best_validation.back(), val_loss);
    report.best_validation.push_back(running);

    if (val_loss <= cfg.target_loss) {
      report.stop_reason = StopReason::target_loss_reached;
      return report;
    }
    if (since_improvement >= cfg.patience) {
      report.stop_reason = StopReason::patience_exhausted;
      model = std::move(best_model);
      return report;
    }
  }
  report.stop_reason = StopReason::max_epochs;
  return report;
}

}  // namespace

std::string_view stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::target_loss_reached: return "target-loss-reached";
    case StopReason::patience_exhausted: return "patience-exhausted";
    case StopReason::max_epochs: return "max-epochs";
  }
  return "unknown";
}

TrainResult train(const Supervision& train_set, const Supervision& validation, const TrainConfig& cfg) {
  check_config(cfg, false);
  check_sets(train_set, validation);

  TrainResult r{init_network(train_set.features.cols(), cfg.seed), {}};
  Matrix all(train_set.size() + validation.size(), train_set.features.cols());
  all << train_set.features, validation.features;
  r.model.input_norm = fit_minmax(all);

  r.report = run_epochs(r.model, r.model.input_norm.apply(train_set.features), train_set.targets,
                        r.model.input_norm.apply(validation.features), validation.targets, cfg);
  r.model.metadata.seed = cfg.seed;
  r.model.metadata.epochs_trained = r.report.stopped_epoch;
  return r;
}

TrainResult fine_tune(const NetworkModel& model, const Supervision& train_set,
                      const Supervision& validation, const TrainConfig& cfg,
                      const std::optional<Normalizer>& target_norm) {
  check_config(cfg, true);
  check_sets(train_set, validation);
  if (train_set.features.cols() != model.n_input())
    throw ShapeError("fine_tune: model expects " + std::to_string(model.n_input()) +
                     " features, data has " + std::to_string(train_set.features.cols()));

  TrainResult r{model, {}};
  if (target_norm) r.model.target_norm = *target_norm;
  r.report = run_epochs(r.model, r.model.input_norm.apply(train_set.features), train_set.targets,
                        r.model.input_norm.apply(validation.features), validation.targets, cfg);
  r.report.fine_tune = true;
  r.model.metadata.fine_tuned = true;
  r.model.metadata.fine_tune_epochs += r.report.stopped_epoch;
  r.model.metadata.epochs_trained += r.report.stopped_epoch;
  return r;
}

Embedding infer(const NetworkModel& model, const Eigen::Ref<const Matrix>& features) {
  if (features.cols() != model.n_input())
    throw ShapeError("model expects " + std::to_string(model.n_input()) + " features, data has " +
                     std::to_string(features.cols()));
  return {forward_blocked(model, model.input_norm.apply(features))};
}

Embedding to_reference_scale(const NetworkModel& model, const Embedding& e) {
  return {model.target_norm.invert(e.coords)};
}

std::pair<std::vector<Index>, std::vector<Index>> holdout_rows(Index n, double validation_fraction,
                                                               std::uint64_t seed) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw ParameterError("validation_fraction must lie in (0,1)");
  const auto n_val = std::max<Index>(1, std::llround(validation_fraction * static_cast<double>(n)));
  if (n - n_val < 1) throw ParameterError("sample too small for a validation holdout");
  const auto order = permutation(n, seed);
  return {std::vector<Index>(order.begin(), order.end() - n_val),
          std::vector<Index>(order.end() - n_val, order.end())};
}

Supervision gather(const Eigen::Ref<const Matrix>& features, const Eigen::Ref<const Matrix>& targets,
                   const std::vector<Index>& rows) {
  Supervision s{Matrix(static_cast<Index>(rows.size()), features.cols()),
                Matrix(static_cast<Index>(rows.size()), targets.cols())};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    s.features.row(r) = features.row(rows[r]);
    s.targets.row(r) = targets.row(rows[r]);
  }
  return s;
}

LearnedProjection learn_with_holdout(const Eigen::Ref<const Matrix>& sample, const Embedding& reference,
                                     Method method, const TrainConfig& cfg, std::vector<Index> train_rows,
                                     std::vector<Index> validation_rows) {
  if (reference.size() != sample.rows()) throw ShapeError("reference projection row count mismatch");
  LearnedProjection lp;
  lp.reference = reference;
  const Normalizer target_norm = fit_minmax(reference.coords);
  lp.targets = target_norm.apply(reference.coords);
  lp.train_rows = std::move(train_rows);
  lp.validation_rows = std::move(validation_rows);
  lp.result = train(gather(sample, lp.targets, lp.train_rows), gather(sample, lp.targets, lp.validation_rows), cfg);
  lp.result.model.target_norm = target_norm;
  lp.result.model.metadata.source_projection = std::string(method_name(method));
  return lp;
}

LearnedProjection learn_from_reference(const Eigen::Ref<const Matrix>& sample, const Embedding& reference,
                                       const PipelineConfig& cfg) {
  auto [train_rows, validation_rows] =
      holdout_rows(sample.rows(), cfg.validation_fraction, Rng::derive(cfg.train.seed, 2));
  return learn_with_holdout(sample, reference, cfg.method, cfg.train, std::move(train_rows),
                            std::move(validation_rows));
}

LearnedProjection learn_projection(const Eigen::Ref<const Matrix>& sample, const PipelineConfig& cfg) {
  const auto projector = make_projector(cfg.method, cfg.projection);
  return learn_from_reference(sample, projector->project(sample), cfg);
}

void write_train_report_csv(const TrainReport& r, std::ostream& out) {
  out << "epoch,train_loss,validation_loss,best_validation\n";
  for (std::size_t e = 0; e < r.train_loss.size(); ++e)
    out << e + 1 << ',' << format_double(r.train_loss[e]) << ',' << format_double(r.validation_loss[e]) << ','
        << format_double(r.best_validation[e]) << '\n';
}

void write_train_summary_csv(const TrainReport& r, std::ostream& out) {
  out << "key,value\n"
      << "stop_reason," << stop_reason_name(r.stop_reason) << '\n'
      << "stopped_epoch," << r.stopped_epoch << '\n'
      << "best_epoch," << r.best_epoch << '\n'
      << "fine_tune," << (r.fine_tune ? "true" : "false") << '\n';
  if (!r.train_loss.empty()) {
    out << "final_train_loss," << format_double(r.train_loss.back()) << '\n'
        << "final_validation_loss," << format_double(r.validation_loss.back()) << '\n'
        << "best_validation_loss," << format_double(r.best_validation.back()) << '\n';
  }
}

}  // namespace deepproj
