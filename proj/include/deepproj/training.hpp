#pragma once

#include "deepproj/network.hpp"
#include "deepproj/projections.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

namespace deepproj {

struct TrainConfig {
  Index max_epochs = 200;
  /// Training stops once the validation loss is at or below this value; 0 disables the check.
  double target_loss = 0.005;
  Index patience = 10;
  double min_delta = 1e-5;
  Index batch_size = 32;
  AdamConfig adam;
  LossKind loss = LossKind::mse;
  std::uint64_t seed = 0;
};

enum class StopReason { target_loss_reached, patience_exhausted, max_epochs };

std::string_view stop_reason_name(StopReason r);

struct TrainReport {
  std::vector<double> train_loss;       // per epoch
  std::vector<double> validation_loss;  // per epoch
  std::vector<double> best_validation;  // running minimum, per epoch
  Index stopped_epoch = 0;
  Index best_epoch = 0;
  StopReason stop_reason = StopReason::max_epochs;
  bool fine_tune = false;
};

/// Regression pairs: raw features and targets already scaled to [0,1]^2.
struct Supervision {
  Matrix features;
  Matrix targets;

  Index size() const { return features.rows(); }
};

struct TrainResult {
  NetworkModel model;
  TrainReport report;
};

/// Trains a fresh network. The input normalizer is fitted on the union of the
/// training and validation features. Throws DivergenceError on a non-finite loss.
TrainResult train(const Supervision& train_set, const Supervision& validation,
                  const TrainConfig& cfg);

/// Continues training `model` with fresh optimizer moments. The input
/// normalizer is kept; `target_norm`, when given, replaces the stored one
/// (the caller scaled the targets with it). max_epochs may be 0.
TrainResult fine_tune(const NetworkModel& model, const Supervision& train_set,
                      const Supervision& validation, const TrainConfig& cfg,
                      const std::optional<Normalizer>& target_norm = std::nullopt);

/// Row count of the fixed-shape blocks used by inference. Every row passes
/// through identically shaped products, so a row's output does not depend
/// on what else is in the batch.
inline constexpr Index kInferenceBlock = 256;

/// Normalizes with the stored input normalizer and runs the network.
/// Coordinates lie in (0,1)^2.
Embedding infer(const NetworkModel& model, const Eigen::Ref<const Matrix>& features);

/// Maps (0,1)^2 network output back to the reference projection's scale.
Embedding to_reference_scale(const NetworkModel& model, const Embedding& e);

// ---- end-to-end pipeline ----

struct PipelineConfig {
  Method method = Method::tsne;
  ProjectionParams projection;
  TrainConfig train;
  /// Fraction of the training sample held out for early stopping.
  double validation_fraction = 0.1;
};

struct LearnedProjection {
  TrainResult result;
  Embedding reference;        // P(D_s) in its natural scale
  Matrix targets;             // P(D_s) scaled to [0,1]^2
  std::vector<Index> train_rows;
  std::vector<Index> validation_rows;
};

/// Projects the sample with the reference technique, scales the result to
/// [0,1]^2, holds out a validation part and trains the network on the rest.
LearnedProjection learn_projection(const Eigen::Ref<const Matrix>& sample, const PipelineConfig& cfg);

/// Same as learn_projection but with a precomputed reference projection.
LearnedProjection learn_from_reference(const Eigen::Ref<const Matrix>& sample, const Embedding& reference,
                                       const PipelineConfig& cfg);

/// Same as learn_from_reference with caller-chosen training and validation rows.
LearnedProjection learn_with_holdout(const Eigen::Ref<const Matrix>& sample, const Embedding& reference,
                                     Method method, const TrainConfig& cfg, std::vector<Index> train_rows,
                                     std::vector<Index> validation_rows);

/// Splits row indices 0..n-1 into (train, validation) with a seeded shuffle.
std::pair<std::vector<Index>, std::vector<Index>> holdout_rows(Index n, double validation_fraction,
                                                               std::uint64_t seed);

Supervision gather(const Eigen::Ref<const Matrix>& features, const Eigen::Ref<const Matrix>& targets,
                   const std::vector<Index>& rows);

/// `epoch,train_loss,validation_loss,best_validation`, one row per epoch (1-based).
void write_train_report_csv(const TrainReport& r, std::ostream& out);

/// `key,value` rows: stop reason, stopped and best epoch, final losses.
void write_train_summary_csv(const TrainReport& r, std::ostream& out);

}  // namespace deepproj
