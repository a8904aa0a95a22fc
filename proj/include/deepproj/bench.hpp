#pragma once

#include "deepproj/data.hpp"
#include "deepproj/metrics.hpp"
#include "deepproj/training.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace deepproj {

enum class Phase { reference_projection, training, inference, end_to_end };

std::string_view phase_name(Phase p);

struct BenchRecord {
  std::string method;
  Phase phase = Phase::end_to_end;
  Index n_samples = 0;
  Index n_dims = 0;
  double seconds = 0.0;
  std::uint64_t seed = 0;
};

struct BenchSkip {
  std::string method;
  Index n_samples = 0;
  std::string reason;
};

struct BenchConfig {
  /// Applied to cheap phases (network inference).
  Index warmup = 1;
  Index repetitions = 3;
  /// Applied to reference projections and training.
  Index heavy_warmup = 0;
  Index heavy_repetitions = 1;
  /// Training-sample size for the learned projection.
  Index train_size = 5000;
  Index tsne_cap = 10000;
  /// Oversampling jitter as a fraction of each feature's range.
  double jitter = 1e-3;
  PipelineConfig pipeline;
  std::uint64_t seed = 0;
};

struct BenchResult {
  std::vector<BenchRecord> records;
  std::vector<BenchSkip> skipped;
};

/// Median wall-clock seconds of `repetitions` timed calls after `warmup`
/// discarded ones, measured with a monotonic clock.
double time_median(const std::function<void()>& fn, Index warmup, Index repetitions);

/// Rows 0..n-1 of a seeded permutation of `d`; when n exceeds the dataset,
/// rows are duplicated cyclically and the copies get Gaussian jitter with
/// standard deviation `jitter` times each feature's range.
Dataset oversample(const Dataset& d, Index n, double jitter, std::uint64_t seed);

/// Methods: any projection name (direct projection of all N rows, recorded
/// as end-to-end), "nnp" (reference projection + training on a fixed
/// sample, then inference on N rows; all four phases recorded) and
/// "nnp-infer" (inference phase only).
BenchResult run_scaling_suite(const Dataset& source, const std::vector<Index>& sizes,
                              const std::vector<std::string>& methods, const BenchConfig& cfg);

/// Appends records; writes the header first when the file is new or empty.
void append_bench_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& path);
std::string bench_csv_header();

// ---- epochs-to-convergence table ----

using DatasetSource = std::function<Dataset(Index classes, Index samples, std::uint64_t seed)>;

/// Gaussian blobs with the given geometry, `samples` rows spread evenly over classes.
DatasetSource blob_source(Index dims, double spread, double center_box = 10.0);

struct EpochsTableConfig {
  std::vector<Index> sample_counts{1000, 2000, 3000, 5000, 9000};
  std::vector<Index> class_counts{2, 10};
  PipelineConfig pipeline;
  std::uint64_t seed = 0;
};

struct EpochsCell {
  Index classes = 0;
  Index samples = 0;
  Index epochs = 0;
  StopReason stop_reason = StopReason::max_epochs;
  double validation_loss = 0.0;
  std::string error;  // non-empty when the cell failed

  bool ok() const { return error.empty(); }
};

/// Trains one network per (classes, samples) cell and records the epoch at
/// which training stopped. Failing cells are recorded and the suite continues.
std::vector<EpochsCell> epochs_table(const DatasetSource& source, const EpochsTableConfig& cfg);

void write_epochs_csv(const std::vector<EpochsCell>& cells, std::string_view projection,
                      const std::filesystem::path& path);

// ---- fine-tuning across universes ----

struct FineTuneExperimentConfig {
  UniversePairSpec universes;
  Index pretrain_samples = 2000;
  /// Labelled samples of universe B available for adaptation.
  Index tune_samples = 100;
  Index eval_samples = 1000;
  Index fine_tune_epochs = 700;
  Index scratch_epochs = 100;
  /// Target loss for both universe-B trainings. The default of zero disables
  /// that stop, since the validation part of a small sample is too noisy
  /// to end training on.
  double tune_target_loss = 0.0;
  Index hit_k = kDefaultHitK;
  PipelineConfig pipeline;
  std::uint64_t seed = 0;
};

struct FineTuneOutcome {
  double untuned_hit = 0.0;
  double scratch_hit = 0.0;
  double fine_tuned_hit = 0.0;
  Index pretrain_epochs = 0;
  Index scratch_epochs = 0;
  Index fine_tune_epochs = 0;
};

/// Pre-trains on universe A, then compares three networks on held-out
/// universe B rows: the pre-trained one as is, one trained from scratch on
/// the B samples and the pre-trained one fine-tuned on the same samples.
/// Both B trainings run for their full epoch budget.
FineTuneOutcome fine_tune_experiment(const FineTuneExperimentConfig& cfg);

void write_fine_tune_csv(const FineTuneOutcome& o, const std::filesystem::path& path);

}  // namespace deepproj
