#pragma once

#include "deepproj/numerics.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace deepproj {

using Labels = std::vector<int>;

struct Dataset {
  Matrix features;
  std::optional<Labels> labels;
  std::vector<std::string> feature_names;

  Index size() const { return features.rows(); }
  Index dims() const { return features.cols(); }
  bool has_labels() const { return labels.has_value(); }

  /// Throws ShapeError/ParameterError when an invariant is broken.
  void validate() const;

  /// Rows in the given order (labels follow).
  Dataset subset(const std::vector<Index>& rows) const;
};

// ---- CSV ----

/// Column selected either by header name or by zero-based position.
using ColumnRef = std::variant<std::string, std::size_t>;

struct CsvOptions {
  std::optional<ColumnRef> label_column;
  char delimiter = ',';
  /// nullopt: treat the first line as a header iff any cell is non-numeric.
  std::optional<bool> has_header;
};

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
Dataset parse_csv(const std::string& text, const CsvOptions& options = {});

/// Writes a header line, features with 17 significant digits and the labels
/// (if any) as the last column named `label`.
void save_csv(const Dataset& d, const std::filesystem::path& path, char delimiter = ',');

/// Formats a double with 17 significant digits (lossless round-trip).
std::string format_double(double v);

// ---- IDX (MNIST distribution format) ----

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Images are flattened row-major and scaled by 1/255.
Dataset load_idx(const std::filesystem::path& images,
                 const std::optional<std::filesystem::path>& labels = std::nullopt);

/// Writes features (expected in [0,1]) rounded to bytes, plus optional labels.
void save_idx(const Dataset& d, Index image_rows, Index image_cols,
              const std::filesystem::path& images,
              const std::optional<std::filesystem::path>& labels = std::nullopt);

// ---- Splits ----

struct SplitSpec {
  double train_fraction = 0.8;
  /// Fraction of the train portion held out for validation.
  double validation_fraction = 0.1;
  std::uint64_t seed = 0;
};

struct Split {
  Dataset train;
  Dataset validation;
  Dataset test;
  std::vector<Index> train_rows;
  std::vector<Index> validation_rows;
  std::vector<Index> test_rows;
};

/// Seeded shuffle followed by contiguous slicing: the first
/// round(train_fraction * N) shuffled rows form D_s, of which the last
/// round(validation_fraction * |D_s|) become validation; the rest is test.
Split split(const Dataset& d, const SplitSpec& spec);

/// Seeded random permutation of 0..n-1.
std::vector<Index> permutation(Index n, std::uint64_t seed);

// ---- Min-max normalization ----

struct Normalizer {
  Vector min;
  Vector max;

  Index dims() const { return min.size(); }

  /// Columns map to [0,1]; constant columns map to 0.5.
  Matrix apply(const Eigen::Ref<const Matrix>& data) const;
  Matrix invert(const Eigen::Ref<const Matrix>& scaled) const;

  /// min 0, max 1 in every column.
  static Normalizer identity(Index dims);
};

Normalizer fit_minmax(const Eigen::Ref<const Matrix>& data);

// ---- Synthetic data ----

struct BlobSpec {
  Index n_classes = 3;
  Index samples_per_class = 100;
  Index dims = 10;
  double spread = 1.0;
  /// Centers are drawn uniformly from [-center_box, center_box]^dims.
  double center_box = 10.0;
  std::uint64_t seed = 0;
};

/// Isotropic Gaussian clusters; rows are grouped by class, labels = class.
Dataset make_blobs(const BlobSpec& spec);

/// Two related data universes sharing one feature space. Universe A places
/// its class centers in the first half of the dimensions. Universe B places
/// its class centers in the second half, and every B sample also carries a
/// randomly chosen A center in the first half that is unrelated to its label.
struct UniversePairSpec {
  Index n_classes = 3;
  Index dims = 50;
  double spread = 4.0;
  double center_box = 10.0;
  std::uint64_t geometry_seed = 1234;
};

enum class Universe { a, b };

/// `n` samples with uniformly drawn labels.
Dataset sample_universe(const UniversePairSpec& spec, Universe which, Index n, std::uint64_t seed);

/// Concatenates rows of two datasets with identical column counts.
Dataset concat(const Dataset& a, const Dataset& b);

}  // namespace deepproj
