#include "deepproj/data.hpp"

#include "deepproj/error.hpp"
#include "deepproj/rng.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace deepproj {

void Dataset::validate() const {
  if (features.rows() < 1 || features.cols() < 1)
    throw ShapeError("dataset must have at least one row and one column");
  if (labels && static_cast<Index>(labels->size()) != features.rows())
    throw ShapeError("label count does not match row count");
  if (!features.allFinite()) throw ParameterError("dataset contains non-finite values");
  if (!feature_names.empty() && static_cast<Index>(feature_names.size()) != features.cols())
    throw ShapeError("feature name count does not match column count");
}

Dataset Dataset::subset(const std::vector<Index>& rows) const {
  Dataset out;
  out.features.resize(static_cast<Index>(rows.size()), features.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.features.row(r) = features.row(rows[r]);
  if (labels) {
    out.labels.emplace();
    out.labels->reserve(rows.size());
    for (Index r : rows) out.labels->push_back((*labels)[r]);
  }
  out.feature_names = feature_names;
  return out;
}

// ---------------------------------------------------------------- CSV

namespace {

std::vector<std::vector<std::string>> tokenize_csv(const std::string& text, char delim,
                                                   std::vector<std::size_t>& line_numbers) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto end_record = [&] {
    record.push_back(field);
    field.clear();
    const bool blank = record.size() == 1 && record[0].empty() && !field_started;
    if (!blank) {
      records.push_back(std::move(record));
      line_numbers.push_back(record_line);
    }
    record.clear();
    field_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      field_started = true;
    } else if (c == delim) {
      record.push_back(field);
      field.clear();
      field_started = true;
    } else if (c == '\r') {
      // tolerated before \n
    } else if (c == '\n') {
      end_record();
      ++line;
      record_line = line;
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw ParseError(line, "unterminated quoted field");
  if (!field.empty() || !record.empty() || field_started) end_record();
  return records;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<int> parse_label(std::string_view s) {
  s = trim(s);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && ptr == s.data() + s.size() && !s.empty()) return v;
  // Accept integral floats such as "3.0".
  const auto d = parse_double(s);
  if (d && std::isfinite(*d) && std::floor(*d) == *d && std::abs(*d) < 2e9)
    return static_cast<int>(*d);
  return std::nullopt;
}

}  // namespace

Dataset parse_csv(const std::string& text, const CsvOptions& options) {
  std::vector<std::size_t> lines;
  auto records = tokenize_csv(text, options.delimiter, lines);
  if (records.empty()) throw ParseError(0, "empty CSV input");

  bool header = false;
  if (options.has_header) {
    header = *options.has_header;
  } else {
    header = std::any_of(records[0].begin(), records[0].end(),
                         [](const std::string& cell) { return !parse_double(cell); });
  }

  const std::size_t width = records[0].size();
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != width)
      throw ParseError(lines[r], "expected " + std::to_string(width) + " columns, found " +
                                     std::to_string(records[r].size()));
  }

  std::optional<std::size_t> label_col;
  if (options.label_column) {
    if (const auto* name = std::get_if<std::string>(&*options.label_column)) {
      if (!header) throw ParseError(0, "label column '" + *name + "' requires a header line");
      const auto it = std::find_if(records[0].begin(), records[0].end(),
                                   [&](const std::string& h) { return trim(h) == *name; });
      if (it == records[0].end()) throw ParseError(lines[0], "missing label column '" + *name + "'");
      label_col = static_cast<std::size_t>(it - records[0].begin());
    } else {
      label_col = std::get<std::size_t>(*options.label_column);
      if (*label_col >= width)
        throw ParseError(lines[0], "label column index " + std::to_string(*label_col) +
                                       " out of range");
    }
  }

  const std::size_t first = header ? 1 : 0;
  const Index n_rows = static_cast<Index>(records.size() - first);
  const Index n_cols = static_cast<Index>(width - (label_col ? 1 : 0));
  if (n_rows < 1) throw ParseError(0, "CSV has no data rows");
  if (n_cols < 1) throw ParseError(lines[0], "CSV has no feature columns");

  Dataset d;
  d.features.resize(n_rows, n_cols);
  if (label_col) d.labels.emplace(static_cast<std::size_t>(n_rows));
  if (header) {
    for (std::size_t c = 0; c < width; ++c)
      if (!label_col || c != *label_col) d.feature_names.emplace_back(trim(records[0][c]));
  }

  for (Index r = 0; r < n_rows; ++r) {
    const auto& rec = records[first + r];
    const std::size_t line = lines[first + r];
    Index out_c = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (label_col && c == *label_col) {
        const auto label = parse_label(rec[c]);
        if (!label) throw ParseError(line, "non-integer label '" + rec[c] + "'");
        (*d.labels)[r] = *label;
        continue;
      }
      const auto v = parse_double(rec[c]);
      if (!v) throw ParseError(line, "non-numeric cell '" + rec[c] + "' in column " + std::to_string(c));
      if (!std::isfinite(*v)) throw ParseError(line, "non-finite value in column " + std::to_string(c));
      d.features(r, out_c++) = *v;
    }
  }
  return d;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), options);
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const int len = std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return std::string(buf.data(), static_cast<std::size_t>(len));
}

void save_csv(const Dataset& d, const std::filesystem::path& path, char delimiter) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (Index c = 0; c < d.dims(); ++c) {
    if (c) out << delimiter;
    out << (d.feature_names.empty() ? "f" + std::to_string(c) : d.feature_names[c]);
  }
  if (d.labels) out << delimiter << "label";
  out << '\n';
  for (Index r = 0; r < d.size(); ++r) {
    for (Index c = 0; c < d.dims(); ++c) {
      if (c) out << delimiter;
      out << format_double(d.features(r, c));
    }
    if (d.labels) out << delimiter << (*d.labels)[r];
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------- IDX

namespace {

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& b, std::size_t offset,
                        const std::filesystem::path& path) {
  if (offset + 4 > b.size()) throw FormatError(path.string() + ": truncated IDX header");
  return (std::uint32_t{b[offset]} << 24) | (std::uint32_t{b[offset + 1]} << 16) |
         (std::uint32_t{b[offset + 2]} << 8) | std::uint32_t{b[offset + 3]};
}

void write_be32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                         static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(bytes, 4);
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images,
                 const std::optional<std::filesystem::path>& labels) {
  const auto img = read_all(images);
  const auto magic = read_be32(img, 0, images);
  if (magic != kIdxImageMagic) throw FormatError(images.string() + ": bad IDX image magic");
  const std::uint64_t count = read_be32(img, 4, images);
  const std::uint64_t rows = read_be32(img, 8, images);
  const std::uint64_t cols = read_be32(img, 12, images);
  const std::uint64_t pixels = rows * cols;
  if (count == 0 || pixels == 0) throw FormatError(images.string() + ": empty IDX image file");
  if (img.size() != 16 + count * pixels)
    throw FormatError(images.string() + ": expected " + std::to_string(16 + count * pixels) +
                      " bytes, found " + std::to_string(img.size()));

  Dataset d;
  d.features.resize(static_cast<Index>(count), static_cast<Index>(pixels));
  for (std::uint64_t i = 0; i < count; ++i)
    for (std::uint64_t p = 0; p < pixels; ++p)
      d.features(static_cast<Index>(i), static_cast<Index>(p)) = img[16 + i * pixels + p] / 255.0;

  if (labels) {
    const auto lab = read_all(*labels);
    if (read_be32(lab, 0, *labels) != kIdxLabelMagic)
      throw FormatError(labels->string() + ": bad IDX label magic");
    const std::uint64_t n_labels = read_be32(lab, 4, *labels);
    if (n_labels != count)
      throw FormatError("label count " + std::to_string(n_labels) + " does not match image count " +
                        std::to_string(count));
    if (lab.size() != 8 + n_labels) throw FormatError(labels->string() + ": truncated label file");
    d.labels.emplace(lab.begin() + 8, lab.end());
  }
  return d;
}

void save_idx(const Dataset& d, Index image_rows, Index image_cols,
              const std::filesystem::path& images,
              const std::optional<std::filesystem::path>& labels) {
  if (image_rows * image_cols != d.dims())
    throw ShapeError("save_idx: image shape does not match feature count");
  std::ofstream out(images, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + images.string());
  write_be32(out, kIdxImageMagic);
  write_be32(out, static_cast<std::uint32_t>(d.size()));
  write_be32(out, static_cast<std::uint32_t>(image_rows));
  write_be32(out, static_cast<std::uint32_t>(image_cols));
  for (Index i = 0; i < d.size(); ++i) {
    for (Index p = 0; p < d.dims(); ++p) {
      const double v = std::clamp(d.features(i, p), 0.0, 1.0);
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  }
  if (labels) {
    if (!d.labels) throw ParameterError("save_idx: dataset has no labels");
    std::ofstream lo(*labels, std::ios::binary | std::ios::trunc);
    if (!lo) throw IoError("cannot write " + labels->string());
    write_be32(lo, kIdxLabelMagic);
    write_be32(lo, static_cast<std::uint32_t>(d.size()));
    for (int l : *d.labels) {
      if (l < 0 || l > 255) throw ParameterError("save_idx: label outside byte range");
      lo.put(static_cast<char>(static_cast<unsigned char>(l)));
    }
  }
}

// ---------------------------------------------------------------- splits

std::vector<Index> permutation(Index n, std::uint64_t seed) {
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  rng.shuffle(std::span<Index>(order));
  return order;
}

Split split(const Dataset& d, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw ParameterError("train_fraction must lie in (0,1)");
  if (!(spec.validation_fraction >= 0.0 && spec.validation_fraction < 1.0))
    throw ParameterError("validation_fraction must lie in [0,1)");

  const Index n = d.size();
  const auto n_sample = static_cast<Index>(std::llround(spec.train_fraction * static_cast<double>(n)));
  const auto n_val = static_cast<Index>(std::llround(spec.validation_fraction * static_cast<double>(n_sample)));
  const Index n_train = n_sample - n_val;
  const Index n_test = n - n_sample;
  if (n_train < 1 || n_test < 1 || (spec.validation_fraction > 0.0 && n_val < 1))
    throw ParameterError("split of " + std::to_string(n) + " rows leaves an empty part (train " +
                         std::to_string(n_train) + ", validation " + std::to_string(n_val) +
                         ", test " + std::to_string(n_test) + ")");

  const auto order = permutation(n, spec.seed);
  Split s;
  s.train_rows.assign(order.begin(), order.begin() + n_train);
  s.validation_rows.assign(order.begin() + n_train, order.begin() + n_sample);
  s.test_rows.assign(order.begin() + n_sample, order.end());
  s.train = d.subset(s.train_rows);
  s.validation = d.subset(s.validation_rows);
  s.test = d.subset(s.test_rows);
  return s;
}

// ---------------------------------------------------------------- min-max

Normalizer fit_minmax(const Eigen::Ref<const Matrix>& data) {
  if (data.rows() < 1) throw ShapeError("fit_minmax: no rows");
  return {data.colwise().minCoeff().transpose(), data.colwise().maxCoeff().transpose()};
}

Normalizer Normalizer::identity(Index dims) {
  return {Vector::Zero(dims), Vector::Ones(dims)};
}

Matrix Normalizer::apply(const Eigen::Ref<const Matrix>& data) const {
  if (data.cols() != dims()) throw ShapeError("Normalizer::apply: column count mismatch");
  Matrix out(data.rows(), data.cols());
  for (Index c = 0; c < dims(); ++c) {
    const double range = max(c) - min(c);
    if (range > 0.0)
      out.col(c) = (data.col(c).array() - min(c)) / range;
    else
      out.col(c).setConstant(0.5);
  }
  return out;
}

Matrix Normalizer::invert(const Eigen::Ref<const Matrix>& scaled) const {
  if (scaled.cols() != dims()) throw ShapeError("Normalizer::invert: column count mismatch");
  Matrix out(scaled.rows(), scaled.cols());
  for (Index c = 0; c < dims(); ++c) {
    const double range = max(c) - min(c);
    if (range > 0.0)
      out.col(c) = scaled.col(c).array() * range + min(c);
    else
      out.col(c).setConstant(min(c));
  }
  return out;
}

// ---------------------------------------------------------------- synthetic

Dataset make_blobs(const BlobSpec& spec) {
  if (spec.n_classes < 1 || spec.samples_per_class < 1 || spec.dims < 1)
    throw ParameterError("make_blobs: counts must be >= 1");
  Rng rng(spec.seed);
  Matrix centers(spec.n_classes, spec.dims);
  for (Index c = 0; c < spec.n_classes; ++c)
    for (Index j = 0; j < spec.dims; ++j) centers(c, j) = rng.uniform(-spec.center_box, spec.center_box);

  Dataset d;
  d.features.resize(spec.n_classes * spec.samples_per_class, spec.dims);
  d.labels.emplace();
  d.labels->reserve(static_cast<std::size_t>(d.features.rows()));
  Index r = 0;
  for (Index c = 0; c < spec.n_classes; ++c) {
    for (Index s = 0; s < spec.samples_per_class; ++s, ++r) {
      for (Index j = 0; j < spec.dims; ++j) d.features(r, j) = centers(c, j) + spec.spread * rng.normal();
      d.labels->push_back(static_cast<int>(c));
    }
  }
  return d;
}

Dataset sample_universe(const UniversePairSpec& spec, Universe which, Index n, std::uint64_t seed) {
  if (spec.n_classes < 1 || spec.dims < 2 || n < 1)
    throw ParameterError("sample_universe: need >= 1 class, >= 2 dims and >= 1 sample");
  const Index half = spec.dims / 2;
  Rng geometry(spec.geometry_seed);
  Matrix a_centers = Matrix::Zero(spec.n_classes, spec.dims);
  Matrix b_centers = Matrix::Zero(spec.n_classes, spec.dims);
  for (Index c = 0; c < spec.n_classes; ++c)
    for (Index j = 0; j < half; ++j) a_centers(c, j) = geometry.uniform(-spec.center_box, spec.center_box);
  for (Index c = 0; c < spec.n_classes; ++c)
    for (Index j = half; j < spec.dims; ++j) b_centers(c, j) = geometry.uniform(-spec.center_box, spec.center_box);

  Rng rng(seed);
  const auto classes = static_cast<std::uint64_t>(spec.n_classes);
  Dataset d;
  d.features.resize(n, spec.dims);
  d.labels.emplace();
  d.labels->reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const auto label = static_cast<Index>(rng.below(classes));
    if (which == Universe::a) {
      d.features.row(i) = a_centers.row(label);
    } else {
      d.features.row(i) = b_centers.row(label) + a_centers.row(static_cast<Index>(rng.below(classes)));
    }
    for (Index j = 0; j < spec.dims; ++j) d.features(i, j) += spec.spread * rng.normal();
    d.labels->push_back(static_cast<int>(label));
  }
  return d;
}

Dataset concat(const Dataset& a, const Dataset& b) {
  if (a.dims() != b.dims()) throw ShapeError("concat: column counts differ");
  Dataset out;
  out.features.resize(a.size() + b.size(), a.dims());
  out.features.topRows(a.size()) = a.features;
  out.features.bottomRows(b.size()) = b.features;
  if (a.labels && b.labels) {
    out.labels = *a.labels;
    out.labels->insert(out.labels->end(), b.labels->begin(), b.labels->end());
  }
  out.feature_names = a.feature_names;
  return out;
}

}  // namespace deepproj
