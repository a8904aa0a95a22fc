#include "deepproj/model_io.hpp"

#include "deepproj/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace deepproj {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(bytes, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    char raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }

  std::string take(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("model file is truncated");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

void put_normalizer(std::string& out, const Normalizer& n) {
  for (Index i = 0; i < n.dims(); ++i) {
    put(out, n.min(i));
    put(out, n.max(i));
  }
}

Normalizer get_normalizer(Reader& in, Index dims) {
  Normalizer n{Vector(dims), Vector(dims)};
  for (Index i = 0; i < dims; ++i) {
    n.min(i) = in.get<double>();
    n.max(i) = in.get<double>();
  }
  return n;
}

}  // namespace

std::string serialize_model(const NetworkModel& m) {
  m.validate();
  std::string out(kModelMagic, 4);
  put<std::uint16_t>(out, kModelFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.layers.size()));
  for (Index d : m.layer_dims()) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  for (const auto& l : m.layers)
    for (Index r = 0; r < l.weights.rows(); ++r)
      for (Index c = 0; c < l.weights.cols(); ++c) put(out, l.weights(r, c));
  for (const auto& l : m.layers)
    for (Index c = 0; c < l.bias.size(); ++c) put(out, l.bias(c));
  put_normalizer(out, m.input_norm);
  put_normalizer(out, m.target_norm);

  const nlohmann::json meta = {
      {"source_projection", m.metadata.source_projection},
      {"seed", m.metadata.seed},
      {"epochs", m.metadata.epochs_trained},
      {"fine_tune_epochs", m.metadata.fine_tune_epochs},
      {"fine_tuned", m.metadata.fine_tuned},
  };
  const std::string text = meta.dump();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  return out;
}

NetworkModel deserialize_model(const std::string& bytes) {
  Reader in(bytes);
  if (in.take(4) != std::string(kModelMagic, 4)) throw FormatError("not a model file (bad magic)");
  const auto version = in.get<std::uint16_t>();
  if (version != kModelFormatVersion)
    throw FormatError("unsupported model format version " + std::to_string(version));
  const auto n_layers = in.get<std::uint32_t>();
  if (n_layers < 1 || n_layers > 64) throw FormatError("implausible layer count");
  std::vector<Index> dims;
  for (std::uint32_t i = 0; i <= n_layers; ++i) {
    const auto d = in.get<std::uint32_t>();
    if (d < 1 || d > (1u << 24)) throw FormatError("implausible layer width");
    dims.push_back(d);
  }

  NetworkModel m;
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    Layer l{Matrix(dims[i], dims[i + 1]), RowVector(dims[i + 1])};
    for (Index r = 0; r < l.weights.rows(); ++r)
      for (Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = in.get<double>();
    m.layers.push_back(std::move(l));
  }
  for (auto& l : m.layers)
    for (Index c = 0; c < l.bias.size(); ++c) l.bias(c) = in.get<double>();
  m.input_norm = get_normalizer(in, dims.front());
  m.target_norm = get_normalizer(in, dims.back());

  const auto meta_len = in.get<std::uint32_t>();
  const std::string text = in.take(meta_len);
  if (!in.done()) throw FormatError("trailing bytes after model metadata");
  try {
    const auto meta = nlohmann::json::parse(text);
    m.metadata.source_projection = meta.at("source_projection").get<std::string>();
    m.metadata.seed = meta.at("seed").get<std::uint64_t>();
    m.metadata.epochs_trained = meta.at("epochs").get<Index>();
    m.metadata.fine_tune_epochs = meta.value("fine_tune_epochs", Index{0});
    m.metadata.fine_tuned = meta.value("fine_tuned", false);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad model metadata: ") + e.what());
  }
  try {
    m.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("invalid model: ") + e.what());
  }
  return m;
}

void save_model(const NetworkModel& m, const std::filesystem::path& path) {
  const std::string bytes = serialize_model(m);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw IoError("write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

NetworkModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace deepproj
