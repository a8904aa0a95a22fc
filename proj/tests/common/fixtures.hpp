#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace test {

inline void put_be32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

/// IDX image file bytes with the given header fields and pixel payload.
inline std::string idx_images(std::uint32_t magic, std::uint32_t count, std::uint32_t rows, std::uint32_t cols,
                              const std::vector<std::uint8_t>& pixels) {
  std::string out;
  put_be32(out, magic);
  put_be32(out, count);
  put_be32(out, rows);
  put_be32(out, cols);
  out.append(pixels.begin(), pixels.end());
  return out;
}

inline std::string idx_labels(std::uint32_t magic, std::uint32_t count, const std::vector<std::uint8_t>& labels) {
  std::string out;
  put_be32(out, magic);
  put_be32(out, count);
  out.append(labels.begin(), labels.end());
  return out;
}

struct MalformedCsv {
  std::string name;
  std::string text;
  bool with_label_column;
};

/// CSV inputs the loader must reject with a ParseError.
inline std::vector<MalformedCsv> malformed_csv_inputs() {
  return {
      {"ragged row", "a,b,c\n1,2,3\n4,5\n", false},
      {"non-numeric cell", "a,b\n1,2\n3,x\n", false},
      {"unterminated quote", "a,b\n1,\"2\n3,4\n", false},
      {"header only", "a,b,label\n", false},
      {"non-integer label", "a,b,label\n1,2,0\n3,4,1.5\n", true},
  };
}

struct MalformedIdx {
  std::string name;
  std::string images;
  std::string labels;  // empty: no label file
};

/// IDX inputs the loader must reject with a FormatError.
inline std::vector<MalformedIdx> malformed_idx_inputs() {
  const std::vector<std::uint8_t> four(4, 7);
  return {
      {"bad image magic", idx_images(0x00000802, 1, 2, 2, four), ""},
      {"truncated pixels", idx_images(0x00000803, 2, 2, 2, four), ""},
      {"truncated header", idx_images(0x00000803, 1, 2, 2, {}).substr(0, 10), ""},
      {"bad label magic", idx_images(0x00000803, 1, 2, 2, four), idx_labels(0x00000803, 1, {1})},
      {"label count mismatch", idx_images(0x00000803, 1, 2, 2, four), idx_labels(0x00000801, 2, {1, 2})},
  };
}

}  // namespace test
