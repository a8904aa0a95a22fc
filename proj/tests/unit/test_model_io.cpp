#include "helpers.hpp"

#include <doctest.h>

using namespace deepproj;

namespace {

NetworkModel sample_model() {
  const std::vector<Index> dims{4, 6, 3, 2};
  NetworkModel m = init_network(dims, 7);
  m.input_norm.min = Vector::LinSpaced(4, -1, 1);
  m.input_norm.max = Vector::LinSpaced(4, 2, 5);
  m.target_norm.min = Vector::Constant(2, -30.5);
  m.target_norm.max = Vector::Constant(2, 41.25);
  m.metadata.source_projection = "tsne";
  m.metadata.seed = 99;
  m.metadata.epochs_trained = 17;
  return m;
}

}  // namespace

TEST_SUITE("model_io") {
  TEST_CASE("round trip is byte-stable and forward-equal") {
    const NetworkModel m = sample_model();
    const std::string bytes = serialize_model(m);
    CHECK(bytes.substr(0, 4) == "NNPM");
    const NetworkModel back = deserialize_model(bytes);
    CHECK(serialize_model(back) == bytes);
    const Matrix x = test::random_matrix(9, 4, 1);
    CHECK(forward(back, x) == forward(m, x));
    CHECK(back.input_norm.max == m.input_norm.max);
    CHECK(back.target_norm.min == m.target_norm.min);
    CHECK(back.metadata.source_projection == "tsne");
    CHECK(back.metadata.seed == 99);
    CHECK(back.metadata.epochs_trained == 17);
  }

  TEST_CASE("files") {
    test::TempDir dir("model_files");
    const NetworkModel m = sample_model();
    save_model(m, dir / "m.nnpm");
    CHECK(test::read_file(dir / "m.nnpm") == serialize_model(m));
    CHECK(serialize_model(load_model(dir / "m.nnpm")) == serialize_model(m));
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++entries;
    CHECK(entries == 1);
    CHECK_THROWS_AS(load_model(dir / "absent.nnpm"), IoError);
    CHECK_THROWS_AS(save_model(m, dir / "no/such/dir/m.nnpm"), IoError);
  }

  TEST_CASE("corrupted input is rejected") {
    const std::string bytes = serialize_model(sample_model());
    std::string magic = bytes;
    magic[0] = 'X';
    CHECK_THROWS_AS(deserialize_model(magic), FormatError);
    std::string version = bytes;
    version[4] = 9;
    CHECK_THROWS_AS(deserialize_model(version), FormatError);
    CHECK_THROWS_AS(deserialize_model(bytes.substr(0, bytes.size() / 2)), FormatError);
    CHECK_THROWS_AS(deserialize_model(bytes.substr(0, 3)), FormatError);
    CHECK_THROWS_AS(deserialize_model(bytes + "x"), FormatError);
    std::string json = bytes;
    json[json.size() - 1] = '#';
    CHECK_THROWS_AS(deserialize_model(json), FormatError);
  }
}
