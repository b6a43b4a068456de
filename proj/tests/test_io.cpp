#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "lpsketch/io.hpp"
#include "oracles.hpp"

using namespace lpsketch;
using Vec = std::vector<double>;

namespace {

SketchConfig make_config(int p, std::uint32_t k, StrategyKind strategy, ProjectionFamily family,
                         std::uint64_t seed) {
  SketchConfig c;
  c.p = EvenOrder(p);
  c.k = k;
  c.strategy = strategy;
  c.family = family;
  c.master_seed = seed;
  return c;
}

template <class T>
T read_le(const std::string& bytes, std::size_t offset) {
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof(T));
  return v;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Usage;
}

io::SketchFile sample_file(std::mt19937_64& rng, const SketchConfig& cfg, std::size_t n, std::size_t d) {
  Vec values;
  for (std::size_t i = 0; i < n * d; ++i) values.push_back(std::uniform_real_distribution<double>(-3, 3)(rng));
  io::SketchFile f;
  f.columns = d;
  f.config = cfg;
  f.rows = sketch_matrix(DataMatrix(n, d, values), cfg);
  return f;
}

}  // namespace

TEST_CASE("csv parsing") {
  const auto m = io::parse_csv("1,2\n\n 3 , +4.5 \r\n-1e2,0\n");
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 2);
  CHECK(m.values()[3] == 4.5);
  CHECK(m.values()[4] == -100.0);

  const auto h = io::parse_csv("a,b\n1,2\n", {true});
  CHECK(h.rows() == 1);

  CHECK(code_of([] { io::parse_csv(""); }) == ErrorCode::Data);
  CHECK(code_of([] { io::parse_csv("\n\n"); }) == ErrorCode::Data);
  CHECK(code_of([] { io::parse_csv("1,2\n3\n"); }) == ErrorCode::Data);
  CHECK(code_of([] { io::parse_csv("1,nan\n"); }) == ErrorCode::Data);
  CHECK(code_of([] { io::parse_csv("1,inf\n"); }) == ErrorCode::Data);
  CHECK(code_of([] { io::parse_csv("1,x\n"); }) == ErrorCode::Data);
  CHECK(code_of([] { io::parse_csv("1,\n"); }) == ErrorCode::Data);
  try {
    io::parse_csv("1,2\n3,abc\n");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK(code_of([] { io::read_csv("/nonexistent/file.csv"); }) == ErrorCode::Io);
}

TEST_CASE("a single row sketches its marginals exactly") {
  const auto m = io::parse_csv("1,2\n");
  const auto sk = sketch_matrix(m, make_config(4, 3, StrategyKind::Basic, ProjectionFamily::normal(), 1));
  CHECK(sk[0].marginals == Vec{3, 5, 9, 17, 33, 65});
}

TEST_CASE("pairs parsing") {
  const auto p = io::parse_pairs("0,1\n# comment\n2 3\n\n 4 , 5 # trailing\n");
  REQUIRE(p.size() == 3);
  CHECK(p[0] == std::pair<std::size_t, std::size_t>{0, 1});
  CHECK(p[1] == std::pair<std::size_t, std::size_t>{2, 3});
  CHECK(p[2] == std::pair<std::size_t, std::size_t>{4, 5});
  CHECK_THROWS_AS(io::parse_pairs("1\n"), Error);
  CHECK_THROWS_AS(io::parse_pairs("1,-2\n"), Error);
  CHECK_THROWS_AS(io::parse_pairs("1,2,3\n"), Error);
}

TEST_CASE("sketch file header layout") {
  std::mt19937_64 rng(1);
  const auto cfg = make_config(6, 5, StrategyKind::Alternative, ProjectionFamily::three_point(2.5), 0x0123456789abcdefull);
  const auto file = sample_file(rng, cfg, 3, 4);
  const auto bytes = io::encode_sketch_file(file);
  CHECK(bytes.substr(0, 4) == "LPSK");
  CHECK(read_le<std::uint32_t>(bytes, 4) == 1u);
  CHECK(read_le<std::uint64_t>(bytes, 8) == 3u);
  CHECK(read_le<std::uint64_t>(bytes, 16) == 4u);
  CHECK(read_le<std::uint32_t>(bytes, 24) == 6u);
  CHECK(read_le<std::uint32_t>(bytes, 28) == 5u);
  CHECK(read_le<std::uint32_t>(bytes, 32) == 1u);
  CHECK(read_le<std::uint32_t>(bytes, 36) == 2u);
  CHECK(read_le<double>(bytes, 40) == 2.5);
  CHECK(read_le<std::uint64_t>(bytes, 48) == 0x0123456789abcdefull);
  // 10 marginals + 9 vectors of 5 per row.
  CHECK(bytes.size() == io::kSketchHeaderSize + 3 * (10 + 9 * 5) * sizeof(double));
  CHECK(read_le<double>(bytes, io::kSketchHeaderSize) == file.rows[0].marginals[0]);
}

TEST_CASE("sketch files round-trip bit for bit") {
  std::mt19937_64 rng(2);
  const ProjectionFamily families[] = {ProjectionFamily::normal(), ProjectionFamily::uniform(),
                                       ProjectionFamily::three_point(1.0), ProjectionFamily::three_point(4.0)};
  for (int p : {2, 4, 6, 8}) {
    for (auto strategy : {StrategyKind::Basic, StrategyKind::Alternative}) {
      if (strategy == StrategyKind::Alternative && p != 4 && p != 6) continue;
      for (const auto& fam : families) {
        const auto cfg = make_config(p, 1 + static_cast<std::uint32_t>(rng() % 9), strategy, fam, rng());
        const auto file = sample_file(rng, cfg, 1 + rng() % 4, 1 + rng() % 6);
        const auto bytes = io::encode_sketch_file(file);
        const auto back = io::decode_sketch_file(bytes);
        REQUIRE(back.columns == file.columns);
        REQUIRE(back.config == file.config);
        REQUIRE(back.rows.size() == file.rows.size());
        for (std::size_t i = 0; i < file.rows.size(); ++i) {
          REQUIRE(back.rows[i].row_id == i);
          REQUIRE(std::memcmp(back.rows[i].vectors.data(), file.rows[i].vectors.data(),
                              file.rows[i].vectors.size() * sizeof(double)) == 0);
          REQUIRE(back.rows[i].marginals == file.rows[i].marginals);
        }
        REQUIRE(io::encode_sketch_file(back) == bytes);
      }
    }
  }
}

TEST_CASE("malformed sketch files are rejected") {
  std::mt19937_64 rng(3);
  const auto cfg = make_config(4, 3, StrategyKind::Basic, ProjectionFamily::normal(), 9);
  const auto bytes = io::encode_sketch_file(sample_file(rng, cfg, 2, 3));

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK(code_of([&] { io::decode_sketch_file(bad_magic); }) == ErrorCode::Data);
  CHECK(code_of([&] { io::decode_sketch_file(bytes.substr(0, 20)); }) == ErrorCode::Data);
  CHECK(code_of([&] { io::decode_sketch_file(bytes.substr(0, bytes.size() - 1)); }) == ErrorCode::Data);
  CHECK(code_of([&] { io::decode_sketch_file(bytes + "x"); }) == ErrorCode::Data);

  auto bad_version = bytes;
  bad_version[4] = 2;
  CHECK_THROWS_AS(io::decode_sketch_file(bad_version), Error);
  auto bad_p = bytes;
  bad_p[24] = 5;
  CHECK_THROWS_AS(io::decode_sketch_file(bad_p), Error);
  auto bad_family = bytes;
  bad_family[36] = 7;
  CHECK_THROWS_AS(io::decode_sketch_file(bad_family), Error);
}

TEST_CASE("file write and read") {
  const auto dir = std::filesystem::temp_directory_path() / "lpsketch_test_io";
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(4);
  const auto cfg = make_config(4, 4, StrategyKind::Alternative, ProjectionFamily::uniform(), 11);
  const auto file = sample_file(rng, cfg, 3, 5);
  const auto path = dir / "s.lpsk";
  io::write_sketch_file(path, file);
  const auto back = io::read_sketch_file(path);
  CHECK(io::encode_sketch_file(back) == io::encode_sketch_file(file));
  CHECK(code_of([&] { io::read_sketch_file(dir / "missing.lpsk"); }) == ErrorCode::Io);
  std::filesystem::remove_all(dir);
}

TEST_CASE("json output") {
  DistanceEstimate e;
  e.row_a = 1;
  e.row_b = 4;
  e.value = 2.5;
  e.estimator = EstimatorKind::MarginMLE;
  e.flags.mle_on_basic_strategy = true;
  const auto j = io::to_json(e);
  CHECK(j["i"] == 1);
  CHECK(j["j"] == 4);
  CHECK(j["p"] == 4);
  CHECK(j["estimator"] == "mle");
  CHECK(j["value"] == 2.5);
  CHECK(j["clamped"] == false);
  CHECK(j["flags"] == nlohmann::ordered_json::array({"mle_on_basic_strategy"}));

  VarianceReport r;
  r.basic = 4;
  r.alternative = 68;
  r.delta = -64;
  const auto jr = io::to_json(r);
  CHECK(jr["basic"] == 4.0);
  CHECK(jr["identity_holds"] == true);
  CHECK(jr["trials"].is_null());
}
