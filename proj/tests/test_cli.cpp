#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lpsketch/cli.hpp"
#include "lpsketch/io.hpp"

using namespace lpsketch;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "lpsketch");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("lpsketch_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    std::ofstream(path / name, std::ios::binary) << content;
    return (path / name).string();
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

const char* kData = "1,0.5,0,2\n0.25,1,1.5,0\n3,1,0,1\n";

}  // namespace

TEST_CASE("argument errors exit with 2") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"bogus"}).code == 2);
  CHECK(cli({"sketch"}).code == 2);
  CHECK(cli({"sketch", "--input", "a.csv", "--output", "b", "--strategy", "fancy"}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("sketch and estimate") {
  TempDir dir;
  const auto csv = dir.file("data.csv", kData);
  const auto sk = dir / "data.lpsk";
  const auto r = cli({"sketch", "--input", csv, "--output", sk, "--k", "16", "--seed", "42"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("compression 4 -> 48") != std::string::npos);

  const auto e = cli({"estimate", "--sketches", sk});
  REQUIRE(e.code == 0);
  const auto j = nlohmann::json::parse(e.out);
  REQUIRE(j.size() == 3);
  CHECK(j[0]["i"] == 0);
  CHECK(j[2]["j"] == 2);
  CHECK(j[0]["estimator"] == "basic");

  // Same numbers as sketching in-process with the same configuration.
  SketchConfig cfg;
  cfg.k = 16;
  cfg.master_seed = 42;
  const auto rows = sketch_matrix(io::parse_csv(kData), cfg);
  CHECK(j[1]["value"].get<double>() == estimate_basic(rows[0], rows[2]).value);

  const auto pairs = dir.file("pairs.txt", "2,1\n");
  const auto out = dir / "est.json";
  REQUIRE(cli({"estimate", "--sketches", sk, "--pairs", pairs, "--output", out, "--clamp"}).code == 0);
  const auto sel = nlohmann::json::parse(slurp(out));
  REQUIRE(sel.size() == 1);
  CHECK(sel[0]["i"] == 1);
  CHECK(sel[0]["j"] == 2);

  CHECK(cli({"estimate", "--sketches", sk, "--pairs", dir.file("far.txt", "0,9\n")}).code == 2);
  CHECK(cli({"estimate", "--sketches", sk, "--estimator", "alternative"}).code == 4);
  const auto mle = cli({"estimate", "--sketches", sk, "--estimator", "mle"});
  REQUIRE(mle.code == 0);
  CHECK(nlohmann::json::parse(mle.out)[0]["flags"][0] == "mle_on_basic_strategy");
}

TEST_CASE("data and compatibility errors") {
  TempDir dir;
  const auto out = dir / "x.lpsk";
  CHECK(cli({"sketch", "--input", dir / "missing.csv", "--output", out}).code == 3);
  CHECK(cli({"sketch", "--input", dir.file("empty.csv", ""), "--output", out}).code == 3);
  CHECK(cli({"sketch", "--input", dir.file("ragged.csv", "1,2\n3\n"), "--output", out}).code == 3);
  CHECK(cli({"sketch", "--input", dir.file("nan.csv", "1,nan\n"), "--output", out}).code == 3);
  CHECK(cli({"estimate", "--sketches", dir.file("junk.lpsk", "not a sketch")}).code == 3);

  const auto csv = dir.file("d.csv", kData);
  CHECK(cli({"sketch", "--input", csv, "--output", out, "--p", "5"}).code == 2);
  CHECK(cli({"sketch", "--input", csv, "--output", out, "--k", "0"}).code == 2);
  CHECK(cli({"sketch", "--input", csv, "--output", out, "--family", "threepoint"}).code == 2);
  CHECK(cli({"sketch", "--input", csv, "--output", out, "--family", "threepoint", "--s", "0.5"}).code == 2);
  CHECK(cli({"sketch", "--input", csv, "--output", out, "--family", "uniform", "--s", "3"}).code == 2);
  CHECK(cli({"sketch", "--input", csv, "--output", out, "--strategy", "alternative", "--p", "8"}).code == 4);

  REQUIRE(cli({"sketch", "--input", csv, "--output", out, "--p", "6"}).code == 0);
  const auto r = cli({"estimate", "--sketches", out, "--estimator", "mle"});
  CHECK(r.code == 4);
  CHECK(r.err.find("p=4") != std::string::npos);
}

TEST_CASE("validate") {
  TempDir dir;
  const auto unit = dir.file("unit.csv", "1,0\n0,1\n");
  const auto r = cli({"validate", "--input", unit, "--k", "1", "--trials", "200"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["basic"] == 4.0);
  CHECK(j["alternative"] == 68.0);
  CHECK(j["delta"] == -64.0);
  CHECK(j["mle_asymptotic"] == 68.0);
  CHECK(j["identity_holds"] == true);
  CHECK(j["subgaussian_s"] == 3.0);
  CHECK(j["subgaussian_variance"] == j["basic"]);
  CHECK(j["trials"] == 200);

  CHECK(cli({"validate", "--input", unit, "--trials", "10"}).code == 2);
  CHECK(cli({"validate", "--input", dir.file("three.csv", kData)}).code == 2);
  CHECK(cli({"validate", "--input", unit, "--p", "8", "--trials", "100"}).code == 4);
}

TEST_CASE("repeat runs are byte-identical") {
  TempDir dir;
  const auto csv = dir.file("d.csv", kData);
  for (const char* strategy : {"basic", "alternative"}) {
    const std::vector<std::string> common{"--k", "8", "--seed", "7", "--strategy", strategy};
    auto args1 = std::vector<std::string>{"sketch", "--input", csv, "--output", dir / "a.lpsk"};
    auto args2 = std::vector<std::string>{"sketch", "--input", csv, "--output", dir / "b.lpsk"};
    args1.insert(args1.end(), common.begin(), common.end());
    args2.insert(args2.end(), common.begin(), common.end());
    REQUIRE(cli(args1).code == 0);
    REQUIRE(cli(args2).code == 0);
    CHECK(slurp(dir / "a.lpsk") == slurp(dir / "b.lpsk"));
    CHECK(cli({"estimate", "--sketches", dir / "a.lpsk"}).out == cli({"estimate", "--sketches", dir / "b.lpsk"}).out);
  }
  const auto unit = dir.file("pair.csv", "1,0.5,0\n0,1,2\n");
  CHECK(cli({"validate", "--input", unit, "--trials", "300", "--seed", "3"}).out ==
        cli({"validate", "--input", unit, "--trials", "300", "--seed", "3"}).out);
}

TEST_CASE("installed binary exit codes") {
  TempDir dir;
  const std::string bin = LPSKETCH_CLI_PATH;
  const auto status = [&](const std::string& args) {
    const int raw = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  const auto csv = dir.file("d.csv", kData);
  const auto sk = dir / "d.lpsk";
  CHECK(status("sketch --input " + csv + " --output " + sk + " --p 6") == 0);
  CHECK(status("estimate --sketches " + sk) == 0);
  CHECK(status("estimate --sketches " + sk + " --estimator mle") == 4);
  CHECK(status("sketch --input " + dir.file("e.csv", "") + " --output " + sk) == 3);
  CHECK(status("sketch --bogus") == 2);
}
