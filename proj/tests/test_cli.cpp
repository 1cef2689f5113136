#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "degenlap/cli.hpp"
#include "degenlap/config.hpp"
#include "degenlap/error.hpp"

namespace fs = std::filesystem;
using namespace degenlap;
using nlohmann::json;

namespace {

const std::string kData = DEGENLAP_TEST_DATA;

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::vector<std::string> full{"degenlap"};
  full.insert(full.end(), args.begin(), args.end());
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(full, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("degenlap_test_cli") / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string data(const std::string& file) { return kData + "/" + file; }

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path dir = scratch("configs");
  fs::create_directories(dir);
  const fs::path path = dir / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = config::Config::parse(
      "# comment\n"
      "top = 1\n"
      "[weight]\n"
      "family = \"power\"  # trailing\n"
      "alpha = 0.25\n"
      "[verify]\n"
      "scenarios = [\"a\", \"b\"]\n"
      "grid = [1, 2.5, 1e3]\n");
  CHECK(cfg.get_double("top", 0.0) == 1.0);
  CHECK(cfg.get_string("weight.family", "") == "power");
  CHECK(cfg.get_double("weight.alpha", 0.0) == 0.25);
  CHECK(cfg.get_double("weight.c", 7.0) == 7.0);
  CHECK_FALSE(cfg.find_double("weight.c").has_value());
  CHECK(cfg.get_strings("verify.scenarios") == std::vector<std::string>{"a", "b"});
  CHECK(cfg.get_list("verify.grid") == std::vector<double>{1.0, 2.5, 1000.0});
  CHECK(cfg.get_int("top", 0) == 1);

  CHECK_THROWS_AS(config::Config::parse("a = 1\na = 2\n"), Error);
  CHECK_THROWS_AS(config::Config::parse("[open\n"), Error);
  CHECK_THROWS_AS(config::Config::parse("novalue\n"), Error);
  CHECK_THROWS_AS((void)config::Config::parse("a = x\n").get_double("a", 0.0), Error);
  CHECK_THROWS_AS((void)config::Config::parse("a = 1.5\n").get_int("a", 0), Error);
  CHECK_THROWS_AS(cfg.require_known({"top", "weight.family"}), Error);
  CHECK_NOTHROW(cfg.require_known(
      {"top", "weight.family", "weight.alpha", "verify.scenarios", "verify.grid"}));
  CHECK_THROWS_AS(config::Config::load("/nonexistent/config.toml"), Error);
}

TEST_CASE("exit code mapping") {
  CHECK(cli::exit_code(ErrorCode::ConfigError) == cli::kUsage);
  CHECK(cli::exit_code(ErrorCode::InvalidArgument) == cli::kUsage);
  CHECK(cli::exit_code(ErrorCode::NoConvergence) == cli::kSolverFailure);
  CHECK(cli::exit_code(ErrorCode::BracketFailure) == cli::kSolverFailure);
  CHECK(cli::exit_code(ErrorCode::NaNEncountered) == cli::kSolverFailure);
  CHECK(cli::exit_code(ErrorCode::InvalidExponents) == cli::kCertificateFailure);
  CHECK(cli::exit_code(ErrorCode::BelowLambdaHat1) == cli::kCertificateFailure);
  CHECK(cli::exit_code(ErrorCode::GeometryInadmissible) == cli::kCertificateFailure);
}

TEST_CASE("number formatting and digests") {
  CHECK(cli::format_number(0.1) == "1.0000000000000001e-01");
  CHECK(std::stod(cli::format_number(1.0 / 3.0)) == 1.0 / 3.0);
  const fs::path dir = scratch("digest");
  fs::create_directories(dir);
  std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
  CHECK(cli::file_digest((dir / "abc.txt").string()) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("validate") {
  const fs::path out = scratch("validate_ok");
  const auto ok = run({"validate", "--config", data("ok.toml"), "--out", out.string()});
  CHECK(ok.code == 0);
  const json report = json::parse(slurp(out / "validation.json"));
  CHECK(report["valid"] == true);

  const fs::path bad_out = scratch("validate_t2");
  const auto bad = run({"validate", "--config", data("weight_t2.toml"), "--out", bad_out.string()});
  CHECK(bad.code == 3);
  CHECK((bad.out + bad.err).find("a^{-1} not in L^s(0,rho0)") != std::string::npos);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"validate"}).code == 1);
  CHECK(run({"validate", "--config", "/nonexistent.toml"}).code == 1);
  const auto unknown = write_config("unknown.toml", "[problem]\np = 2\nbogus = 1\n");
  const auto r = run({"validate", "--config", unknown.string(), "--out", scratch("unknown").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("bogus") != std::string::npos);
  CHECK(run({"verify", "--config", data("verify_empty.toml"), "--out", scratch("empty").string()})
            .code == 1);
  CHECK(run({"verify", "--scenario", "nope", "--out", scratch("nope").string()}).code == 1);
}

TEST_CASE("manifest digests match the outputs") {
  const fs::path out = scratch("psi");
  const auto r = run({"psi", "--config", data("ok.toml"), "--out", out.string()});
  REQUIRE(r.code == 0);
  const json m = json::parse(slurp(out / "manifest.json"));
  CHECK(m["subcommand"] == "psi");
  CHECK(m["exit_code"] == 0);
  CHECK(m["config"]["weight.family"] == "uniform");
  REQUIRE(m["outputs"].size() == 2);
  for (const auto& f : m["outputs"]) {
    const fs::path path = out / f["file"].get<std::string>();
    CHECK(cli::file_digest(path.string()) == f["sha256"].get<std::string>());
    CHECK(fs::file_size(path) == f["bytes"].get<std::uint64_t>());
  }
}

TEST_CASE("resolvent output carries 17 significant digits") {
  const fs::path out = scratch("resolvent");
  const auto r = run({"resolvent", "--config", data("ok.toml"), "--out", out.string(),
                      "--mesh-cells", "256"});
  REQUIRE(r.code == 0);
  std::ifstream csv(out / "solution.csv");
  std::string header, row;
  std::getline(csv, header);
  CHECK(header == "x,dist,w,flux");
  double sup = 0.0;
  while (std::getline(csv, row)) {
    std::stringstream ss(row);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 4);
    const auto mant = cells[2].substr(0, cells[2].find('e'));
    CHECK(mant.size() >= 18);  // d.dddddddddddddddd
    sup = std::max(sup, std::stod(cells[2]));
  }
  CHECK(sup == doctest::Approx(0.125).epsilon(1e-8));
  const json rep = json::parse(slurp(out / "report.json"));
  CHECK(rep["weak_residual"].get<double>() <= 1e-8);
}

TEST_CASE("solve below the first threshold fails") {
  const auto r = run({"solve", "--config", data("semipositone.toml"), "--lambda", "1e-6", "--out",
                      scratch("below").string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("BelowLambdaHat1") != std::string::npos);
}

TEST_CASE("barriers and solve on the model problem") {
  const fs::path out = scratch("barriers");
  const auto b = run({"barriers", "--config", data("semipositone.toml"), "--lambda", "1e5", "--out",
                      out.string()});
  REQUIRE(b.code == 0);
  const json th = json::parse(slurp(out / "thresholds.json"));
  const double lambda0 = th["thresholds"]["lambda_0"].get<double>();
  CHECK(lambda0 > 0.0);
  CHECK(fs::exists(out / "u_lower.csv"));
  CHECK(fs::exists(out / "u_upper.csv"));

  const fs::path sout = scratch("solve");
  const auto s = run({"solve", "--config", data("semipositone.toml"), "--lambda",
                      cli::format_number(2.0 * lambda0), "--out", sout.string()});
  CHECK(s.code == 0);
  const json rep = json::parse(slurp(sout / "report.json"));
  CHECK(rep["iteration"]["converged"] == true);
  CHECK(rep["middle_third_min"].get<double>() > 0.0);
}

TEST_CASE("sweep") {
  const fs::path out = scratch("sweep");
  const auto r = run({"sweep", "--config", data("semipositone.toml"), "--out", out.string()});
  CHECK(r.code == 0);
  std::ifstream csv(out / "sweep.csv");
  std::string line;
  int rows = -1;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("verify is deterministic") {
  const fs::path a = scratch("verify_a");
  const fs::path b = scratch("verify_b");
  const auto ra = run({"verify", "--config", data("verify.toml"), "--out", a.string()});
  const auto rb = run({"verify", "--config", data("verify.toml"), "--out", b.string()});
  CHECK(ra.code == 0);
  CHECK(rb.code == 0);
  CHECK(slurp(a / "verify.json") == slurp(b / "verify.json"));
  const json v = json::parse(slurp(a / "verify.json"));
  CHECK(v["seed"] == 7);
  CHECK(v["scenarios"].size() == 2);
  CHECK(ra.out.find("EXPECTED-PASS") != std::string::npos);
}
