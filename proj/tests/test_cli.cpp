#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "phi4lab/errors.hpp"
#include "phi4lab/runconfig.hpp"

using namespace phi4lab;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  std::string cmd = std::string(PHI4LAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path tmp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("phi4lab_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config round-trip: parse(serialize(x)) is identity") {
  RunConfig cfg;
  cfg.experiment = "case-study";
  cfg.d = 4;
  cfg.n_range = {4, 6, 8};
  cfg.schedule = "A1-d4";
  cfg.samples = 123;
  cfg.seed = 987654321;
  cfg.out = "runs/demo";
  cfg.threads = 3;
  cfg.torus = 2.5;
  cfg.mollifier_width = 0.2;
  cfg.powers = {2, 4};
  std::string text = cfg.serialize();
  RunConfig back = RunConfig::parse(text);
  CHECK(back.serialize() == text);
  CHECK(back.config_hash() == cfg.config_hash());
}

TEST_CASE("config validation lists every missing field") {
  RunConfig empty;
  empty.experiment.clear();
  empty.n_range.clear();
  empty.out.clear();
  try {
    empty.validate();
    CHECK(false);
  } catch (const Error& e) {
    std::string msg = e.what();
    CHECK(msg.find("experiment") != std::string::npos);
    CHECK(msg.find("n_range") != std::string::npos);
    CHECK(msg.find("out") != std::string::npos);
  }
}

TEST_CASE("config parser rejects junk") {
  CHECK_THROWS_AS(RunConfig::parse("experiment covariance"), Error);
  CHECK_THROWS_AS(RunConfig::parse("unknown_key = 1"), Error);
  CHECK_THROWS_AS(RunConfig::parse("d = four"), Error);
  RunConfig ok = RunConfig::parse("# comment only\n\n");
  CHECK(ok.experiment.empty());
}

TEST_CASE("inline schedule grammar reaches the run config") {
  RunConfig cfg = RunConfig::parse(
      "experiment = case-study\nd = 4\nn_range = 4,6,8\n"
      "schedule.g = 1\nschedule.m = n^2\nschedule.a = 0\nout = x\n");
  RenormSchedule s = cfg.build_schedule({4, 6, 8});
  CHECK(s.m_at(6) == 36.0);
}

TEST_CASE("minimal covariance run produces tables and a verifiable manifest") {
  fs::path dir = tmp_dir("cov");
  RunConfig cfg;
  cfg.experiment = "covariance";
  cfg.d = 3;
  cfg.n_range = {8, 16};
  cfg.out = dir.string();
  RunResult r = run(cfg);
  CHECK(r.exit_status == 0);
  int csvs = 0;
  for (const auto& f : r.manifest.files)
    if (f.path.find(".csv") != std::string::npos) ++csvs;
  CHECK(csvs >= 2);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "verdict.json"));
  std::string summary = report(dir.string());
  CHECK(summary.find("files verified") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("identical config and seed reproduce byte-identical tables") {
  fs::path a = tmp_dir("det_a"), b = tmp_dir("det_b");
  for (const fs::path& dir : {a, b}) {
    RunConfig cfg;
    cfg.experiment = "lln";
    cfg.d = 2;
    cfg.n_range = {2, 3, 4};
    cfg.samples = 120;
    cfg.seed = 31415;
    cfg.threads = dir == a ? 1 : 2;  // thread count must not matter
    cfg.out = dir.string();
    run(cfg);
  }
  for (const char* rel : {"tables/lln.csv", "tables/aggregates_n4.csv"}) {
    CHECK(slurp(a / rel) == slurp(b / rel));
    CHECK(!slurp(a / rel).empty());
  }
  RunManifest ma = RunManifest::from_json_file((a / "manifest.json").string());
  RunManifest mb = RunManifest::from_json_file((b / "manifest.json").string());
  for (size_t i = 0; i < ma.files.size(); ++i) {
    if (ma.files[i].path == "config.txt") continue;  // records the thread count
    CHECK(ma.files[i].checksum == mb.files[i].checksum);
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("tampering is detected by report") {
  fs::path dir = tmp_dir("tamper");
  RunConfig cfg;
  cfg.experiment = "ldp-synthetic";
  cfg.samples = 2000;
  cfg.n_range = {2};
  cfg.out = dir.string();
  run(cfg);
  {
    std::ofstream f(dir / "tables/cramer.csv", std::ios::app);
    f << "tampered\n";
  }
  try {
    report(dir.string());
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Integrity);
    CHECK(std::string(e.what()).find("cramer.csv") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("cli exit codes") {
  // validation error: missing n_range for covariance
  CHECK(run_cli("covariance --out /tmp/phi4lab_test_cli_bad") == 2);
  // report on a missing directory: integrity error
  CHECK(run_cli("report /tmp/phi4lab_no_such_dir") == 4);
  // happy path
  fs::path dir = tmp_dir("cli_ok");
  CHECK(run_cli("covariance -d 3 --n-range 8,16 --out " + dir.string()) == 0);
  CHECK(run_cli("report " + dir.string()) == 0);
  fs::remove_all(dir);
}
