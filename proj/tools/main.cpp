#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "phi4lab/errors.hpp"
#include "phi4lab/runconfig.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitIntegrity = 4;
constexpr int kExitInconclusive = 5;

int exit_code_for(const phi4lab::Error& e) {
  switch (e.kind()) {
    case phi4lab::ErrorKind::Capacity:
      return kExitCapacity;
    case phi4lab::ErrorKind::Integrity:
      return kExitIntegrity;
    default:
      return kExitValidation;
  }
}

struct CommonFlags {
  std::string config_path;
  std::string out;
  std::string n_range;
  std::string schedule;
  uint64_t seed = 0;
  uint64_t samples = 0;
  int threads = 0;
  int d = 0;
  bool has_seed = false, has_samples = false, has_threads = false, has_d = false;
};

void attach_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "run configuration file (key = value lines)");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "master seed (u64)")->each([&](const std::string&) {
    f.has_seed = true;
  });
  cmd->add_option("--samples", f.samples, "Monte Carlo sample count")
      ->each([&](const std::string&) { f.has_samples = true; });
  cmd->add_option("--threads", f.threads, "worker threads")
      ->each([&](const std::string&) { f.has_threads = true; });
  cmd->add_option("-d,--dimension", f.d, "space dimension")
      ->each([&](const std::string&) { f.has_d = true; });
  cmd->add_option("--n-range", f.n_range, "comma-separated cutoffs, e.g. 4,6,8");
  cmd->add_option("--schedule", f.schedule, "renormalization schedule preset");
}

int run_experiment(const std::string& experiment, const CommonFlags& f) {
  phi4lab::RunConfig cfg;
  if (!f.config_path.empty()) cfg = phi4lab::RunConfig::from_file(f.config_path);
  cfg.experiment = experiment;
  if (!f.out.empty()) cfg.out = f.out;
  if (f.has_seed) cfg.seed = f.seed;
  if (f.has_samples) cfg.samples = f.samples;
  if (f.has_threads) cfg.threads = f.threads;
  if (f.has_d) cfg.d = f.d;
  if (!f.n_range.empty()) {
    cfg.n_range.clear();
    std::string tok;
    for (char c : f.n_range + ",") {
      if (c == ',') {
        if (!tok.empty()) cfg.n_range.push_back(std::stoi(tok));
        tok.clear();
      } else {
        tok += c;
      }
    }
  }
  if (!f.schedule.empty()) cfg.schedule = f.schedule;

  phi4lab::RunResult result = phi4lab::run(cfg);
  std::printf("%s\n", result.verdict_line.c_str());
  std::printf("wrote %zu files under %s (manifest.json records checksums)\n",
              result.manifest.files.size(), cfg.out.c_str());
  return result.exit_status == 5 ? kExitInconclusive : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phi4lab: cutoff phi^4 field experiments at desk scale"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string report_dir;

  CLI::App* covariance = app.add_subcommand("covariance", "covariance scaling tables");
  CLI::App* lln = app.add_subcommand("lln", "law-of-large-numbers decay sweep");
  CLI::App* decorrelation =
      app.add_subcommand("decorrelation", "cell moment and correlation report");
  CLI::App* ldp = app.add_subcommand("ldp", "synthetic large-deviations battery");
  CLI::App* case_cmd = app.add_subcommand("case", "theorem case study (partition + density)");
  CLI::App* report_cmd = app.add_subcommand("report", "verify a run and emit its summary");
  for (CLI::App* cmd : {covariance, lln, decorrelation, ldp, case_cmd})
    attach_common(cmd, flags);
  report_cmd->add_option("dir", report_dir, "run directory with manifest.json")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (covariance->parsed()) return run_experiment("covariance", flags);
    if (lln->parsed()) return run_experiment("lln", flags);
    if (decorrelation->parsed()) return run_experiment("decorrelation", flags);
    if (ldp->parsed()) return run_experiment("ldp-synthetic", flags);
    if (case_cmd->parsed()) return run_experiment("case-study", flags);
    if (report_cmd->parsed()) {
      std::string summary = phi4lab::report(report_dir);
      std::fputs(summary.c_str(), stdout);
      return kExitOk;
    }
  } catch (const phi4lab::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
  return kExitOk;
}
