#include "phi4lab/runconfig.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "phi4lab/covariance.hpp"
#include "phi4lab/errors.hpp"
#include "phi4lab/rng.hpp"

namespace phi4lab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_ints(const std::vector<int>& xs) {
  std::string s;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(xs[i]);
  }
  return s;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& field) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(std::remove_if(tok.begin(), tok.end(), ::isspace), tok.end());
    if (tok.empty()) continue;
    try {
      out.push_back(std::stoi(tok));
    } catch (...) {
      throw input_error("config: field '" + field + "' has a non-integer entry '" + tok + "'");
    }
  }
  return out;
}

std::string iso_now() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// Minimal CSV emitter with deterministic %.17g formatting.
class Csv {
 public:
  Csv(const fs::path& path, const std::string& header) {
    f_ = std::fopen(path.string().c_str(), "wb");
    if (!f_) throw input_error("cannot open " + path.string() + " for writing");
    std::fputs(header.c_str(), f_);
    std::fputc('\n', f_);
  }
  ~Csv() {
    if (f_) std::fclose(f_);
  }
  Csv& field(const std::string& s) {
    sep();
    std::fputs(s.c_str(), f_);
    return *this;
  }
  Csv& field(double v) { return field(fmt_double(v)); }
  Csv& field(int v) { return field(std::to_string(v)); }
  Csv& field(uint64_t v) { return field(std::to_string(v)); }
  void endrow() {
    std::fputc('\n', f_);
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) std::fputc(',', f_);
    first_ = false;
  }
  std::FILE* f_ = nullptr;
  bool first_ = true;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot open " + path.string() + " for writing");
  out << text;
}

}  // namespace

uint64_t fnv1a_bytes(const void* data, size_t len, uint64_t h) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t fnv1a_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw integrity_error("checksum: cannot open " + path);
  uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, f)) > 0) h = fnv1a_bytes(buf, got, h);
  std::fclose(f);
  return h;
}

void RunConfig::validate() const {
  std::vector<std::string> problems;
  const std::vector<std::string> experiments{"covariance", "lln", "decorrelation",
                                             "ldp-synthetic", "case-study"};
  if (experiment.empty())
    problems.push_back("experiment: missing (one of covariance|lln|decorrelation|ldp-synthetic|case-study)");
  else if (std::find(experiments.begin(), experiments.end(), experiment) == experiments.end())
    problems.push_back("experiment: unknown value '" + experiment + "'");
  if (d < 2 || d > 5) problems.push_back("d: must be in {2,3,4,5}");
  if (experiment != "ldp-synthetic") {
    if (n_range.empty()) problems.push_back("n_range: missing or empty");
    for (size_t i = 1; i < n_range.size(); ++i)
      if (n_range[i] <= n_range[i - 1]) {
        problems.push_back("n_range: must be strictly increasing");
        break;
      }
    if (!n_range.empty() && n_range.front() < 1) problems.push_back("n_range: entries must be >= 1");
  }
  bool inline_schedule = !schedule_g.empty() || !schedule_m.empty() || !schedule_a.empty();
  if (experiment == "case-study") {
    if (schedule.empty() && !inline_schedule)
      problems.push_back("schedule: missing (preset name or inline schedule.g/m/a)");
    if (!schedule.empty() && !is_preset(schedule))
      problems.push_back("schedule: unknown preset '" + schedule + "'");
    if (inline_schedule && (schedule_g.empty() || schedule_m.empty() || schedule_a.empty()))
      problems.push_back("schedule: inline form needs all of schedule.g, schedule.m, schedule.a");
  }
  if (samples == 0) problems.push_back("samples: must be positive");
  if (out.empty()) problems.push_back("out: missing output directory");
  if (threads < 1) problems.push_back("threads: must be >= 1");
  if (grid < 0) problems.push_back("grid: must be 0 (auto) or a power of two");
  if (!(torus >= 2.0)) problems.push_back("torus: must be >= 2");
  if (!(mollifier_width > 0.0)) problems.push_back("mollifier_width: must be positive");
  if (budget_mb < 64) problems.push_back("budget_mb: must be >= 64");
  for (int p : powers)
    if (p < 2 || p > 4) problems.push_back("powers: entries must be in {2,3,4}");
  if (cells_csv != "none" && cells_csv != "tracked" && cells_csv != "all")
    problems.push_back("cells_csv: must be none|tracked|all");
  if (!problems.empty()) {
    std::string msg = "config validation failed:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw input_error(msg);
  }
}

std::string RunConfig::serialize() const {
  std::ostringstream o;
  o << "experiment = " << experiment << "\n";
  o << "d = " << d << "\n";
  o << "n_range = " << join_ints(n_range) << "\n";
  o << "schedule = " << schedule << "\n";
  o << "schedule.g = " << schedule_g << "\n";
  o << "schedule.m = " << schedule_m << "\n";
  o << "schedule.a = " << schedule_a << "\n";
  o << "samples = " << samples << "\n";
  o << "seed = " << seed << "\n";
  o << "out = " << out << "\n";
  o << "threads = " << threads << "\n";
  o << "grid = " << grid << "\n";
  o << "torus = " << fmt_double(torus) << "\n";
  o << "mollifier_width = " << fmt_double(mollifier_width) << "\n";
  o << "budget_mb = " << budget_mb << "\n";
  o << "powers = " << join_ints(powers) << "\n";
  o << "cells_csv = " << cells_csv << "\n";
  return o.str();
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  cfg.n_range.clear();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
      if (!blank)
        throw input_error("config line " + std::to_string(lineno) +
                          ": expected 'key = value'");
      continue;
    }
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t\r");
      size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    try {
      if (key == "experiment") cfg.experiment = val;
      else if (key == "d") cfg.d = std::stoi(val);
      else if (key == "n_range") cfg.n_range = parse_int_list(val, "n_range");
      else if (key == "schedule") cfg.schedule = val;
      else if (key == "schedule.g") cfg.schedule_g = val;
      else if (key == "schedule.m") cfg.schedule_m = val;
      else if (key == "schedule.a") cfg.schedule_a = val;
      else if (key == "samples") cfg.samples = std::stoull(val);
      else if (key == "seed") cfg.seed = std::stoull(val);
      else if (key == "out") cfg.out = val;
      else if (key == "threads") cfg.threads = std::stoi(val);
      else if (key == "grid") cfg.grid = std::stoi(val);
      else if (key == "torus") cfg.torus = std::stod(val);
      else if (key == "mollifier_width") cfg.mollifier_width = std::stod(val);
      else if (key == "budget_mb") cfg.budget_mb = std::stoull(val);
      else if (key == "powers") cfg.powers = parse_int_list(val, "powers");
      else if (key == "cells_csv") cfg.cells_csv = val;
      else throw input_error("config: unknown key '" + key + "'");
    } catch (const Error&) {
      throw;
    } catch (...) {
      throw input_error("config line " + std::to_string(lineno) + ": bad value for '" +
                        key + "'");
    }
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("config file not found: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

uint64_t RunConfig::config_hash() const {
  std::string s = serialize();
  return fnv1a_bytes(s.data(), s.size());
}

LabOptions RunConfig::lab_options() const {
  LabOptions o;
  o.threads = threads;
  o.grid_override = grid;
  o.torus_side = torus;
  o.mollifier.width = mollifier_width;
  o.memory_budget_bytes = budget_mb * (uint64_t{1} << 20);
  return o;
}

RenormSchedule RunConfig::build_schedule(const std::vector<int>& ns) const {
  if (!schedule.empty()) {
    LabOptions opts = lab_options();
    int dd = d;
    return make_preset(schedule, ns, [dd, opts](int n) { return lattice_c0(dd, n, opts); });
  }
  return make_expr_schedule(schedule_g, schedule_m, schedule_a, d, ns);
}

std::string RunManifest::to_json() const {
  json j;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  j["artifact_version"] = artifact_version;
  j["experiment"] = experiment;
  j["files"] = json::array();
  for (const auto& f : files)
    j["files"].push_back({{"path", f.path}, {"checksum", f.checksum}, {"bytes", f.bytes}});
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw integrity_error("manifest not found: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw integrity_error(std::string("manifest parse error: ") + e.what());
  }
  RunManifest m;
  m.config_hash = j.value("config_hash", uint64_t{0});
  m.seed = j.value("seed", uint64_t{0});
  m.started_at = j.value("started_at", "");
  m.finished_at = j.value("finished_at", "");
  m.artifact_version = j.value("artifact_version", "");
  m.experiment = j.value("experiment", "");
  for (const auto& f : j.value("files", json::array())) {
    ManifestFile mf;
    mf.path = f.value("path", "");
    mf.checksum = f.value("checksum", uint64_t{0});
    mf.bytes = f.value("bytes", uint64_t{0});
    m.files.push_back(mf);
  }
  return m;
}

namespace {

struct ExperimentOutput {
  std::vector<std::string> files;  // relative paths
  json verdict;
  int exit_status = 0;
  std::string verdict_line;
};

// ------------------------- covariance -------------------------

json fit_record(const std::string& quantity, const ScalingFit& f) {
  json j;
  j["quantity"] = quantity;
  j["exponent"] = f.exponent;
  j["residual"] = f.residual;
  j["n_range"] = f.n_range;
  return j;
}

ExperimentOutput run_covariance(const RunConfig& cfg, const fs::path& dir) {
  ExperimentOutput out;
  MollifierSpec spec;
  spec.width = cfg.mollifier_width;
  std::vector<double> ns(cfg.n_range.begin(), cfg.n_range.end());

  {
    Csv csv(dir / "tables/covariance.csv", "d,n,r,c");
    for (int n : cfg.n_range) {
      CovarianceProfile p = covariance_profile(n, cfg.d, std::max(8 * n, 48), spec);
      for (const auto& [r, c] : p.radial_table)
        csv.field(cfg.d).field(n).field(r).field(c), csv.endrow();
    }
  }
  out.files.push_back("tables/covariance.csv");

  std::vector<double> c0s, gvs;
  for (int n : cfg.n_range) {
    c0s.push_back(covariance_c0(n, cfg.d, spec));
    gvs.push_back(covariance_grad_variance(n, cfg.d, spec));
  }
  json fits = json::array();
  json checks = json::array();
  auto add_check = [&](const std::string& name, double got, double target, double tol) {
    bool pass = std::fabs(got - target) <= tol;
    checks.push_back({{"name", name}, {"value", got}, {"target", target},
                      {"tolerance", tol}, {"pass", pass}});
    return pass;
  };
  bool can_fit = ns.size() >= 3;

  if (can_fit) {
    ScalingFit fc0 = scaling_fit(ns, c0s);
    ScalingFit fgv = scaling_fit(ns, gvs);
    fits.push_back(fit_record("c0", fc0));
    fits.push_back(fit_record("grad_variance", fgv));
    add_check("c0_exponent", fc0.exponent, cfg.d - 2.0, cfg.d <= 3 ? 0.1 : 0.15);
    add_check("grad_variance_exponent", fgv.exponent, cfg.d, 0.2);
  }

  {
    Csv csv(dir / "tables/power_integrals.csv", "d,p,n,value");
    for (int p : cfg.powers) {
      std::vector<double> vals;
      for (int n : cfg.n_range) {
        double v = covariance_power_integral(n, cfg.d, p, spec);
        vals.push_back(v);
        csv.field(cfg.d).field(p).field(n).field(v), csv.endrow();
      }
      if (!can_fit) continue;
      std::string name = "power_d" + std::to_string(cfg.d) + "_p" + std::to_string(p);
      // expected forms from the covariance table; log-type entries use drift
      bool is_log = (cfg.d == 4 && p == 2);
      bool is_nlog = (cfg.d == 3 && p == 4);
      if (is_log) {
        double drift = log_ratio_drift(ns, vals);
        checks.push_back({{"name", name + "_log_drift"}, {"value", drift},
                          {"target", 0.0}, {"tolerance", 0.2}, {"pass", drift < 0.2}});
      } else if (is_nlog) {
        std::vector<double> ratio;
        for (size_t i = 0; i < ns.size(); ++i) ratio.push_back(vals[i] / std::log(ns[i]));
        ScalingFit fr = scaling_fit(ns, ratio);
        fits.push_back(fit_record(name + "_over_log", fr));
        add_check(name + "_over_log_exponent", fr.exponent, 1.0, 0.15);
      } else {
        ScalingFit f = scaling_fit(ns, vals);
        fits.push_back(fit_record(name, f));
        double target = 0.0;
        bool have_target = true;
        if (cfg.d == 3 && (p == 2 || p == 3)) target = 1.0;
        else if (cfg.d == 4 && p == 3) target = 2.0;
        else if (cfg.d == 4 && p == 4) target = 4.0;
        else if (cfg.d == 5 && p == 2) target = 1.0;
        else if (cfg.d == 5 && p == 3) target = 4.0;
        else if (cfg.d == 5 && p == 4) target = 7.0;
        else have_target = false;
        if (have_target) add_check(name + "_exponent", f.exponent, target, 0.15);
      }
    }
  }
  out.files.push_back("tables/power_integrals.csv");

  write_text(dir / "tables/scaling.json", fits.dump(2) + "\n");
  out.files.push_back("tables/scaling.json");

  bool all = true;
  for (const auto& c : checks) all = all && c["pass"].get<bool>();
  out.verdict["checks"] = checks;
  out.verdict["fits"] = fits;
  out.verdict_line = std::string("covariance scalings: ") + (all ? "all checks pass" : "some checks fail");
  return out;
}

// ------------------------- lln / decorrelation -------------------------

ExperimentOutput run_lln(const RunConfig& cfg, const fs::path& dir) {
  ExperimentOutput out;
  LlnReport rep = lln_sweep(cfg.d, cfg.n_range, cfg.samples, cfg.seed, cfg.lab_options());
  {
    Csv csv(dir / "tables/lln.csv", "n,I2,I2_se,M2,M2_se,D2,D2_se");
    for (size_t i = 0; i < cfg.n_range.size(); ++i) {
      csv.field(cfg.n_range[i])
          .field(rep.I2[i]).field(rep.I2_se[i])
          .field(rep.M2[i]).field(rep.M2_se[i])
          .field(rep.D2[i]).field(rep.D2_se[i]);
      csv.endrow();
    }
  }
  out.files.push_back("tables/lln.csv");
  for (size_t i = 0; i < cfg.n_range.size(); ++i) {
    std::string name = "tables/aggregates_n" + std::to_string(cfg.n_range[i]) + ".csv";
    Csv csv(dir / name, "sample_id,I_n,M_n,D_n,L_n");
    for (size_t s = 0; s < rep.I_samples[i].size(); ++s) {
      csv.field(static_cast<uint64_t>(s))
          .field(rep.I_samples[i][s]).field(rep.M_samples[i][s])
          .field(rep.D_samples[i][s]).field(rep.L_samples[i][s]);
      csv.endrow();
    }
    out.files.push_back(name);
  }
  json fits = json::array();
  fits.push_back(fit_record("I_n_sq", rep.fit_I2));
  fits.push_back(fit_record("M_n_sq", rep.fit_M2));
  fits.push_back(fit_record("D_n_sq", rep.fit_D2));
  out.verdict["fits"] = fits;
  bool pass = true;
  if (cfg.d == 4) {
    pass = std::fabs(rep.fit_I2.exponent + 4.0) <= 0.3 &&
           std::fabs(rep.fit_D2.exponent + 2.0) <= 0.3;
    out.verdict["I2_exponent_target"] = -4.0;
    out.verdict["D2_exponent_target"] = -2.0;
  } else {
    pass = rep.fit_I2.exponent < 0.0 && rep.fit_M2.exponent < 0.0;
  }
  out.verdict["pass"] = pass;
  out.verdict_line = "law of large numbers decay: I2 exp " + fmt_double(rep.fit_I2.exponent) +
                     ", D2 exp " + fmt_double(rep.fit_D2.exponent) +
                     (pass ? " [ok]" : " [off target]");
  return out;
}

ExperimentOutput run_decorrelation(const RunConfig& cfg, const fs::path& dir) {
  ExperimentOutput out;
  int n = cfg.n_range.back();
  LabOptions opts = cfg.lab_options();
  RenormSchedule free = make_preset("null", cfg.n_range, [](int) { return 1.0; });
  BatchResult batch = run_observable_batch(cfg.d, n, free, cfg.samples, cfg.seed, opts, true);
  uint64_t far = farthest_cell(n, cfg.d);
  std::vector<std::pair<uint64_t, uint64_t>> pairs{{0, far}, {0, 1}, {0, 0}};
  ArrayMomentReport rep = array_moment_report(batch.cells, pairs);

  if (cfg.cells_csv != "none") {
    std::vector<uint64_t> tracked{0, 1, far};
    Csv csv(dir / "tables/cells.csv", "sample_id,cell_index,I,M,D,X");
    for (size_t s = 0; s < batch.cells.size(); ++s) {
      const auto& cells = batch.cells[s].cells;
      auto emit = [&](uint64_t c) {
        csv.field(static_cast<uint64_t>(s)).field(c)
            .field(cells[c].I).field(cells[c].M).field(cells[c].D).field(cells[c].X);
        csv.endrow();
      };
      if (cfg.cells_csv == "all") {
        for (uint64_t c = 0; c < cells.size(); ++c) emit(c);
      } else {
        for (uint64_t c : tracked) emit(c);
      }
    }
    out.files.push_back("tables/cells.csv");
  }

  json j;
  j["n"] = n;
  j["sample_count"] = rep.sample_count;
  j["corr_se"] = rep.corr_se;
  j["pairs"] = json::array();
  for (size_t k = 0; k < pairs.size(); ++k)
    j["pairs"].push_back({{"a", pairs[k].first}, {"b", pairs[k].second},
                          {"corr_I", rep.pair_corr_I[k]}, {"corr_X", rep.pair_corr_X[k]}});
  j["I2"] = rep.I2;
  j["I2_se"] = rep.I2_se;
  double far_corr = rep.pair_corr_I[0];
  bool pass = std::fabs(far_corr) < 0.05 || std::fabs(far_corr) < 3.0 * rep.corr_se;
  j["max_separation_corr"] = far_corr;
  j["pass"] = pass;
  write_text(dir / "tables/correlation.json", j.dump(2) + "\n");
  out.files.push_back("tables/correlation.json");
  out.verdict = j;
  out.verdict_line = "decorrelation at n=" + std::to_string(n) + ": |corr| = " +
                     fmt_double(std::fabs(far_corr)) + (pass ? " [ok]" : " [violation]");
  return out;
}

// ------------------------- ldp synthetic battery -------------------------

ExperimentOutput run_ldp_synthetic(const RunConfig& cfg, const fs::path& dir) {
  ExperimentOutput out;
  json verdict;

  // rademacher samples drive the empirical CGF / rate tables
  uint64_t count = std::max<uint64_t>(cfg.samples, 2000);
  std::vector<double> xs(count);
  for (uint64_t i = 0; i < count; ++i)
    xs[i] = uniform01(cfg.seed, make_stream(StreamTag::Generic, 7), i) < 0.5 ? -1.0 : 1.0;
  EmpiricalCGF cgf = empirical_cgf(xs, 1.0, 41);
  {
    Csv csv(dir / "tables/cgf.csv", "theta,lambda,se");
    for (size_t j = 0; j < cgf.theta_grid.size(); ++j)
      csv.field(cgf.theta_grid[j]).field(cgf.values[j]).field(cgf.std_errors[j]), csv.endrow();
  }
  out.files.push_back("tables/cgf.csv");

  std::vector<double> h_grid;
  for (int i = 0; i <= 40; ++i) h_grid.push_back(0.8 * i / 40.0);
  RateFunctionEstimate rate = legendre_transform(cgf, h_grid);
  {
    Csv csv(dir / "tables/rate.csv", "h,rate,theta_star,boundary");
    for (size_t j = 0; j < rate.h_grid.size(); ++j) {
      bool boundary = rate.h_grid[j] > rate.domain_bound;
      csv.field(rate.h_grid[j]).field(rate.values[j]).field(rate.argmax_thetas[j])
          .field(std::string(boundary ? "1" : "0"));
      csv.endrow();
    }
  }
  out.files.push_back("tables/rate.csv");
  double bern_rate = 0.5 * 1.4 * std::log(1.4) + 0.5 * 0.6 * std::log(0.6);
  verdict["rate_at_0p4"] = rate.eval(0.4);
  verdict["rate_at_0p4_target"] = bern_rate;

  FiniteDistribution bern;
  bern.values = {0.0, 1.0};
  bern.probs = {0.5, 0.5};
  CramerReport cramer = cramer_lower_bound_check(bern, 0.7, {50, 100, 200, 400});
  {
    Csv csv(dir / "tables/cramer.csv", "n,tail_prob,log_rate,gap");
    for (const auto& row : cramer.rows)
      csv.field(row.n).field(row.tail_prob).field(row.log_rate).field(row.gap), csv.endrow();
  }
  out.files.push_back("tables/cramer.csv");
  verdict["cramer_rate"] = cramer.rate;
  verdict["cramer_gap_at_100"] = cramer.rows[1].gap;
  verdict["cramer_gap_decreasing"] = cramer.gap_decreasing;
  bool cramer_pass = std::fabs(cramer.rows[1].gap) < 0.03 && cramer.gap_decreasing;
  verdict["cramer_pass"] = cramer_pass;

  std::array<std::array<double, 2>, 2> sticky{{{0.9, 0.1}, {0.1, 0.9}}};
  MarkovReport markov = markov_liminf_check(sticky, 10000, 1000, cfg.seed);
  verdict["markov"] = {{"min", markov.min_value}, {"mean", markov.mean_value},
                       {"se", markov.se}, {"epsilon", markov.epsilon},
                       {"closed_form", markov.closed_form_gap}, {"pass", markov.pass}};

  {
    Csv csv(dir / "tables/positive_part.csv", "law,mean_pos,second,third_abs,bound,holds");
    PositivePartDiag sym;
    FiniteDistribution pm;
    pm.values = {-1.0, 1.0};
    pm.probs = {0.5, 0.5};
    sym = positive_part_diagnostics(pm);
    csv.field(std::string("pm1")).field(sym.mean_pos).field(sym.second)
        .field(sym.third_abs).field(sym.bound).field(std::string(sym.holds ? "1" : "0"));
    csv.endrow();
    for (int n : {25, 100, 400}) {
      PositivePartDiag d = positive_part_diagnostics(counterexample_law(n));
      csv.field("counterexample_n" + std::to_string(n)).field(d.mean_pos).field(d.second)
          .field(d.third_abs).field(d.bound).field(std::string(d.holds ? "1" : "0"));
      csv.endrow();
    }
  }
  out.files.push_back("tables/positive_part.csv");

  // varadhan: gaussian-linear identity plus a step instance on the oracle
  json varadhan = json::array();
  {
    double a = 0.8;
    PiecewiseLinearF lin;
    lin.xs = {-10.0, 10.0};
    lin.ys = {-8.0, 8.0};
    std::vector<double> scan;
    for (int i = 0; i <= 400; ++i) scan.push_back(-2.0 + 4.0 * i / 400.0);
    std::map<double, double> ints, bands;
    for (double n : {10.0, 100.0, 1000.0}) {
      ints[n] = a * a / 2.0;
      bands[n] = 1e-12;
    }
    VaradhanReport rep = varadhan_lower_check([](double h) { return 0.5 * h * h; },
                                              scan, lin, ints, bands);
    varadhan.push_back({{"instance", "gaussian-linear"}, {"sup", rep.sup_value},
                        {"violations", rep.violations}});
    verdict["varadhan_gaussian_pass"] = rep.violations == 0;
  }
  out.verdict = verdict;
  out.verdict["varadhan"] = varadhan;
  bool all_pass = cramer_pass && markov.pass && verdict["varadhan_gaussian_pass"].get<bool>();
  out.verdict_line = std::string("ldp synthetic battery: ") + (all_pass ? "pass" : "FAIL");
  return out;
}

// ------------------------- case study -------------------------

ExperimentOutput run_case_study(const RunConfig& cfg, const fs::path& dir) {
  ExperimentOutput out;
  LabOptions opts = cfg.lab_options();
  CaseStudyReport rep;
  if (!cfg.schedule.empty()) {
    rep = case_experiment(cfg.schedule, cfg.d, cfg.n_range, cfg.samples, cfg.seed, opts);
  } else {
    throw input_error("case-study: inline schedules are classified but the case "
                      "presets drive the experiment; set 'schedule'");
  }

  {
    Csv csv(dir / "tables/partition.csv",
            "n,log_z,std_error,normalized,max_exponent,top_share,tail_dominated");
    for (const auto& z : rep.partition) {
      csv.field(z.n).field(z.log_z).field(z.std_error).field(z.normalized)
          .field(z.max_exponent_seen).field(z.top_share)
          .field(std::string(z.tail_dominated ? "1" : "0"));
      csv.endrow();
    }
  }
  out.files.push_back("tables/partition.csv");
  {
    Csv csv(dir / "tables/density.csv",
            "n,q10,q25,q50,q75,q90,mean_r,mean_r_se,fraction_above_1");
    for (const auto& d : rep.density) {
      csv.field(d.n);
      for (const auto& [q, v] : d.log_r_quantiles) csv.field(v);
      csv.field(d.mean_r).field(d.mean_r_se).field(d.fraction_above_1);
      csv.endrow();
    }
  }
  out.files.push_back("tables/density.csv");
  {
    Csv csv(dir / "tables/bound.csv",
            "n,samples,frequency,censored,empirical_rate,rate_bound,band,violation");
    for (const auto& row : rep.bound.rows) {
      csv.field(row.n).field(row.sample_count).field(row.frequency)
          .field(std::string(row.censored ? "1" : "0")).field(row.empirical_rate)
          .field(row.rate_bound).field(row.band)
          .field(std::string(row.violation ? "1" : "0"));
      csv.endrow();
    }
  }
  out.files.push_back("tables/bound.csv");

  json v;
  v["preset"] = rep.preset;
  v["d"] = rep.d;
  v["branch"] = rep.classification.branch;
  v["classification_note"] = rep.classification.note;
  v["verdict"] = rep.verdict;
  v["inconclusive"] = rep.inconclusive;
  v["er_within_5se"] = rep.er_within_5se;
  v["tail_dominated_count"] = rep.tail_dominated_count;
  v["bound_violations"] = rep.bound.violations;
  v["trends"] = {
      {"normalized_logz_nondecreasing",
       {{"confidence", rep.logz_trend.confidence}, {"conclusive", rep.logz_trend.conclusive},
        {"points", rep.logz_trend.point_estimates}}},
      {"median_logr_decreasing",
       {{"confidence", rep.logr_trend.confidence}, {"conclusive", rep.logr_trend.conclusive},
        {"points", rep.logr_trend.point_estimates}}},
      {"median_abs_logr_decreasing",
       {{"confidence", rep.abs_logr_trend.confidence},
        {"conclusive", rep.abs_logr_trend.conclusive},
        {"points", rep.abs_logr_trend.point_estimates}}}};
  out.verdict = v;
  out.exit_status = rep.inconclusive ? 5 : 0;
  out.verdict_line = "case " + rep.preset + ": " + rep.verdict +
                     " (theorem branch " + std::to_string(rep.classification.branch) + ")";
  return out;
}

}  // namespace

RunResult run(const RunConfig& config) {
  config.validate();
  fs::path dir(config.out);
  fs::create_directories(dir / "tables");

  RunResult result;
  result.manifest.config_hash = config.config_hash();
  result.manifest.seed = config.seed;
  result.manifest.artifact_version = kArtifactVersion;
  result.manifest.experiment = config.experiment;
  result.manifest.started_at = iso_now();

  write_text(dir / "config.txt", config.serialize());

  ExperimentOutput out;
  if (config.experiment == "covariance") out = run_covariance(config, dir);
  else if (config.experiment == "lln") out = run_lln(config, dir);
  else if (config.experiment == "decorrelation") out = run_decorrelation(config, dir);
  else if (config.experiment == "ldp-synthetic") out = run_ldp_synthetic(config, dir);
  else if (config.experiment == "case-study") out = run_case_study(config, dir);
  else throw input_error("unknown experiment: " + config.experiment);

  out.verdict["experiment"] = config.experiment;
  out.verdict["verdict_line"] = out.verdict_line;
  write_text(dir / "verdict.json", out.verdict.dump(2) + "\n");
  out.files.push_back("verdict.json");
  out.files.push_back("config.txt");

  result.manifest.finished_at = iso_now();
  for (const auto& rel : out.files) {
    ManifestFile mf;
    mf.path = rel;
    fs::path full = dir / rel;
    mf.checksum = fnv1a_file(full.string());
    mf.bytes = static_cast<uint64_t>(fs::file_size(full));
    result.manifest.files.push_back(mf);
  }
  write_text(dir / "manifest.json", result.manifest.to_json());
  result.exit_status = out.exit_status;
  result.verdict_line = out.verdict_line;
  return result;
}

std::string report(const std::string& run_dir) {
  fs::path dir(run_dir);
  RunManifest manifest = RunManifest::from_json_file((dir / "manifest.json").string());
  for (const auto& f : manifest.files) {
    fs::path full = dir / f.path;
    if (!fs::exists(full)) throw integrity_error("missing file: " + f.path);
    uint64_t sum = fnv1a_file(full.string());
    if (sum != f.checksum)
      throw integrity_error("checksum mismatch for " + f.path + ": manifest " +
                            std::to_string(f.checksum) + ", actual " + std::to_string(sum));
  }

  std::ifstream vin(dir / "verdict.json", std::ios::binary);
  json verdict;
  if (vin) vin >> verdict;

  std::ostringstream s;
  s << "run " << manifest.experiment << " (seed " << manifest.seed << ", "
    << manifest.artifact_version << ")\n";
  s << "  files verified: " << manifest.files.size() << "\n";
  if (verdict.contains("verdict_line"))
    s << "  " << verdict["verdict_line"].get<std::string>() << "\n";
  if (verdict.contains("checks"))
    for (const auto& c : verdict["checks"])
      s << "  " << (c["pass"].get<bool>() ? "[ok]  " : "[FAIL] ") << c["name"].get<std::string>()
        << " = " << c["value"].get<double>() << " (target " << c["target"].get<double>()
        << " +- " << c["tolerance"].get<double>() << ")\n";
  if (verdict.contains("trends"))
    for (auto it = verdict["trends"].begin(); it != verdict["trends"].end(); ++it)
      s << "  trend " << it.key() << ": confidence " << it.value()["confidence"].get<double>()
        << (it.value()["conclusive"].get<bool>() ? " [conclusive]" : " [inconclusive]") << "\n";

  // declarative plot specification for external renderers
  json plots = json::array();
  auto has_file = [&](const std::string& p) {
    return std::any_of(manifest.files.begin(), manifest.files.end(),
                       [&](const ManifestFile& f) { return f.path == p; });
  };
  if (has_file("tables/covariance.csv"))
    plots.push_back({{"title", "covariance profile"}, {"data", "tables/covariance.csv"},
                     {"x", "r"}, {"y", json::array({"c"})}, {"series", "n"},
                     {"logy", true}});
  if (has_file("tables/power_integrals.csv"))
    plots.push_back({{"title", "power integrals"}, {"data", "tables/power_integrals.csv"},
                     {"x", "n"}, {"y", json::array({"value"})}, {"series", "p"},
                     {"logx", true}, {"logy", true}});
  if (has_file("tables/lln.csv"))
    plots.push_back({{"title", "aggregate second moments"}, {"data", "tables/lln.csv"},
                     {"x", "n"}, {"y", json::array({"I2", "M2", "D2"})},
                     {"logx", true}, {"logy", true}});
  if (has_file("tables/partition.csv"))
    plots.push_back({{"title", "normalized log partition"},
                     {"data", "tables/partition.csv"}, {"x", "n"},
                     {"y", json::array({"normalized"})}});
  if (has_file("tables/density.csv"))
    plots.push_back({{"title", "log density quantiles"}, {"data", "tables/density.csv"},
                     {"x", "n"}, {"y", json::array({"q10", "q50", "q90"})}});
  if (has_file("tables/cgf.csv"))
    plots.push_back({{"title", "empirical CGF"}, {"data", "tables/cgf.csv"},
                     {"x", "theta"}, {"y", json::array({"lambda"})}});
  if (has_file("tables/rate.csv"))
    plots.push_back({{"title", "rate function"}, {"data", "tables/rate.csv"},
                     {"x", "h"}, {"y", json::array({"rate"})}});
  json ps;
  ps["plots"] = plots;
  write_text(dir / "plotspec.json", ps.dump(2) + "\n");
  s << "  plot specification: plotspec.json (" << plots.size() << " plots)\n";
  return s.str();
}

}  // namespace phi4lab
