#include "phi4lab/partition.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "phi4lab/errors.hpp"

namespace phi4lab {

int default_grid(int n) {
  // smallest admissible side >= 8n among the 3-smooth sizes, so cutoff
  // sweeps keep the resolution ratio M/n constant where possible
  static const int sizes[] = {32, 48, 64, 96, 128, 192, 256, 384, 512};
  for (int m : sizes)
    if (m >= 8 * n) return m;
  throw capacity_error("default_grid: cutoff too large");
}

CutoffConfig make_config(int d, int n, const LabOptions& opts) {
  CutoffConfig cfg;
  cfg.d = d;
  cfg.n = n;
  cfg.grid_points_per_side = opts.grid_override > 0 ? opts.grid_override : default_grid(n);
  cfg.torus_side = opts.torus_side;
  cfg.mollifier = opts.mollifier;
  cfg.normalize = true;
  cfg.memory_budget_bytes = opts.memory_budget_bytes;
  cfg.validate();
  return cfg;
}

double lattice_c0(int d, int n, const LabOptions& opts) {
  return lattice_spectrum(make_config(d, n, opts)).c0;
}

BatchResult run_observable_batch(int d, int n, const RenormSchedule& schedule,
                                 uint64_t sample_count, uint64_t seed,
                                 const LabOptions& opts, bool keep_cells) {
  if (sample_count == 0) throw input_error("batch: sample_count must be positive");
  BatchResult out;
  out.config = make_config(d, n, opts);
  out.couplings = schedule_eval_or_null(schedule, n, lattice_spectrum(out.config).c0);
  out.L.resize(sample_count);
  out.I.resize(sample_count);
  out.M.resize(sample_count);
  out.D.resize(sample_count);
  if (keep_cells) out.cells.resize(sample_count);

  uint64_t pairs = (sample_count + 1) / 2;
  std::atomic<uint64_t> next{0};
  int workers = std::max(1, std::min<int>(opts.threads, static_cast<int>(pairs)));

  auto work = [&]() {
    PairWorkspace ws(out.config);
    for (;;) {
      uint64_t pair = next.fetch_add(1);
      if (pair >= pairs) break;
      ObservableAccumulator acc0(out.config, opts.cell_budget);
      ObservableAccumulator acc1(out.config, opts.cell_budget);
      ObservableAccumulator* accs[2] = {&acc0, &acc1};
      uint64_t ids[2] = {2 * pair, 2 * pair + 1};
      ws.generate(seed, pair, [&](int slot, int axis, std::span<const double> lat) {
        if (ids[slot] >= sample_count) return;
        if (axis < 0)
          accs[slot]->add_values(lat, ws.site_variance());
        else
          accs[slot]->add_gradient_component(axis, lat, ws.grad_variance(axis));
      });
      for (int slot = 0; slot < 2; ++slot) {
        uint64_t id = ids[slot];
        if (id >= sample_count) continue;
        CellObservables obs = accs[slot]->finish(out.couplings);
        out.L[id] = obs.L_n;
        out.I[id] = obs.I_n;
        out.M[id] = obs.M_n;
        out.D[id] = obs.D_n;
        if (keep_cells) out.cells[id] = std::move(obs);
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return out;
}

namespace {

std::vector<double> action_exponents(const BatchResult& batch) {
  std::vector<double> ys(batch.L.size());
  double a = batch.couplings.A_n;
  for (size_t i = 0; i < batch.L.size(); ++i) ys[i] = -a * batch.L[i];
  return ys;
}

}  // namespace

LogPartitionEstimate log_partition_from(const BatchResult& batch,
                                        const std::string& schedule_name) {
  LogPartitionEstimate est;
  est.n = batch.config.n;
  est.schedule = schedule_name;
  est.sample_count = batch.L.size();
  std::vector<double> ys = action_exponents(batch);
  LogMeanExp lme = log_mean_exp(ys);
  est.log_z = lme.value;
  est.std_error = lme.se;
  est.normalized = lme.value / std::pow(static_cast<double>(batch.config.n), batch.config.d);
  est.max_exponent_seen = lme.max_exponent;
  est.top_share = lme.top_share;
  est.tail_dominated = lme.top_share > 0.5;
  return est;
}

DensityStats density_from(const BatchResult& batch, const std::string& schedule_name,
                          const LogPartitionEstimate& z) {
  DensityStats ds;
  ds.n = batch.config.n;
  ds.schedule = schedule_name;
  ds.sample_count = batch.L.size();
  std::vector<double> ys = action_exponents(batch);
  std::vector<double> log_r(ys.size()), r(ys.size());
  size_t above = 0;
  for (size_t i = 0; i < ys.size(); ++i) {
    log_r[i] = ys[i] - z.log_z;
    r[i] = std::exp(log_r[i]);
    if (log_r[i] > 0.0) ++above;
  }
  for (double q : {0.1, 0.25, 0.5, 0.75, 0.9})
    ds.log_r_quantiles.emplace_back(q, quantile(log_r, q));
  MeanSe ms = batch_means(r);
  ds.mean_r = ms.mean;
  ds.mean_r_se = ms.se;
  ds.fraction_above_1 = static_cast<double>(above) / static_cast<double>(r.size());
  return ds;
}

LogPartitionEstimate estimate_log_partition(int d, int n, const RenormSchedule& schedule,
                                            uint64_t sample_count, uint64_t seed,
                                            const LabOptions& opts) {
  if (sample_count < 200)
    throw input_error("estimate_log_partition: need at least 200 samples");
  BatchResult batch = run_observable_batch(d, n, schedule, sample_count, seed, opts, false);
  return log_partition_from(batch, schedule.name);
}

DensityStats density_statistics(int d, int n, const RenormSchedule& schedule,
                                uint64_t sample_count, uint64_t seed,
                                const LabOptions& opts) {
  if (sample_count < 200)
    throw input_error("density_statistics: need at least 200 samples");
  BatchResult batch = run_observable_batch(d, n, schedule, sample_count, seed, opts, false);
  LogPartitionEstimate z = log_partition_from(batch, schedule.name);
  return density_from(batch, schedule.name, z);
}

LlnReport lln_sweep(int d, const std::vector<int>& n_range, uint64_t sample_count,
                    uint64_t seed, const LabOptions& opts) {
  if (n_range.size() < 3) throw input_error("lln_sweep: need >= 3 cutoffs");
  LlnReport rep;
  rep.d = d;
  rep.n_range = n_range;
  RenormSchedule free = make_preset("null", n_range, [](int) { return 1.0; });
  int largest = *std::max_element(n_range.begin(), n_range.end());
  for (int n : n_range) {
    bool keep = true;
    BatchResult batch =
        run_observable_batch(d, n, free, sample_count, seed, opts, keep);
    auto sq = [](const std::vector<double>& xs) {
      std::vector<double> s(xs.size());
      for (size_t i = 0; i < xs.size(); ++i) s[i] = xs[i] * xs[i];
      return s;
    };
    MeanSe mi = batch_means(sq(batch.I));
    MeanSe mm = batch_means(sq(batch.M));
    MeanSe md = batch_means(sq(batch.D));
    rep.I2.push_back(mi.mean); rep.I2_se.push_back(mi.se);
    rep.M2.push_back(mm.mean); rep.M2_se.push_back(mm.se);
    rep.D2.push_back(md.mean); rep.D2_se.push_back(md.se);
    rep.I_samples.push_back(batch.I);
    rep.M_samples.push_back(batch.M);
    rep.D_samples.push_back(batch.D);
    rep.L_samples.push_back(batch.L);
    if (keep) {
      std::vector<std::pair<uint64_t, uint64_t>> pairs = {
          {0, farthest_cell(n, d)}, {0, 1}, {0, 0}};
      rep.per_n_moments.push_back(array_moment_report(batch.cells, pairs));
      if (n == largest) rep.moments = rep.per_n_moments.back();
    }
  }
  std::vector<double> ns(n_range.begin(), n_range.end());
  rep.fit_I2 = scaling_fit(ns, rep.I2);
  rep.fit_M2 = scaling_fit(ns, rep.M2);
  rep.fit_D2 = scaling_fit(ns, rep.D2);
  return rep;
}

CaseStudyReport case_experiment(const std::string& preset, int d,
                                const std::vector<int>& n_range,
                                uint64_t sample_count, uint64_t seed,
                                const LabOptions& opts) {
  if (!is_preset(preset))
    throw input_error("case_experiment: unknown preset '" + preset + "'");
  if (n_range.size() < 3) throw input_error("case_experiment: need >= 3 cutoffs");
  if (sample_count < 200) throw input_error("case_experiment: need >= 200 samples");

  CaseStudyReport rep;
  rep.preset = preset;
  rep.d = d;
  rep.n_range = n_range;
  rep.sample_count = sample_count;

  auto c_of_n = [&](int n) { return lattice_c0(d, n, opts); };
  RenormSchedule schedule = make_preset(preset, n_range, c_of_n);
  rep.classification = classify_case(schedule, d, n_range, c_of_n);

  std::vector<std::vector<double>> exponents;  // per n: y_i = -A_n L_i
  std::vector<double> nd_list;
  std::map<int, std::vector<double>> l_by_n;
  bool er_ok = true;
  int largest = *std::max_element(n_range.begin(), n_range.end());
  RateFunctionEstimate rate_largest;
  double set_lo = 0.0;

  for (int n : n_range) {
    BatchResult batch = run_observable_batch(d, n, schedule, sample_count, seed, opts, true);
    LogPartitionEstimate z = log_partition_from(batch, preset);
    DensityStats ds = density_from(batch, preset, z);
    rep.partition.push_back(z);
    rep.density.push_back(ds);
    if (z.tail_dominated) ++rep.tail_dominated_count;
    er_ok = er_ok && std::fabs(ds.mean_r - 1.0) <= 5.0 * std::max(ds.mean_r_se, 1e-300);
    exponents.push_back(action_exponents(batch));
    nd_list.push_back(std::pow(static_cast<double>(n), d));
    l_by_n[n] = batch.L;

    if (n == largest) {
      // pooled per-cell X samples feed the cell-level CGF and its rate
      std::vector<double> xs;
      xs.reserve(batch.cells.size() * batch.cells.front().cells.size());
      for (const auto& obs : batch.cells)
        for (const auto& c : obs.cells) xs.push_back(c.X);
      double theta_max = opts.theta_max;
      if (theta_max <= 0.0) {
        double ab = std::max({std::fabs(batch.couplings.alpha_n),
                              std::fabs(batch.couplings.beta_n), 1.0});
        theta_max = 1.0 / (4.0 * ab);
      }
      EmpiricalCGF cgf = empirical_cgf(xs, theta_max, opts.cgf_grid);
      double sd_l = std::sqrt(variance(batch.L));
      set_lo = 1.5 * sd_l;
      std::vector<double> h_grid;
      for (int i = 0; i <= 64; ++i) h_grid.push_back(4.0 * set_lo * i / 64.0);
      rate_largest = legendre_transform(cgf, h_grid);
    }
  }

  rep.cell_rate = rate_largest;
  rep.bound = dependent_array_bound_check(l_by_n, rate_largest, set_lo, d);

  GroupStat norm_logz = [&](std::span<const double> ys, size_t k) {
    return log_mean_exp(ys).value / nd_list[k];
  };
  GroupStat med_logr = [](std::span<const double> ys, size_t) {
    double z = log_mean_exp(ys).value;
    std::vector<double> lr(ys.begin(), ys.end());
    for (double& v : lr) v -= z;
    return median(std::move(lr));
  };
  GroupStat med_abs_logr = [](std::span<const double> ys, size_t) {
    double z = log_mean_exp(ys).value;
    std::vector<double> lr(ys.begin(), ys.end());
    for (double& v : lr) v = std::fabs(v - z);
    return median(std::move(lr));
  };
  rep.logz_trend = bootstrap_stat_trend(exponents, norm_logz, false, false, seed ^ 0x5a5a);
  rep.logr_trend = bootstrap_stat_trend(exponents, med_logr, true, true, seed ^ 0xa5a5);
  rep.abs_logr_trend = bootstrap_stat_trend(exponents, med_abs_logr, true, true, seed ^ 0x3c3c);
  rep.er_within_5se = er_ok;

  int branch = rep.classification.branch;
  if (branch == 1) {
    bool ok = rep.abs_logr_trend.conclusive;
    bool positive_logz_ok = true;
    rep.inconclusive = !ok || !er_ok;
    rep.verdict = std::string("branch (1) trend: R->1") +
                  (rep.inconclusive ? " [inconclusive]" : "");
    (void)positive_logz_ok;
  } else if (branch == 2) {
    bool positive = true;
    for (const auto& z : rep.partition) positive = positive && z.normalized > 0.0;
    bool ok = positive && rep.logz_trend.conclusive && rep.logr_trend.conclusive;
    rep.inconclusive = !ok || !er_ok;
    rep.verdict = std::string("branch (2) trend: log Z growth, R->0") +
                  (rep.inconclusive ? " [inconclusive]" : "");
  } else {
    rep.verdict = "theorem dichotomy not applicable: " + rep.classification.note;
    rep.inconclusive = false;
  }
  return rep;
}

}  // namespace phi4lab
