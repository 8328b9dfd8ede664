#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phi4lab/field.hpp"
#include "phi4lab/ldp.hpp"
#include "phi4lab/schedule.hpp"
#include "phi4lab/stats.hpp"
#include "phi4lab/wick.hpp"

namespace phi4lab {

struct LabOptions {
  int threads = 2;
  int grid_override = 0;  // 0 = smallest admissible power of two
  double torus_side = 2.0;
  MollifierSpec mollifier;
  uint64_t memory_budget_bytes = (uint64_t{4} << 30);
  uint64_t cell_budget = (uint64_t{1} << 22);
  int cgf_grid = 49;
  double theta_max = 0.0;  // 0 = the boundedness window 1/(4 max(alpha,beta,1))
};

int default_grid(int n);
CutoffConfig make_config(int d, int n, const LabOptions& opts);
// Site variance of the unnormalized sampled field; the covariance scale the
// lab feeds into schedule evaluation so the pipeline is self-consistent.
double lattice_c0(int d, int n, const LabOptions& opts);

// Per-sample observable aggregates for `sample_count` fields, generated in
// parallel but reduced in sample order (results independent of thread count).
struct BatchResult {
  CutoffConfig config;
  CouplingSet couplings;
  std::vector<double> L;  // per-sample L_n
  std::vector<double> I, M, D;
  std::vector<CellObservables> cells;  // populated when keep_cells
};
BatchResult run_observable_batch(int d, int n, const RenormSchedule& schedule,
                                 uint64_t sample_count, uint64_t seed,
                                 const LabOptions& opts, bool keep_cells);

struct LogPartitionEstimate {
  int n = 0;
  std::string schedule;
  double log_z = 0.0;
  double std_error = 0.0;
  double normalized = 0.0;  // log_z / n^d
  uint64_t sample_count = 0;
  double max_exponent_seen = 0.0;
  double top_share = 0.0;      // largest single term's share of the sum
  bool tail_dominated = false; // top_share > 1/2
};

struct DensityStats {
  int n = 0;
  std::string schedule;
  std::vector<std::pair<double, double>> log_r_quantiles;  // (q, value)
  double mean_r = 0.0;
  double mean_r_se = 0.0;
  double fraction_above_1 = 0.0;
  uint64_t sample_count = 0;
};

LogPartitionEstimate estimate_log_partition(int d, int n, const RenormSchedule& schedule,
                                            uint64_t sample_count, uint64_t seed,
                                            const LabOptions& opts = {});
DensityStats density_statistics(int d, int n, const RenormSchedule& schedule,
                                uint64_t sample_count, uint64_t seed,
                                const LabOptions& opts = {});

// Same quantities from an existing batch (shared pipeline inside case runs).
LogPartitionEstimate log_partition_from(const BatchResult& batch,
                                        const std::string& schedule_name);
DensityStats density_from(const BatchResult& batch, const std::string& schedule_name,
                          const LogPartitionEstimate& z);

struct LlnReport {
  int d = 0;
  std::vector<int> n_range;
  std::vector<double> I2, M2, D2;           // mean squares of the aggregates
  std::vector<double> I2_se, M2_se, D2_se;
  ScalingFit fit_I2, fit_M2, fit_D2;
  ArrayMomentReport moments;  // at the largest n, pairs (0, farthest), (0, 1)
  std::vector<ArrayMomentReport> per_n_moments;  // cell-level, every n
  // per-n raw aggregates in sample order, for the CSV interface
  std::vector<std::vector<double>> I_samples, M_samples, D_samples, L_samples;
};
LlnReport lln_sweep(int d, const std::vector<int>& n_range, uint64_t sample_count,
                    uint64_t seed, const LabOptions& opts = {});

struct CaseStudyReport {
  std::string preset;
  int d = 0;
  std::vector<int> n_range;
  uint64_t sample_count = 0;
  CaseReport classification;
  std::vector<LogPartitionEstimate> partition;
  std::vector<DensityStats> density;
  RateFunctionEstimate cell_rate;  // from the pooled cell array at the largest n
  DependentBoundReport bound;
  TrendCheck logz_trend;      // normalized log Z non-decreasing
  TrendCheck logr_trend;      // median log R decreasing
  TrendCheck abs_logr_trend;  // median |log R| decreasing
  bool er_within_5se = false;
  int tail_dominated_count = 0;
  std::string verdict;
  bool inconclusive = false;
};
CaseStudyReport case_experiment(const std::string& preset, int d,
                                const std::vector<int>& n_range,
                                uint64_t sample_count, uint64_t seed,
                                const LabOptions& opts = {});

}  // namespace phi4lab
