#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace phi4lab {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // unbiased
MeanSe mean_se(std::span<const double> xs);

// Standard error from batch means in the given (deterministic) order.
MeanSe batch_means(std::span<const double> xs, int batches = 20);

// q-th sample quantile (linear interpolation between order statistics).
double quantile(std::vector<double> xs, double q);
double median(std::vector<double> xs);

// log( (1/N) sum exp(y_i) ) with max-shift stabilization.
struct LogMeanExp {
  double value = 0.0;
  double se = 0.0;            // delta-method SE from batch means on exp scale
  double max_exponent = 0.0;  // largest shifted y_i seen
  double top_share = 0.0;     // mass fraction of the single largest term
};
LogMeanExp log_mean_exp(std::span<const double> ys, int batches = 20);

// Least-squares line y = a + b x.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double max_residual = 0.0;
};
LineFit fit_line(std::span<const double> xs, std::span<const double> ys);

// Power-law fit in (log n, log value) coordinates.
struct ScalingFit {
  double exponent = 0.0;
  double log_prefactor = 0.0;
  double residual = 0.0;  // max abs deviation in log-log coordinates
  std::vector<double> n_range;
};
ScalingFit scaling_fit(std::span<const double> ns, std::span<const double> values);

// Relative spread (max-min)/mean of values[i]/log(ns[i]); used for the
// "grows like K log n" table entries where a power-law fit is meaningless.
double log_ratio_drift(std::span<const double> ns, std::span<const double> values);

// Bootstrap confidence that the per-group medians are strictly monotone.
// groups[k] holds the raw per-sample values for the k-th point of the trend.
// `decreasing` selects the direction. Resampling is deterministic in seed.
struct TrendCheck {
  double confidence = 0.0;
  bool conclusive = false;  // confidence >= level
  std::vector<double> point_estimates;
};
TrendCheck bootstrap_median_trend(const std::vector<std::vector<double>>& groups,
                                  bool decreasing, uint64_t seed,
                                  int resamples = 2000, double level = 0.90);

// Same gate for a statistic other than the median: `stat` maps one resampled
// group (with its group index) to its point value, e.g. normalized
// log-partition where the divisor depends on the group's cutoff.
using GroupStat = std::function<double(std::span<const double>, size_t)>;
TrendCheck bootstrap_stat_trend(const std::vector<std::vector<double>>& groups,
                                const GroupStat& stat, bool decreasing, bool strict,
                                uint64_t seed, int resamples = 2000,
                                double level = 0.90);

// Pearson correlation.
double correlation(std::span<const double> xs, std::span<const double> ys);

}  // namespace phi4lab
