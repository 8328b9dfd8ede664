#include "phi4lab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "phi4lab/errors.hpp"
#include "phi4lab/rng.hpp"

namespace phi4lab {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw input_error("mean: empty input");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) throw input_error("variance: need at least 2 values");
  double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

MeanSe mean_se(std::span<const double> xs) {
  MeanSe r;
  r.mean = mean(xs);
  r.se = xs.size() > 1
             ? std::sqrt(variance(xs) / static_cast<double>(xs.size()))
             : 0.0;
  return r;
}

MeanSe batch_means(std::span<const double> xs, int batches) {
  if (xs.empty()) throw input_error("batch_means: empty input");
  int b = std::min<int>(batches, static_cast<int>(xs.size()));
  if (b < 2) return {mean(xs), 0.0};
  std::vector<double> bm(b, 0.0);
  std::vector<int> cnt(b, 0);
  for (size_t i = 0; i < xs.size(); ++i) {
    int k = static_cast<int>(i * static_cast<size_t>(b) / xs.size());
    bm[static_cast<size_t>(k)] += xs[i];
    cnt[static_cast<size_t>(k)]++;
  }
  for (int k = 0; k < b; ++k) bm[static_cast<size_t>(k)] /= cnt[static_cast<size_t>(k)];
  MeanSe r;
  r.mean = mean(xs);
  r.se = std::sqrt(variance(bm) / b);
  return r;
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw input_error("quantile: empty input");
  if (q < 0.0 || q > 1.0) throw input_error("quantile: q outside [0,1]");
  std::sort(xs.begin(), xs.end());
  double pos = q * static_cast<double>(xs.size() - 1);
  size_t lo = static_cast<size_t>(pos);
  size_t hi = std::min(lo + 1, xs.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

LogMeanExp log_mean_exp(std::span<const double> ys, int batches) {
  if (ys.empty()) throw input_error("log_mean_exp: empty input");
  double m = -std::numeric_limits<double>::infinity();
  for (double y : ys)
    if (y > m) m = y;
  LogMeanExp r;
  r.max_exponent = m;
  std::vector<double> ex(ys.size());
  double sum = 0.0, top = 0.0;
  for (size_t i = 0; i < ys.size(); ++i) {
    ex[i] = std::exp(ys[i] - m);
    sum += ex[i];
    top = std::max(top, ex[i]);
  }
  double n = static_cast<double>(ys.size());
  r.value = m + std::log(sum / n);
  r.top_share = top / sum;
  if (ys.size() > 3) {
    MeanSe bm = batch_means(ex, batches);
    r.se = bm.mean > 0.0 ? bm.se / bm.mean : 0.0;
  }
  return r;
}

LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw input_error("fit_line: need >= 2 matched points");
  double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double det = n * sxx - sx * sx;
  if (det == 0.0) throw input_error("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / n;
  for (size_t i = 0; i < xs.size(); ++i)
    f.max_residual = std::max(f.max_residual,
                              std::fabs(ys[i] - f.intercept - f.slope * xs[i]));
  return f;
}

ScalingFit scaling_fit(std::span<const double> ns, std::span<const double> values) {
  if (ns.size() != values.size()) throw input_error("scaling_fit: size mismatch");
  if (ns.size() < 3) throw input_error("scaling_fit: need >= 3 points");
  std::vector<double> lx, ly;
  for (size_t i = 0; i < ns.size(); ++i) {
    if (!(values[i] > 0.0)) throw input_error("scaling_fit: non-positive value");
    if (i > 0 && !(ns[i] > ns[i - 1]))
      throw input_error("scaling_fit: n must be strictly increasing");
    lx.push_back(std::log(ns[i]));
    ly.push_back(std::log(values[i]));
  }
  LineFit f = fit_line(lx, ly);
  ScalingFit s;
  s.exponent = f.slope;
  s.log_prefactor = f.intercept;
  s.residual = f.max_residual;
  s.n_range.assign(ns.begin(), ns.end());
  if (!std::isfinite(s.exponent)) throw numeric_error("scaling_fit: exponent not finite");
  return s;
}

double log_ratio_drift(std::span<const double> ns, std::span<const double> values) {
  if (ns.size() != values.size() || ns.size() < 2)
    throw input_error("log_ratio_drift: need >= 2 matched points");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  for (size_t i = 0; i < ns.size(); ++i) {
    if (!(ns[i] > 1.0)) throw input_error("log_ratio_drift: n must exceed 1");
    double r = values[i] / std::log(ns[i]);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    sum += r;
  }
  double m = sum / static_cast<double>(ns.size());
  if (m == 0.0) throw numeric_error("log_ratio_drift: zero mean ratio");
  return (hi - lo) / std::fabs(m);
}

namespace {

// One deterministic bootstrap resample of `src`, ordered by draw.
std::vector<double> resample(const std::vector<double>& src, uint64_t seed,
                             uint64_t stream, uint64_t base_counter) {
  std::vector<double> out(src.size());
  for (size_t i = 0; i < src.size(); ++i) {
    uint64_t j = uniform_below(seed, stream, base_counter + i, src.size());
    out[i] = src[j];
  }
  return out;
}

TrendCheck run_bootstrap(const std::vector<std::vector<double>>& groups,
                         const GroupStat& stat, bool decreasing, bool strict,
                         uint64_t seed, int resamples, double level) {
  if (groups.size() < 2) throw input_error("trend check: need >= 2 groups");
  TrendCheck tc;
  for (size_t k = 0; k < groups.size(); ++k) {
    if (groups[k].empty()) throw input_error("trend check: empty group");
    tc.point_estimates.push_back(stat(groups[k], k));
  }
  int hits = 0;
  for (int r = 0; r < resamples; ++r) {
    bool ok = true;
    double prev = 0.0;
    for (size_t k = 0; k < groups.size() && ok; ++k) {
      uint64_t stream = make_stream(StreamTag::Bootstrap, (static_cast<uint64_t>(r) << 8) | k);
      std::vector<double> rs = resample(groups[k], seed, stream, 0);
      double v = stat(rs, k);
      if (k > 0) {
        if (decreasing) {
          ok = strict ? (v < prev) : (v <= prev);
        } else {
          ok = strict ? (v > prev) : (v >= prev);
        }
      }
      prev = v;
    }
    if (ok) ++hits;
  }
  tc.confidence = static_cast<double>(hits) / resamples;
  tc.conclusive = tc.confidence >= level;
  return tc;
}

}  // namespace

TrendCheck bootstrap_median_trend(const std::vector<std::vector<double>>& groups,
                                  bool decreasing, uint64_t seed, int resamples,
                                  double level) {
  GroupStat stat = [](std::span<const double> xs, size_t) {
    return median(std::vector<double>(xs.begin(), xs.end()));
  };
  return run_bootstrap(groups, stat, decreasing, true, seed, resamples, level);
}

TrendCheck bootstrap_stat_trend(const std::vector<std::vector<double>>& groups,
                                const GroupStat& stat, bool decreasing, bool strict,
                                uint64_t seed, int resamples, double level) {
  return run_bootstrap(groups, stat, decreasing, strict, seed, resamples, level);
}

double correlation(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw input_error("correlation: need >= 2 matched points");
  double mx = mean(xs), my = mean(ys);
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace phi4lab
