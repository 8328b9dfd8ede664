#include "phi4lab/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "phi4lab/errors.hpp"
#include "phi4lab/rng.hpp"
#include "phi4lab/stats.hpp"

namespace phi4lab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// local 4-point Lagrange interpolation on a uniform grid
double interp_local_cubic(std::span<const double> grid, std::span<const double> vals,
                          double x) {
  size_t n = grid.size();
  if (n < 2) throw input_error("interpolation: grid too small");
  double h = grid[1] - grid[0];
  double pos = (x - grid[0]) / h;
  if (pos <= 0.0) return vals[0];
  if (pos >= static_cast<double>(n - 1)) return vals[n - 1];
  size_t i = static_cast<size_t>(pos);
  size_t i0 = (n < 4) ? 0 : (i == 0 ? 0 : (i >= n - 2 ? n - 4 : i - 1));
  if (n < 4) {
    // linear fallback
    double t = pos - static_cast<double>(i);
    return vals[i] * (1.0 - t) + vals[i + 1] * t;
  }
  double t = pos - static_cast<double>(i0);
  double y0 = vals[i0], y1 = vals[i0 + 1], y2 = vals[i0 + 2], y3 = vals[i0 + 3];
  double c0 = -(t - 1) * (t - 2) * (t - 3) / 6.0;
  double c1 = t * (t - 2) * (t - 3) / 2.0;
  double c2 = -t * (t - 1) * (t - 3) / 2.0;
  double c3 = t * (t - 1) * (t - 2) / 6.0;
  return c0 * y0 + c1 * y1 + c2 * y2 + c3 * y3;
}

double golden_max(const std::function<double(double)>& f, double a, double b,
                  double tol) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

void EmpiricalCGF::validate() const {
  if (theta_grid.size() != values.size() || theta_grid.size() < 3)
    throw input_error("cgf: grid/value size mismatch");
  if (theta_grid.front() != 0.0) throw input_error("cgf: grid must start at 0");
  if (values.front() != 0.0) throw numeric_error("cgf: Lambda(0) must be exactly 0");
  double scale = 1.0;
  for (double v : values) scale = std::max(scale, std::fabs(v));
  for (size_t i = 1; i + 1 < values.size(); ++i) {
    double second = values[i + 1] - 2.0 * values[i] + values[i - 1];
    if (second < -1e-8 * scale)
      throw numeric_error("cgf: convexity violated along the grid");
  }
}

EmpiricalCGF empirical_cgf(std::span<const double> samples, double theta_max,
                           int grid_size) {
  if (samples.size() < 100) throw input_error("empirical_cgf: need >= 100 samples");
  if (!(theta_max > 0.0)) throw input_error("empirical_cgf: theta_max must be positive");
  if (grid_size < 3) throw input_error("empirical_cgf: grid too small");
  EmpiricalCGF cgf;
  cgf.sample_count = samples.size();
  cgf.theta_grid.resize(static_cast<size_t>(grid_size));
  cgf.values.resize(static_cast<size_t>(grid_size));
  cgf.std_errors.resize(static_cast<size_t>(grid_size));
  std::vector<double> ys(samples.size());
  for (int j = 0; j < grid_size; ++j) {
    double theta = theta_max * j / (grid_size - 1);
    cgf.theta_grid[static_cast<size_t>(j)] = theta;
    for (size_t i = 0; i < samples.size(); ++i) ys[i] = -theta * samples[i];
    LogMeanExp lme = log_mean_exp(ys);
    cgf.values[static_cast<size_t>(j)] = j == 0 ? 0.0 : lme.value;
    cgf.std_errors[static_cast<size_t>(j)] = j == 0 ? 0.0 : lme.se;
  }
  cgf.validate();
  return cgf;
}

void RateFunctionEstimate::validate() const {
  if (h_grid.size() != values.size()) throw input_error("rate: size mismatch");
  double prev = -kInf;
  for (size_t i = 0; i < h_grid.size(); ++i) {
    if (h_grid[i] < 0.0) throw input_error("rate: h grid must be >= 0");
    if (values[i] < -1e-12) throw numeric_error("rate: negative value");
    if (i > 0 && h_grid[i] > h_grid[i - 1] && values[i] < prev - 1e-10)
      throw numeric_error("rate: not non-decreasing on h >= 0");
    prev = values[i];
  }
}

double RateFunctionEstimate::eval(double h) const {
  if (h_grid.empty()) throw input_error("rate: empty");
  if (h <= h_grid.front()) return values.front();
  if (h >= h_grid.back()) return values.back();
  auto it = std::upper_bound(h_grid.begin(), h_grid.end(), h);
  size_t i = static_cast<size_t>(it - h_grid.begin()) - 1;
  double t = (h - h_grid[i]) / (h_grid[i + 1] - h_grid[i]);
  return values[i] * (1.0 - t) + values[i + 1] * t;
}

RateFunctionEstimate legendre_transform(const EmpiricalCGF& cgf,
                                        std::span<const double> h_grid) {
  cgf.validate();
  RateFunctionEstimate rate;
  rate.theta_max = cgf.theta_grid.back();
  rate.h_grid.assign(h_grid.begin(), h_grid.end());
  const double theta_hi = cgf.theta_grid.back();
  const double grid_step = cgf.theta_grid[1] - cgf.theta_grid[0];
  rate.domain_bound = 0.0;

  auto lambda_of = [&](double theta) {
    return interp_local_cubic(cgf.theta_grid, cgf.values, theta);
  };

  for (double h : h_grid) {
    auto objective = [&](double theta) { return theta * h - lambda_of(theta); };
    size_t best = 0;
    double best_val = -kInf;
    for (size_t j = 0; j < cgf.theta_grid.size(); ++j) {
      double v = cgf.theta_grid[j] * h - cgf.values[j];
      if (v > best_val) {
        best_val = v;
        best = j;
      }
    }
    double lo = best > 0 ? cgf.theta_grid[best - 1] : 0.0;
    double hi = best + 1 < cgf.theta_grid.size() ? cgf.theta_grid[best + 1] : theta_hi;
    double theta_star = golden_max(objective, lo, hi, 1e-9 * std::max(1.0, theta_hi));
    double val = std::max(objective(theta_star), best_val);
    if (val < 0.0) val = 0.0;  // theta = 0 always yields 0
    rate.values.push_back(val);
    rate.argmax_thetas.push_back(theta_star);
    // envelope: the rate SE is the CGF SE at the maximizer
    rate.std_errors.push_back(
        interp_local_cubic(cgf.theta_grid, cgf.std_errors, theta_star));
    bool interior = theta_star < theta_hi - 2.0 * grid_step * 1e-3 &&
                    best + 1 < cgf.theta_grid.size();
    if (interior && h > rate.domain_bound) rate.domain_bound = h;
  }
  rate.validate();
  return rate;
}

double legendre_transform_exact(const std::function<double(double)>& cgf,
                                double h, double theta_lo, double theta_hi) {
  auto objective = [&](double t) { return t * h - cgf(t); };
  // coarse scan then golden refinement
  const int scan = 512;
  double best_t = theta_lo, best = -kInf;
  for (int i = 0; i <= scan; ++i) {
    double t = theta_lo + (theta_hi - theta_lo) * i / scan;
    double v = objective(t);
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  double step = (theta_hi - theta_lo) / scan;
  double lo = std::max(theta_lo, best_t - step);
  double hi = std::min(theta_hi, best_t + step);
  double t_star = golden_max(objective, lo, hi, 1e-12 * std::max(1.0, theta_hi - theta_lo));
  return std::max(best, objective(t_star));
}

void FiniteDistribution::validate() const {
  if (values.size() != probs.size() || values.empty())
    throw input_error("distribution: atom/probability size mismatch");
  double sum = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] > 0.0)) throw input_error("distribution: probabilities must be positive");
    if (!std::isfinite(values[i])) throw input_error("distribution: non-finite atom");
    sum += probs[i];
  }
  if (std::fabs(sum - 1.0) > 1e-12)
    throw input_error("distribution: probabilities sum to " + std::to_string(sum));
}

double FiniteDistribution::mean() const {
  double s = 0.0;
  for (size_t i = 0; i < values.size(); ++i) s += probs[i] * values[i];
  return s;
}

double FiniteDistribution::moment(int p) const {
  double s = 0.0;
  for (size_t i = 0; i < values.size(); ++i) s += probs[i] * std::pow(values[i], p);
  return s;
}

double FiniteDistribution::abs_moment(int p) const {
  double s = 0.0;
  for (size_t i = 0; i < values.size(); ++i)
    s += probs[i] * std::pow(std::fabs(values[i]), p);
  return s;
}

double FiniteDistribution::positive_mean() const {
  double s = 0.0;
  for (size_t i = 0; i < values.size(); ++i) s += probs[i] * std::max(values[i], 0.0);
  return s;
}

double FiniteDistribution::cgf(double t) const {
  double m = -kInf;
  for (double v : values) m = std::max(m, t * v);
  double s = 0.0;
  for (size_t i = 0; i < values.size(); ++i) s += probs[i] * std::exp(t * values[i] - m);
  return m + std::log(s);
}

double FiniteDistribution::tilted_mean(double t) const {
  double m = -kInf;
  for (double v : values) m = std::max(m, t * v);
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    double w = probs[i] * std::exp(t * values[i] - m);
    num += w * values[i];
    den += w;
  }
  return num / den;
}

double FiniteDistribution::min_value() const {
  return *std::min_element(values.begin(), values.end());
}
double FiniteDistribution::max_value() const {
  return *std::max_element(values.begin(), values.end());
}

double kl_divergence(const FiniteDistribution& q, const FiniteDistribution& p) {
  q.validate();
  p.validate();
  if (q.values.size() != p.values.size())
    throw input_error("kl_divergence: atom lists differ");
  for (size_t i = 0; i < q.values.size(); ++i)
    if (q.values[i] != p.values[i])
      throw input_error("kl_divergence: atom lists differ");
  double s = 0.0;
  for (size_t i = 0; i < q.values.size(); ++i) {
    if (p.probs[i] == 0.0) return kInf;  // Q charges a P-null atom
    s += q.probs[i] * std::log(q.probs[i] / p.probs[i]);
  }
  return s;
}

IProjection i_projection(const FiniteDistribution& p, double h) {
  p.validate();
  if (!(h > p.min_value() && h < p.max_value()))
    throw input_error("i_projection: h must lie strictly inside the open hull");
  // tilted_mean is strictly increasing; bracket then bisect
  double lo = 0.0, hi = 0.0;
  double t = 1.0;
  if (p.tilted_mean(0.0) < h) {
    lo = 0.0;
    while (p.tilted_mean(t) < h) {
      lo = t;
      t *= 2.0;
      if (t > 1e8) throw numeric_error("i_projection: bracket expansion failed");
    }
    hi = t;
  } else {
    hi = 0.0;
    t = -1.0;
    while (p.tilted_mean(t) > h) {
      hi = t;
      t *= 2.0;
      if (t < -1e8) throw numeric_error("i_projection: bracket expansion failed");
    }
    lo = t;
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double v = p.tilted_mean(mid);
    if (std::fabs(v - h) < 1e-10 * std::max(1.0, std::fabs(h)) && hi - lo < 1e-10)
      break;
    if (v < h)
      lo = mid;
    else
      hi = mid;
  }
  IProjection out;
  out.theta = 0.5 * (lo + hi);
  out.tilted.values = p.values;
  out.tilted.probs.resize(p.probs.size());
  double m = -kInf;
  for (double v : p.values) m = std::max(m, out.theta * v);
  double z = 0.0;
  for (size_t i = 0; i < p.values.size(); ++i) {
    out.tilted.probs[i] = p.probs[i] * std::exp(out.theta * p.values[i] - m);
    z += out.tilted.probs[i];
  }
  for (double& q : out.tilted.probs) q /= z;
  out.divergence = out.theta * h - p.cgf(out.theta);
  return out;
}

namespace {

// Detect the smallest q <= 512 putting all atoms on the lattice
// x_min + k/q; exact tail sums need the common lattice.
struct Lattice {
  double origin = 0.0;
  double unit = 0.0;
  std::vector<int> offsets;
};

Lattice detect_lattice(const FiniteDistribution& p) {
  double x0 = p.min_value();
  for (int q = 1; q <= 512; ++q) {
    bool ok = true;
    std::vector<int> offs;
    for (double v : p.values) {
      double k = (v - x0) * q;
      double r = std::round(k);
      if (std::fabs(k - r) > 1e-9 * std::max(1.0, std::fabs(k))) {
        ok = false;
        break;
      }
      offs.push_back(static_cast<int>(r));
    }
    if (ok) return {x0, 1.0 / q, offs};
  }
  throw input_error("cramer_lower_bound_check: atoms do not share a rational lattice");
}

}  // namespace

CramerReport cramer_lower_bound_check(const FiniteDistribution& p, double h,
                                      const std::vector<int>& n_list) {
  p.validate();
  if (p.values.size() < 2 || p.values.size() > 10)
    throw input_error("cramer_lower_bound_check: need 2..10 atoms");
  if (!(h > p.min_value() && h < p.max_value()))
    throw input_error("cramer_lower_bound_check: threshold outside the open hull");
  if (n_list.empty()) throw input_error("cramer_lower_bound_check: empty n list");

  CramerReport rep;
  rep.h = h;
  rep.rate = i_projection(p, h).divergence;

  Lattice lat = detect_lattice(p);
  int max_off = *std::max_element(lat.offsets.begin(), lat.offsets.end());
  int n_max = *std::max_element(n_list.begin(), n_list.end());
  uint64_t table = static_cast<uint64_t>(n_max) * max_off + 1;
  if (table > (uint64_t{1} << 26))
    throw capacity_error("cramer_lower_bound_check: convolution table of " +
                         std::to_string(table) + " entries exceeds budget");

  // iterate the convolution to the largest n, snapshotting requested n's
  std::vector<double> dist{1.0};
  std::map<int, std::vector<double>> snaps;
  std::vector<int> sorted_n = n_list;
  std::sort(sorted_n.begin(), sorted_n.end());
  size_t next = 0;
  for (int step = 1; step <= n_max; ++step) {
    std::vector<double> out(dist.size() + static_cast<size_t>(max_off), 0.0);
    for (size_t i = 0; i < dist.size(); ++i) {
      if (dist[i] == 0.0) continue;
      for (size_t a = 0; a < p.values.size(); ++a)
        out[i + static_cast<size_t>(lat.offsets[a])] += dist[i] * p.probs[a];
    }
    dist.swap(out);
    while (next < sorted_n.size() && sorted_n[next] == step) {
      snaps[step] = dist;
      ++next;
    }
  }

  double prev_abs_gap = kInf;
  rep.gap_decreasing = true;
  for (int n : n_list) {
    const std::vector<double>& dn = snaps.at(n);
    // S_n/n >= h  <=>  lattice index k >= (n h - n x0) / unit
    double kmin_real = (h - lat.origin) * n / lat.unit;
    int64_t kmin = static_cast<int64_t>(std::ceil(kmin_real - 1e-9));
    double tail = 0.0;
    for (size_t k = dn.size(); k-- > 0;) {
      if (static_cast<int64_t>(k) < kmin) break;
      tail += dn[k];
    }
    CramerRow row;
    row.n = n;
    row.tail_prob = tail;
    row.log_rate = tail > 0.0 ? std::log(tail) / n : -kInf;
    row.gap = row.log_rate + rep.rate;
    if (std::fabs(row.gap) > prev_abs_gap + 1e-12) rep.gap_decreasing = false;
    prev_abs_gap = std::fabs(row.gap);
    rep.rows.push_back(row);
  }
  return rep;
}

DependentBoundReport dependent_array_bound_check(
    const std::map<int, std::vector<double>>& samples_by_n,
    const RateFunctionEstimate& rate, double set_lo, int d) {
  if (samples_by_n.empty()) throw input_error("dependent_array_bound_check: no samples");
  rate.validate();
  DependentBoundReport rep;
  rep.set_lo = set_lo;
  rep.cells_exponent_d = d;

  // -inf over h >= set_lo of the rate (non-decreasing => infimum at set_lo)
  double bound = -rate.eval(std::max(set_lo, 0.0));
  double bound_se = 0.0;
  if (!rate.std_errors.empty()) {
    // take the SE at the evaluation point
    double best = rate.std_errors.back();
    for (size_t i = 0; i < rate.h_grid.size(); ++i)
      if (rate.h_grid[i] >= set_lo) {
        best = rate.std_errors[i];
        break;
      }
    bound_se = best;
  }

  for (const auto& [n, ls] : samples_by_n) {
    if (ls.empty()) throw input_error("dependent_array_bound_check: empty sample list");
    double nd = std::pow(static_cast<double>(n), d);
    uint64_t hits = 0;
    for (double l : ls)
      if (-l >= set_lo) ++hits;  // deep-action event L_n <= -set_lo
    DependentBoundRow row;
    row.n = n;
    row.sample_count = ls.size();
    row.frequency = static_cast<double>(hits) / static_cast<double>(ls.size());
    row.rate_bound = bound;
    if (hits == 0) {
      row.censored = true;
      row.empirical_rate = -std::log(static_cast<double>(ls.size())) / nd;
      row.violation = false;
    } else {
      row.empirical_rate = std::log(row.frequency) / nd;
      double freq_se = std::sqrt(row.frequency * (1.0 - row.frequency) /
                                 static_cast<double>(ls.size()));
      // 3 SE plus the finite-N sharpening of the crude exponential bound:
      // exact tails carry a 1/(theta sigma sqrt(2 pi N)) prefactor, so the
      // empirical rate sits below -Lambda* by ~log(N)/2N even when the
      // bound holds.
      double sharpening = (0.5 * std::log(2.0 * M_PI * nd) + 1.0) / nd;
      row.band = 3.0 * (freq_se / std::max(row.frequency, 1e-300) / nd + bound_se) +
                 sharpening;
      row.violation = row.empirical_rate < row.rate_bound - row.band;
    }
    if (row.violation) ++rep.violations;
    rep.rows.push_back(row);
  }
  return rep;
}

namespace {
PositivePartDiag diag_from_moments(double mean, double mean_pos, double second,
                                   double third_abs, double se_mean) {
  if (std::fabs(mean) > std::max(3.0 * se_mean, 1e-12 * std::sqrt(second)))
    throw input_error("positive_part_diagnostics: input not centered");
  PositivePartDiag d;
  d.mean_pos = mean_pos;
  d.second = second;
  d.third_abs = third_abs;
  d.bound = second * second / (2.0 * third_abs);
  d.holds = d.mean_pos >= d.bound - 1e-12;
  return d;
}
}  // namespace

PositivePartDiag positive_part_diagnostics(const FiniteDistribution& y) {
  y.validate();
  return diag_from_moments(y.mean(), y.positive_mean(), y.moment(2),
                           y.abs_moment(3), 0.0);
}

PositivePartDiag positive_part_diagnostics(std::span<const double> samples) {
  if (samples.size() < 2) throw input_error("positive_part_diagnostics: need samples");
  MeanSe ms = mean_se(samples);
  double pos = 0.0, second = 0.0, third = 0.0;
  for (double y : samples) {
    pos += std::max(y, 0.0);
    second += y * y;
    third += std::fabs(y) * y * y;
  }
  double n = static_cast<double>(samples.size());
  return diag_from_moments(ms.mean, pos / n, second / n, third / n, ms.se);
}

FiniteDistribution counterexample_law(int n) {
  if (n < 2) throw input_error("counterexample_law: n must be >= 2");
  FiniteDistribution y;
  double pn = 1.0 - 1.0 / n;
  y.values = {1.0 / ((1.0 - 1.0 / n) * std::sqrt(static_cast<double>(n))),
              -std::sqrt(static_cast<double>(n))};
  y.probs = {pn, 1.0 / n};
  y.validate();
  return y;
}

MarkovReport markov_liminf_check(const std::array<std::array<double, 2>, 2>& transition,
                                 int n_steps, int paths, uint64_t seed) {
  for (int i = 0; i < 2; ++i) {
    double row = transition[i][0] + transition[i][1];
    if (std::fabs(row - 1.0) > 1e-12)
      throw input_error("markov_liminf_check: rows must sum to 1");
    for (int j = 0; j < 2; ++j)
      if (transition[i][j] < 0.0)
        throw input_error("markov_liminf_check: negative transition probability");
  }
  double p01 = transition[0][1], p10 = transition[1][0];
  if (!(p01 > 0.0) || !(p10 > 0.0))
    throw input_error("markov_liminf_check: chain is reducible");
  if (n_steps < 2 || paths < 1) throw input_error("markov_liminf_check: bad sizes");

  double pi0 = p10 / (p01 + p10);
  double pi[2] = {pi0, 1.0 - pi0};

  // per-step increment log(P(s,s') / pi(s')) and its stationary moments
  double inc[2][2];
  double gap = 0.0, var = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      inc[i][j] = transition[i][j] > 0.0 ? std::log(transition[i][j] / pi[j]) : 0.0;
      gap += pi[i] * transition[i][j] * inc[i][j];
    }
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (transition[i][j] > 0.0)
        var += pi[i] * transition[i][j] * (inc[i][j] - gap) * (inc[i][j] - gap);

  MarkovReport rep;
  rep.steps = n_steps;
  rep.paths = paths;
  rep.closed_form_gap = gap;
  rep.epsilon = 3.0 * std::sqrt(var) / std::sqrt(static_cast<double>(n_steps));

  std::vector<double> per_path(static_cast<size_t>(paths));
  for (int p = 0; p < paths; ++p) {
    uint64_t stream = make_stream(StreamTag::MarkovPaths, static_cast<uint64_t>(p));
    int s = uniform01(seed, stream, 0) < pi0 ? 0 : 1;
    double acc = 0.0;
    for (int t = 1; t < n_steps; ++t) {
      double u = uniform01(seed, stream, static_cast<uint64_t>(t));
      int s2 = u < transition[s][0] ? 0 : 1;
      acc += inc[s][s2];
      s = s2;
    }
    per_path[static_cast<size_t>(p)] = acc / n_steps;
  }
  rep.min_value = *std::min_element(per_path.begin(), per_path.end());
  MeanSe ms = mean_se(per_path);
  rep.mean_value = ms.mean;
  rep.se = ms.se;
  rep.pass = rep.min_value >= -rep.epsilon;
  return rep;
}

void PiecewiseLinearF::validate() const {
  if (xs.size() != ys.size() || xs.empty())
    throw input_error("piecewise linear: size mismatch");
  for (size_t i = 1; i < xs.size(); ++i)
    if (xs[i] < xs[i - 1]) throw input_error("piecewise linear: x not sorted");
}

double PiecewiseLinearF::eval(double x) const {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  size_t i = static_cast<size_t>(it - xs.begin()) - 1;
  // at a jump (repeated x) take the later value: steps are closed from the right
  if (xs[i + 1] == xs[i]) return ys[i + 1];
  double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
  return ys[i] * (1.0 - t) + ys[i + 1] * t;
}

VaradhanReport varadhan_lower_check(const std::function<double(double)>& rate,
                                    std::span<const double> h_scan,
                                    const PiecewiseLinearF& f,
                                    const std::map<double, double>& log_integrals,
                                    const std::map<double, double>& bands) {
  f.validate();
  if (log_integrals.empty()) throw input_error("varadhan_lower_check: no integrals");
  VaradhanReport rep;
  rep.sup_value = -kInf;
  auto consider = [&](double h) {
    double v = f.eval(h) - rate(h);
    if (v > rep.sup_value) {
      rep.sup_value = v;
      rep.arg_h = h;
    }
  };
  for (double h : h_scan) consider(h);
  for (double x : f.xs) consider(x);

  double prev = kInf;
  rep.deficits_decreasing = true;
  for (const auto& [n, lhs] : log_integrals) {
    VaradhanRow row;
    row.n = n;
    row.lhs = lhs;
    row.deficit = rep.sup_value - lhs;
    auto bit = bands.find(n);
    row.band = bit == bands.end() ? 0.0 : bit->second;
    row.violation = row.deficit > row.band;
    if (row.violation) ++rep.violations;
    if (row.deficit > prev + 1e-12) rep.deficits_decreasing = false;
    prev = row.deficit;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace phi4lab
