#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

namespace phi4lab {

// Empirical cumulant generating function Lambda(theta) = log mean exp(-theta x)
// on a grid of theta in [0, theta_max]. The minus sign matches the tilting
// used for the action arrays: Lambda* below is the rate of lower-tail events
// of the sampled variable.
struct EmpiricalCGF {
  std::vector<double> theta_grid;
  std::vector<double> values;
  std::vector<double> std_errors;
  uint64_t sample_count = 0;

  void validate() const;  // Lambda(0) = 0 exactly; convex along the grid
};

EmpiricalCGF empirical_cgf(std::span<const double> samples, double theta_max,
                           int grid_size);

struct RateFunctionEstimate {
  std::vector<double> h_grid;
  std::vector<double> values;         // Lambda*(h) = sup_theta (theta h - Lambda)
  std::vector<double> argmax_thetas;  // maximizer per h
  std::vector<double> std_errors;     // envelope-propagated from the CGF
  double domain_bound = 0.0;          // largest h with an interior maximizer
  double theta_max = 0.0;

  void validate() const;
  double eval(double h) const;  // linear interpolation on the grid
};

RateFunctionEstimate legendre_transform(const EmpiricalCGF& cgf,
                                        std::span<const double> h_grid);

// sup_{theta in [lo, hi]} (theta h - cgf(theta)) for a closed-form CGF,
// golden-section refined to ~1e-10.
double legendre_transform_exact(const std::function<double(double)>& cgf,
                                double h, double theta_lo, double theta_hi);

struct FiniteDistribution {
  std::vector<double> values;
  std::vector<double> probs;

  void validate() const;
  double mean() const;
  double moment(int p) const;      // E x^p
  double abs_moment(int p) const;  // E |x|^p
  double positive_mean() const;    // E max(x, 0)
  double cgf(double t) const;      // log sum p exp(t x), max-shifted
  double tilted_mean(double t) const;
  double min_value() const;
  double max_value() const;
};

// Kullback-Leibler divergence D(Q||P) on a shared atom list; +infinity when
// Q charges an atom where P vanishes.
double kl_divergence(const FiniteDistribution& q, const FiniteDistribution& p);

struct IProjection {
  FiniteDistribution tilted;
  double theta = 0.0;
  double divergence = 0.0;
};
// Exponential tilt of P with mean h (h strictly inside the open hull of the
// atoms); the divergence equals the Legendre transform of P's CGF at h.
IProjection i_projection(const FiniteDistribution& p, double h);

struct CramerRow {
  int n = 0;
  double tail_prob = 0.0;  // P(S_n / n >= h), exact
  double log_rate = 0.0;   // (1/n) log tail_prob
  double gap = 0.0;        // log_rate + Lambda*(h)
};
struct CramerReport {
  double h = 0.0;
  double rate = 0.0;  // Lambda*(h) from the exact CGF
  std::vector<CramerRow> rows;
  bool gap_decreasing = false;  // |gap| shrinks along n_list
};
// Exact n-fold tail probabilities by dynamic-programming convolution on a
// detected common value lattice (no Monte Carlo).
CramerReport cramer_lower_bound_check(const FiniteDistribution& p, double h,
                                      const std::vector<int>& n_list);

struct DependentBoundRow {
  int n = 0;
  uint64_t sample_count = 0;
  double frequency = 0.0;  // of the deep-action event {L_n <= -set_lo}
  bool censored = false;   // zero hits: bound reported, not a violation
  double empirical_rate = 0.0;  // (1/n^d) log frequency
  double rate_bound = 0.0;      // -inf_{h >= set_lo} Lambda*(h)
  double band = 0.0;            // 3 SE allowance
  bool violation = false;
};
struct DependentBoundReport {
  double set_lo = 0.0;
  int cells_exponent_d = 0;
  std::vector<DependentBoundRow> rows;
  int violations = 0;
};
DependentBoundReport dependent_array_bound_check(
    const std::map<int, std::vector<double>>& samples_by_n,
    const RateFunctionEstimate& rate, double set_lo, int d);

struct PositivePartDiag {
  double mean_pos = 0.0;   // E Y+
  double second = 0.0;     // E Y^2
  double third_abs = 0.0;  // E |Y|^3
  double bound = 0.0;      // (E Y^2)^2 / (2 E|Y|^3)
  bool holds = false;      // mean_pos >= bound
};
PositivePartDiag positive_part_diagnostics(const FiniteDistribution& y);
PositivePartDiag positive_part_diagnostics(std::span<const double> samples);

// The Remark's counterexample law at index n: a heavy negative atom whose
// third moment grows like sqrt(n) while E Y+ = 1/sqrt(n).
FiniteDistribution counterexample_law(int n);

struct MarkovReport {
  int steps = 0;
  int paths = 0;
  double min_value = 0.0;   // min over paths of (1/N) log R_N
  double mean_value = 0.0;  // mean over paths
  double se = 0.0;
  double epsilon = 0.0;  // 3 * sigma_step / sqrt(N)
  double closed_form_gap = 0.0;  // sum pi_i P_ij log(P_ij / pi_j)
  bool pass = false;             // min_value >= -epsilon
};
// Finite-state analogue of the Radon-Nikodym liminf: per sampled stationary
// path, (1/N) log of the chain-vs-product-of-marginals density.
MarkovReport markov_liminf_check(const std::array<std::array<double, 2>, 2>& transition,
                                 int n_steps, int paths, uint64_t seed);

// Piecewise-linear function given by breakpoints; constant beyond the ends.
// Jumps are encoded by repeating an x with two values (lower one first).
struct PiecewiseLinearF {
  std::vector<double> xs;
  std::vector<double> ys;

  void validate() const;
  double eval(double x) const;
};

struct VaradhanRow {
  double n = 0.0;
  double lhs = 0.0;      // (1/N) log integral
  double deficit = 0.0;  // sup - lhs  (>= 0 up to noise at finite N)
  double band = 0.0;
  bool violation = false;  // deficit exceeds the stated band
};
struct VaradhanReport {
  double sup_value = 0.0;
  double arg_h = 0.0;
  std::vector<VaradhanRow> rows;
  int violations = 0;
  bool deficits_decreasing = false;
};
// Lower-bound direction of the Laplace asymptotics: compares (1/N) log of
// given integrals against sup_h (F(h) - I(h)) scanned over knots and h_grid.
VaradhanReport varadhan_lower_check(const std::function<double(double)>& rate,
                                    std::span<const double> h_scan,
                                    const PiecewiseLinearF& f,
                                    const std::map<double, double>& log_integrals,
                                    const std::map<double, double>& bands);

}  // namespace phi4lab
