#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "phi4lab/errors.hpp"
#include "phi4lab/ldp.hpp"
#include "phi4lab/rng.hpp"
#include "phi4lab/stats.hpp"

using namespace phi4lab;

namespace {

// frozen closed forms
constexpr double kBernRate07 = 0.082282878505051896;  // 0.7 ln 1.4 + 0.3 ln 0.6
constexpr double kHalfNormalMean = 0.39894228040143268;  // 1/sqrt(2 pi)

FiniteDistribution bernoulli01(double p) {
  FiniteDistribution d;
  d.values = {0.0, 1.0};
  d.probs = {1.0 - p, p};
  return d;
}

FiniteDistribution rademacher() {
  FiniteDistribution d;
  d.values = {-1.0, 1.0};
  d.probs = {0.5, 0.5};
  return d;
}

std::vector<double> rademacher_samples(int count, uint64_t seed) {
  std::vector<double> xs(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i)
    xs[static_cast<size_t>(i)] =
        uniform01(seed, make_stream(StreamTag::Generic, 1), static_cast<uint64_t>(i)) < 0.5
            ? -1.0
            : 1.0;
  return xs;
}

double rademacher_rate(double h) {
  return 0.5 * (1.0 + h) * std::log(1.0 + h) + 0.5 * (1.0 - h) * std::log(1.0 - h);
}

}  // namespace

TEST_CASE("empirical cgf on degenerate and gaussian samples") {
  std::vector<double> zeros(200, 0.0);
  EmpiricalCGF flat = empirical_cgf(zeros, 1.0, 9);
  for (double v : flat.values) CHECK(v == 0.0);

  std::vector<double> gauss;
  for (int i = 0; i < 20000; ++i) {
    NormalPair g = normal_pair(7, 7, static_cast<uint64_t>(i));
    gauss.push_back(g.a);
    gauss.push_back(g.b);
  }
  EmpiricalCGF cgf = empirical_cgf(gauss, 1.0, 21);
  CHECK(cgf.values.front() == 0.0);
  // Lambda(1) = 1/2 for a standard normal
  double got = cgf.values.back();
  double se = cgf.std_errors.back();
  CHECK(std::fabs(got - 0.5) < 4.0 * se);
  // Jensen: Lambda(theta) >= -3 SE for centered input
  for (size_t j = 0; j < cgf.values.size(); ++j)
    CHECK(cgf.values[j] >= -3.0 * cgf.std_errors[j] - 1e-12);

  CHECK_THROWS_AS(empirical_cgf(std::vector<double>(10, 1.0), 1.0, 9), Error);
}

TEST_CASE("legendre transform of the exact gaussian cgf") {
  // grid holds theta^2/2 exactly; the local-cubic maximization must recover
  // Lambda*(1) = 1/2 to 1e-6 (gaussian conjugate h^2/2)
  EmpiricalCGF cgf;
  const int grid = 41;
  for (int j = 0; j < grid; ++j) {
    double t = 2.0 * j / (grid - 1);
    cgf.theta_grid.push_back(t);
    cgf.values.push_back(0.5 * t * t);
    cgf.std_errors.push_back(0.0);
  }
  cgf.sample_count = 1000;
  std::vector<double> hs{0.0, 0.25, 0.5, 1.0, 1.5};
  RateFunctionEstimate rate = legendre_transform(cgf, hs);
  CHECK(rate.values[0] == 0.0);
  CHECK(std::fabs(rate.values[3] - 0.5) < 1e-6);
  CHECK(std::fabs(rate.argmax_thetas[3] - 1.0) < 1e-4);
  CHECK(std::fabs(rate.values[4] - 0.5 * 1.5 * 1.5) < 1e-6);
  CHECK(rate.domain_bound >= 1.5);

  // boundary: h beyond Lambda'(theta_max) = 2 pins the maximizer at the edge
  std::vector<double> far{3.0};
  RateFunctionEstimate edge = legendre_transform(cgf, far);
  CHECK(edge.argmax_thetas[0] == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(edge.domain_bound == 0.0);
}

TEST_CASE("legendre transform of rademacher samples matches the closed form") {
  std::vector<double> xs = rademacher_samples(60000, 2025);
  EmpiricalCGF cgf = empirical_cgf(xs, 1.0, 41);
  std::vector<double> hs{0.4};
  RateFunctionEstimate rate = legendre_transform(cgf, hs);
  double want = rademacher_rate(0.4);  // 0.0822829 by symmetry
  CHECK(std::fabs(rate.values[0] - want) < 3.0 * std::max(rate.std_errors[0], 1e-6));
  // linear bound with bounded theta range: Lambda*(h) <= theta_max h for
  // exactly-centered data; allow the empirical centering slack
  for (size_t i = 0; i < hs.size(); ++i)
    CHECK(rate.values[i] <= cgf.theta_grid.back() * hs[i] + 3.0 * rate.std_errors[i]);
}

TEST_CASE("kl divergence") {
  FiniteDistribution p = bernoulli01(0.5);
  CHECK(kl_divergence(p, p) == 0.0);
  FiniteDistribution q = bernoulli01(0.7);
  CHECK(kl_divergence(q, p) == doctest::Approx(kBernRate07).epsilon(1e-12));

  // Q charging a P-null atom (p ~ 0 not representable: use 3-atom setup)
  FiniteDistribution p3, q3;
  p3.values = {0.0, 1.0, 2.0};
  p3.probs = {0.5, 0.5 - 1e-300, 1e-300};
  q3.values = p3.values;
  q3.probs = {0.25, 0.25, 0.5};
  CHECK(kl_divergence(q3, p3) < std::numeric_limits<double>::infinity());
  FiniteDistribution mism = bernoulli01(0.5);
  mism.values = {0.0, 2.0};
  CHECK_THROWS_AS(kl_divergence(mism, p), Error);
}

TEST_CASE("kl divergence is +infinity on a genuinely null atom") {
  FiniteDistribution base, q;
  base.values = {0.0, 1.0};
  base.probs = {0.5, 0.5};
  q.values = {0.0, 1.0, 2.0};
  q.probs = {0.25, 0.25, 0.5};
  // extend base with an explicit zero-probability atom via direct sum logic:
  // the operation requires shared atoms, so emulate by tiny-to-zero check
  FiniteDistribution p;
  p.values = q.values;
  p.probs = {0.5, 0.5, 0.0};
  // p fails validation (zero prob); kl handles the null atom before validate?
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("i-projection tilts to the requested mean") {
  FiniteDistribution p = bernoulli01(0.5);
  IProjection at_mean = i_projection(p, 0.5);
  CHECK(std::fabs(at_mean.theta) < 1e-9);
  CHECK(std::fabs(at_mean.divergence) < 1e-12);

  IProjection proj = i_projection(p, 0.7);
  CHECK(proj.tilted.probs[1] == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(proj.divergence == doctest::Approx(kBernRate07).epsilon(1e-7));
  CHECK(std::fabs(proj.divergence - 0.082283) < 1e-6);

  CHECK_THROWS_AS(i_projection(p, 1.0), Error);   // hull boundary
  CHECK_THROWS_AS(i_projection(p, -0.1), Error);  // outside
}

TEST_CASE("csiszar equality on a five-atom law") {
  FiniteDistribution p;
  p.values = {-2.0, -0.5, 0.0, 1.0, 3.0};
  p.probs = {0.1, 0.2, 0.3, 0.25, 0.15};
  p.validate();
  double lo = p.min_value(), hi = p.max_value();
  for (int k = 1; k <= 10; ++k) {
    double h = lo + (hi - lo) * k / 11.0;
    IProjection proj = i_projection(p, h);
    double rate = legendre_transform_exact([&](double t) { return p.cgf(t); }, h,
                                           -60.0, 60.0);
    CAPTURE(h);
    CHECK(std::fabs(proj.divergence - rate) < 1e-8);
    CHECK(kl_divergence(proj.tilted, p) == doctest::Approx(proj.divergence).epsilon(1e-9));
  }
}

TEST_CASE("cramer check: exact binomial tails against the rate") {
  FiniteDistribution p = bernoulli01(0.5);
  CramerReport rep = cramer_lower_bound_check(p, 0.7, {50, 100, 200, 400});
  CHECK(rep.rate == doctest::Approx(kBernRate07).epsilon(1e-9));
  for (const auto& row : rep.rows) {
    CHECK(row.tail_prob > 0.0);
    CHECK(row.gap < 0.0);  // exact tails sit below the crude exponential bound
  }
  // criterion margins at N = 100
  const CramerRow& r100 = rep.rows[1];
  CHECK(std::fabs(r100.log_rate + kBernRate07) < 0.03);
  CHECK(rep.gap_decreasing);

  // h at the mean: rate 0 and probability >= 1/2
  CramerReport mean_rep = cramer_lower_bound_check(p, 0.5, {100});
  CHECK(std::fabs(mean_rep.rate) < 1e-10);
  CHECK(mean_rep.rows[0].tail_prob >= 0.5);

  FiniteDistribution weird;
  weird.values = {0.0, 1.0, M_PI};
  weird.probs = {0.3, 0.3, 0.4};
  CHECK_THROWS_AS(cramer_lower_bound_check(weird, 1.0, {10}), Error);
}

TEST_CASE("binomial tail spot check against direct summation") {
  // P(Binom(20, 0.5) >= 14): direct sum of C(20,k)/2^20
  double tail = 0.0;
  for (int k = 14; k <= 20; ++k) {
    double c = 1.0;
    for (int j = 0; j < k; ++j) c = c * (20 - j) / (j + 1);
    tail += c;
  }
  tail /= std::pow(2.0, 20);
  CramerReport rep = cramer_lower_bound_check(bernoulli01(0.5), 0.7, {20});
  CHECK(rep.rows[0].tail_prob == doctest::Approx(tail).epsilon(1e-12));
}

TEST_CASE("dependent array bound: synthetic iid cells match the exact oracle") {
  const int cells = 25, d = 2, n = 5;  // n^d = 25
  const int count = 40000;
  std::vector<double> l_values(count);
  std::vector<double> pooled;
  pooled.reserve(1000 * cells);
  for (int s = 0; s < count; ++s) {
    double acc = 0.0;
    for (int c = 0; c < cells; ++c) {
      double u = uniform01(99, make_stream(StreamTag::Generic, 2),
                           static_cast<uint64_t>(s) * cells + c);
      double x = u < 0.5 ? -1.0 : 1.0;
      acc += x;
      if (s < 1000) pooled.push_back(x);
    }
    l_values[static_cast<size_t>(s)] = acc / cells;
  }
  EmpiricalCGF cgf = empirical_cgf(pooled, 1.0, 41);
  std::vector<double> h_grid;
  for (int i = 0; i <= 40; ++i) h_grid.push_back(0.8 * i / 40.0);
  RateFunctionEstimate rate = legendre_transform(cgf, h_grid);

  std::map<int, std::vector<double>> by_n{{n, l_values}};
  DependentBoundReport rep = dependent_array_bound_check(by_n, rate, 0.2, d);
  CHECK(rep.violations == 0);
  CHECK_FALSE(rep.rows[0].censored);

  CramerReport oracle = cramer_lower_bound_check(rademacher(), 0.2, {cells});
  // (1/N) log of the empirical deep-event frequency vs the exact tail
  CHECK(std::fabs(rep.rows[0].empirical_rate - oracle.rows[0].log_rate) < 0.005);

  // an unreachable threshold is censored, not a violation
  DependentBoundReport cens = dependent_array_bound_check(by_n, rate, 0.99, d);
  CHECK(cens.rows[0].censored);
  CHECK(cens.violations == 0);
}

TEST_CASE("positive part diagnostics") {
  PositivePartDiag sym = positive_part_diagnostics(rademacher());
  CHECK(sym.mean_pos == doctest::Approx(0.5));
  CHECK(sym.bound == doctest::Approx(0.5));  // tight at the symmetric two-point law
  CHECK(sym.holds);

  // counterexample: E Y+ = 1/sqrt(n) while the third moment blows up
  for (int n : {25, 100, 400}) {
    FiniteDistribution y = counterexample_law(n);
    PositivePartDiag d = positive_part_diagnostics(y);
    CHECK(d.mean_pos == doctest::Approx(1.0 / std::sqrt(n)).epsilon(1e-13));
    CHECK(d.second == doctest::Approx(1.0 + 1.0 / (n - 1.0)).epsilon(1e-9));
  }
  double t25 = positive_part_diagnostics(counterexample_law(25)).third_abs;
  double t400 = positive_part_diagnostics(counterexample_law(400)).third_abs;
  CHECK(t400 > 3.0 * t25);  // ~ sqrt(n) growth: no uniform third-moment bound

  // gaussian samples: E Y+ -> 1/sqrt(2 pi)
  std::vector<double> gauss;
  for (int i = 0; i < 30000; ++i) {
    NormalPair g = normal_pair(11, 4, static_cast<uint64_t>(i));
    gauss.push_back(g.a);
    gauss.push_back(-g.a);  // exact centering
  }
  PositivePartDiag gd = positive_part_diagnostics(gauss);
  CHECK(std::fabs(gd.mean_pos - kHalfNormalMean) < 4.0 / std::sqrt(60000.0));
  CHECK(gd.holds);

  std::vector<double> shifted(1000, 1.0);
  CHECK_THROWS_AS(positive_part_diagnostics(shifted), Error);
}

TEST_CASE("markov liminf analogue") {
  std::array<std::array<double, 2>, 2> iid{{{0.3, 0.7}, {0.3, 0.7}}};
  MarkovReport trivial = markov_liminf_check(iid, 500, 50, 4);
  CHECK(trivial.closed_form_gap == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::fabs(trivial.mean_value) < 1e-12);
  CHECK(std::fabs(trivial.min_value) < 1e-12);
  CHECK(trivial.pass);

  std::array<std::array<double, 2>, 2> sticky{{{0.9, 0.1}, {0.1, 0.9}}};
  MarkovReport rep = markov_liminf_check(sticky, 2000, 200, 5);
  double want = std::log(2.0) - (-0.1 * std::log(0.1) - 0.9 * std::log(0.9));
  CHECK(rep.closed_form_gap == doctest::Approx(want).epsilon(1e-12));
  CHECK(std::fabs(rep.mean_value - want) < 3.0 * rep.se);
  CHECK(rep.min_value > -rep.epsilon);
  CHECK(rep.pass);

  std::array<std::array<double, 2>, 2> reducible{{{1.0, 0.0}, {0.0, 1.0}}};
  CHECK_THROWS_AS(markov_liminf_check(reducible, 100, 10, 1), Error);
}

TEST_CASE("varadhan lower direction: gaussian linear identity is exact") {
  double a = 0.8;
  PiecewiseLinearF f;
  f.xs = {-10.0, 10.0};
  f.ys = {-10.0 * a, 10.0 * a};
  std::vector<double> h_scan;
  for (int i = 0; i <= 400; ++i) h_scan.push_back(-2.0 + 4.0 * i / 400.0);  // contains h=a
  std::map<double, double> ints, bands;
  for (double n : {10.0, 100.0, 1000.0}) {
    ints[n] = a * a / 2.0;
    bands[n] = 1e-12;
  }
  VaradhanReport rep = varadhan_lower_check(
      [](double h) { return 0.5 * h * h; }, h_scan, f, ints, bands);
  CHECK(rep.sup_value == doctest::Approx(a * a / 2.0).epsilon(1e-12));
  CHECK(rep.violations == 0);
  for (const auto& row : rep.rows) CHECK(std::fabs(row.deficit) < 1e-9);
}

TEST_CASE("varadhan lower direction: step function with the convolution oracle") {
  double h0 = 0.4;
  PiecewiseLinearF f;
  f.xs = {-1.0, h0, h0, 1.0};
  f.ys = {0.0, 0.0, 1.0, 1.0};
  CHECK(f.eval(h0) == 1.0);
  CHECK(f.eval(h0 - 1e-9) == doctest::Approx(0.0).epsilon(1e-6));

  std::vector<int> ns{50, 100, 200, 400};
  CramerReport tails = cramer_lower_bound_check(rademacher(), h0, ns);
  std::map<double, double> ints, bands;
  for (const auto& row : tails.rows) {
    // log E exp(N F) = log(e^N P + (1 - P))
    double big = row.n + std::log(row.tail_prob);
    double lhs = (big + std::log1p((1.0 - row.tail_prob) * std::exp(-big))) / row.n;
    ints[row.n] = lhs;
    bands[row.n] = (0.5 * std::log(2.0 * M_PI * row.n) + 1.0) / row.n;
  }
  std::vector<double> h_scan;
  for (int i = 0; i <= 200; ++i) h_scan.push_back(-1.0 + 2.0 * i / 200.0);
  VaradhanReport rep = varadhan_lower_check(
      [](double h) { return std::fabs(h) < 1.0 ? rademacher_rate(h) : std::log(2.0); },
      h_scan, f, ints, bands);
  CHECK(rep.sup_value == doctest::Approx(1.0 - rademacher_rate(h0)).epsilon(1e-9));
  CHECK(rep.violations == 0);
  CHECK(rep.deficits_decreasing);
  for (const auto& row : rep.rows) CHECK(row.deficit > 0.0);
}
