#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "phi4lab/errors.hpp"
#include "phi4lab/partition.hpp"

using namespace phi4lab;

namespace {
LabOptions tiny_opts() {
  LabOptions o;
  o.threads = 2;
  return o;
}
}  // namespace

TEST_CASE("default grid selection keeps sweeps resolution-proportional") {
  CHECK(default_grid(2) == 32);
  CHECK(default_grid(4) == 32);
  CHECK(default_grid(6) == 48);
  CHECK(default_grid(8) == 64);
  CHECK(default_grid(12) == 96);
  CHECK(default_grid(16) == 128);
}

TEST_CASE("null schedule gives log Z = 0 exactly and R = 1") {
  LabOptions opts = tiny_opts();
  RenormSchedule null_s = make_preset("null", {2}, [](int) { return 1.0; });
  LogPartitionEstimate z = estimate_log_partition(2, 2, null_s, 200, 7, opts);
  CHECK(z.log_z == 0.0);
  CHECK(z.normalized == 0.0);
  DensityStats ds = density_statistics(2, 2, null_s, 200, 7, opts);
  CHECK(ds.mean_r == 1.0);
  for (auto& [q, v] : ds.log_r_quantiles) CHECK(v == 0.0);
  CHECK(ds.fraction_above_1 == 0.0);
}

TEST_CASE("batch is deterministic and thread-count independent") {
  RenormSchedule s = make_preset("A1-d4", {2}, [](int) { return 1.0; });
  LabOptions one = tiny_opts();
  one.threads = 1;
  LabOptions two = tiny_opts();
  two.threads = 2;
  BatchResult a = run_observable_batch(2, 2, s, 31, 99, one, false);
  BatchResult b = run_observable_batch(2, 2, s, 31, 99, two, false);
  CHECK(a.L == b.L);
  CHECK(a.I == b.I);
  CHECK(a.D == b.D);
}

TEST_CASE("batch pipeline agrees with the FieldSample route bitwise") {
  RenormSchedule s = make_preset("A1-d4", {2}, [](int) { return 1.0; });
  LabOptions opts = tiny_opts();
  BatchResult batch = run_observable_batch(2, 2, s, 5, 1234, opts, false);
  CutoffConfig cfg = make_config(2, 2, opts);
  for (uint64_t id : {0u, 1u, 4u}) {
    FieldSample f = sample_field(cfg, 1234, id);
    CellObservables obs = compute_observables(f, batch.couplings);
    CHECK(obs.L_n == batch.L[id]);
    CHECK(obs.I_n == batch.I[id]);
    CHECK(obs.M_n == batch.M[id]);
    CHECK(obs.D_n == batch.D[id]);
  }
}

// Dense eigendecomposition oracle for a quadratic-only action on a small
// d=2 grid: Z = E exp(t * int_V :psi^2:) has the closed form
// -t - (1/2) sum log(1 - 2 t nu_i), nu = eig(W^{1/2} Sigma W^{1/2}).
TEST_CASE("quadratic action matches the gaussian determinant oracle") {
  const int d = 2, n = 2, m = 16;
  LabOptions opts = tiny_opts();
  opts.grid_override = m;
  CutoffConfig cfg = make_config(d, n, opts);
  const LatticeSpectrum& spec = lattice_spectrum(cfg);

  // composite trapezoid weights over [0,1]^2 on the aligned grid
  int sites = static_cast<int>(1.0 / cfg.spacing()) + 1;  // 9
  double h = cfg.spacing();
  std::vector<double> w1(static_cast<size_t>(sites), h);
  w1.front() = 0.5 * h;
  w1.back() = 0.5 * h;

  // site covariance of the normalized field from the discrete spectrum
  int support = sites * sites;
  Eigen::MatrixXd sigma(support, support);
  double l = cfg.torus_side;
  double dp = 2.0 * M_PI / l;
  std::vector<double> chat(static_cast<size_t>(m * m));
  std::vector<double> px(static_cast<size_t>(m));
  for (int k = 0; k < m; ++k) px[static_cast<size_t>(k)] = dp * (k < m / 2 ? k : k - m);
  for (int k0 = 0; k0 < m; ++k0)
    for (int k1 = 0; k1 < m; ++k1) {
      double p = std::hypot(px[static_cast<size_t>(k0)], px[static_cast<size_t>(k1)]);
      chat[static_cast<size_t>(k0 * m + k1)] =
          cutoff_spectral_density(cfg.mollifier, n, p);
    }
  auto cov = [&](int dx, int dy) {
    double s = 0.0;
    for (int k0 = 0; k0 < m; ++k0)
      for (int k1 = 0; k1 < m; ++k1)
        s += chat[static_cast<size_t>(k0 * m + k1)] *
             std::cos(px[static_cast<size_t>(k0)] * dx * h +
                      px[static_cast<size_t>(k1)] * dy * h);
    return s / (l * l) / spec.c0;
  };
  for (int a = 0; a < support; ++a)
    for (int b = 0; b < support; ++b) {
      int ax = a / sites, ay = a % sites, bx = b / sites, by = b % sites;
      sigma(a, b) = cov(ax - bx, ay - by);
    }
  Eigen::VectorXd wv(support);
  for (int a = 0; a < support; ++a)
    wv(a) = w1[static_cast<size_t>(a / sites)] * w1[static_cast<size_t>(a % sites)];
  Eigen::MatrixXd b = wv.cwiseSqrt().asDiagonal() * sigma * wv.cwiseSqrt().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);

  double t = 0.25 / eig.eigenvalues().maxCoeff();  // safely inside the MGF window
  double log_z_exact = -t * wv.sum();
  for (int i = 0; i < support; ++i)
    log_z_exact -= 0.5 * std::log1p(-2.0 * t * eig.eigenvalues()(i));

  // schedule with only the mass term: action = -m c M_n = -t M_n
  RenormSchedule quad;
  quad.name = "quadratic-only";
  quad.d = d;
  quad.g[n] = 0.0;
  quad.m[n] = t / spec.c0;
  quad.a[n] = 0.0;
  LogPartitionEstimate est = estimate_log_partition(d, n, quad, 4000, 2718, opts);
  CHECK(est.std_error > 0.0);
  CHECK(std::fabs(est.log_z - log_z_exact) < 3.0 * est.std_error);
}

TEST_CASE("lln sweep runs and reports decaying aggregate moments at d=2") {
  LabOptions opts = tiny_opts();
  LlnReport rep = lln_sweep(2, {2, 3, 4}, 150, 4242, opts);
  CHECK(rep.I2.size() == 3);
  for (double v : rep.I2) CHECK(v > 0.0);
  CHECK(rep.moments.sample_count == 150);
  CHECK(rep.moments.pair_corr_I.size() == 3);
  CHECK(rep.moments.pair_corr_I[2] == 1.0);  // (0,0) pair appended last
  // aggregate second moments fall as n grows (LLN direction)
  CHECK(rep.I2.back() < rep.I2.front());
  CHECK(rep.fit_I2.exponent < 0.0);
}

TEST_CASE("case experiment structure on a cheap branch-1 run") {
  LabOptions opts = tiny_opts();
  CaseStudyReport rep = case_experiment("B-d4", 2, {2, 3, 4}, 240, 11, opts);
  CHECK(rep.partition.size() == 3);
  CHECK(rep.density.size() == 3);
  CHECK(rep.classification.branch == 1);
  CHECK(rep.er_within_5se);
  CHECK(rep.bound.rows.size() == 3);
  CHECK(rep.bound.violations == 0);
  for (const auto& z : rep.partition) CHECK(z.sample_count == 240);
  CHECK(rep.verdict.find("branch (1)") != std::string::npos);
}

TEST_CASE("input validation") {
  LabOptions opts = tiny_opts();
  RenormSchedule s = make_preset("A1-d4", {2}, [](int) { return 1.0; });
  CHECK_THROWS_AS(estimate_log_partition(2, 2, s, 100, 1, opts), Error);  // < 200
  CHECK_THROWS_AS(case_experiment("nope", 2, {2, 3, 4}, 240, 1, opts), Error);
  CHECK_THROWS_AS(lln_sweep(2, {2, 3}, 150, 1, opts), Error);  // < 3 cutoffs
}
