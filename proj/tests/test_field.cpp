#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "phi4lab/covariance.hpp"
#include "phi4lab/errors.hpp"
#include "phi4lab/field.hpp"
#include "phi4lab/stats.hpp"

using namespace phi4lab;

namespace {
CutoffConfig small_config(int d = 2, int n = 2, int m = 32) {
  CutoffConfig cfg;
  cfg.d = d;
  cfg.n = n;
  cfg.grid_points_per_side = m;
  return cfg;
}
}  // namespace

TEST_CASE("config validation") {
  CutoffConfig cfg = small_config();
  CHECK_NOTHROW(cfg.validate());
  CutoffConfig bad = cfg;
  bad.grid_points_per_side = 40;  // factor 5: not FFT-friendly
  CHECK_THROWS_AS(bad.validate(), Error);
  CutoffConfig ok48 = cfg;
  ok48.n = 2;
  ok48.grid_points_per_side = 48;
  CHECK_NOTHROW(ok48.validate());
  bad = cfg;
  bad.grid_points_per_side = 8;  // < 8n
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.torus_side = 1.5;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.memory_budget_bytes = 1024;
  try {
    bad.validate();
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Capacity);
  }
}

TEST_CASE("sampling is deterministic in (config, seed, sample_id)") {
  CutoffConfig cfg = small_config();
  FieldSample a = sample_field(cfg, 42, 7);
  FieldSample b = sample_field(cfg, 42, 7);
  CHECK(a.values == b.values);
  CHECK(a.gradient == b.gradient);
  FieldSample c = sample_field(cfg, 43, 7);
  CHECK(a.values != c.values);
  FieldSample d = sample_field(cfg, 42, 8);
  CHECK(a.values != d.values);
}

TEST_CASE("pair workspace and sample_field agree bitwise") {
  CutoffConfig cfg = small_config(3, 2, 16);
  FieldSample even = sample_field(cfg, 11, 4);
  FieldSample odd = sample_field(cfg, 11, 5);
  PairWorkspace ws(cfg);
  bool ok = true;
  ws.generate(11, 2, [&](int slot, int axis, std::span<const double> lat) {
    const FieldSample& ref = slot == 0 ? even : odd;
    const std::vector<double>& want = axis < 0 ? ref.values : ref.gradient[static_cast<size_t>(axis)];
    for (size_t i = 0; i < want.size(); ++i)
      if (want[i] != lat[i]) ok = false;
  });
  CHECK(ok);
}

TEST_CASE("site statistics: centered with unit variance") {
  CutoffConfig cfg = small_config(2, 2, 32);
  const int count = 200;
  std::vector<double> site_means, site_vars;
  std::vector<FieldSample> samples;
  for (int s = 0; s < count; ++s) {
    FieldSample f = sample_field(cfg, 1234, static_cast<uint64_t>(s));
    double m = 0.0, v = 0.0;
    for (double x : f.values) m += x;
    m /= static_cast<double>(f.values.size());
    for (double x : f.values) v += x * x;
    v /= static_cast<double>(f.values.size());
    site_means.push_back(m);
    site_vars.push_back(v);
    if (s < 64) samples.push_back(std::move(f));
  }
  MeanSe mm = mean_se(site_means);
  CHECK(std::fabs(mm.mean) < 4.0 * mm.se);
  MeanSe vv = mean_se(site_vars);
  CHECK(std::fabs(vv.mean - 1.0) < 5.0 * vv.se);

  // lag-0 empirical covariance of the normalized field is 1 within 5 SE
  CovEstimate c0 = empirical_covariance(samples, {0, 0});
  CHECK(std::fabs(c0.estimate - 1.0) < 5.0 * c0.std_error);
}

TEST_CASE("empirical covariance matches the quadrature oracle at d=3, n=16, r=0.25") {
  CutoffConfig cfg;
  cfg.d = 3;
  cfg.n = 16;
  cfg.grid_points_per_side = 128;
  const int count = 56;
  std::vector<FieldSample> samples;
  samples.reserve(count);
  for (int s = 0; s < count; ++s)
    samples.push_back(sample_field(cfg, 777, static_cast<uint64_t>(s)));
  // lag r = 0.25 along the first axis: 0.25 / h sites
  int lag_sites = static_cast<int>(0.25 / cfg.spacing());
  CHECK(lag_sites * cfg.spacing() == doctest::Approx(0.25));
  CovEstimate est = empirical_covariance(samples, {lag_sites, 0, 0});
  double oracle = covariance_at(16, 3, 0.25) / covariance_c0(16, 3);
  CHECK(std::fabs(est.estimate - oracle) < 4.0 * est.std_error);

  // a lag beyond the correlation length decorrelates
  int far = cfg.grid_points_per_side / 2;  // lag L/2
  CovEstimate far_est = empirical_covariance(samples, {far, 0, 0});
  CHECK(std::fabs(far_est.estimate) < 4.0 * far_est.std_error + 0.02);
}

TEST_CASE("gradient variance ratio across an n doubling at d=3") {
  CutoffConfig a = small_config(3, 4, 32);
  CutoffConfig b = small_config(3, 8, 64);
  const LatticeSpectrum& sa = lattice_spectrum(a);
  const LatticeSpectrum& sb = lattice_spectrum(b);
  double ra = sa.grad_var[0] / sa.c0;
  double rb = sb.grad_var[0] / sb.c0;
  CHECK(rb / ra > 3.2);
  CHECK(rb / ra < 4.8);

  // per-direction empirical gradient variance agrees with the stored value
  FieldSample f = sample_field(a, 5, 0);
  double v = 0.0;
  for (double g : f.gradient[0]) v += g * g;
  v /= static_cast<double>(f.gradient[0].size());
  CHECK(v == doctest::Approx(f.grad_variance_per_dir[0]).epsilon(0.35));
}

TEST_CASE("independent samples are decorrelated (pair halves included)") {
  CutoffConfig cfg = small_config(2, 2, 32);
  FieldSample s0 = sample_field(cfg, 3, 0);
  FieldSample s1 = sample_field(cfg, 3, 1);  // same complex synthesis
  FieldSample s2 = sample_field(cfg, 3, 2);
  double se = 1.0 / std::sqrt(static_cast<double>(s0.values.size()));
  CHECK(std::fabs(correlation(s0.values, s1.values)) < 5.0 * se);
  CHECK(std::fabs(correlation(s0.values, s2.values)) < 5.0 * se);
}

TEST_CASE("parseval identity holds to 1e-10") {
  CutoffConfig cfg = small_config(3, 2, 16);
  FieldSample f = sample_field(cfg, 9, 0);
  CHECK(parseval_gap(cfg, f.values) < 1e-10);
}

TEST_CASE("spectral gradient of a constant field vanishes") {
  CutoffConfig cfg = small_config(2, 2, 32);
  std::vector<double> flat(cfg.lattice_points(), 3.25);
  auto grads = spectral_gradient(cfg, flat);
  double worst = 0.0;
  for (const auto& g : grads)
    for (double v : g) worst = std::max(worst, std::fabs(v));
  CHECK(worst < 1e-12);
}

TEST_CASE("wrap bias at lag L/2 is reported and subdominant") {
  // at L=2 the massive kernel leaves ~e^{-1} tails: the image sum at lag 1
  // is a reportable but small fraction of c0, shrinking with n
  CutoffConfig cfg = small_config(3, 8, 64);
  const LatticeSpectrum& s = lattice_spectrum(cfg);
  CHECK(s.wrap_bias > 0.0);
  CHECK(std::fabs(s.wrap_bias) < 0.15 * s.c0);
  CutoffConfig big = small_config(3, 16, 128);
  const LatticeSpectrum& sb = lattice_spectrum(big);
  CHECK(std::fabs(sb.wrap_bias) / sb.c0 < std::fabs(s.wrap_bias) / s.c0);
}

TEST_CASE("empirical covariance input validation") {
  CutoffConfig cfg = small_config();
  std::vector<FieldSample> one{sample_field(cfg, 1, 0)};
  CHECK_THROWS_AS(empirical_covariance(one, {0, 0}), Error);
  CutoffConfig other = small_config(2, 2, 64);
  std::vector<FieldSample> mixed{sample_field(cfg, 1, 0), sample_field(other, 1, 0)};
  CHECK_THROWS_AS(empirical_covariance(mixed, {0, 0}), Error);
}

TEST_CASE("binary dump round-trips bitwise") {
  CutoffConfig cfg = small_config(2, 2, 32);
  FieldSample f = sample_field(cfg, 21, 3);
  std::string path = "field_dump_test.bin";
  write_field_dump(f, path);
  FieldSample g = read_field_dump(path);
  CHECK(g.values == f.values);
  CHECK(g.gradient == f.gradient);
  CHECK(g.seed == f.seed);
  CHECK(g.sample_id == f.sample_id);
  CHECK(g.config.n == f.config.n);
  CHECK(g.site_variance == f.site_variance);
  std::remove(path.c_str());
}
