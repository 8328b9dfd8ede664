#include "phi4lab/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "phi4lab/errors.hpp"
#include "phi4lab/quadrature.hpp"

namespace phi4lab {

namespace {

// Angular average of exp(i p.x) over the sphere |p| = 1, as a function of
// z = |p||x|. Closed forms per dimension; series near zero.
double angular_factor(int d, double z) {
  if (z < 0.5) {
    double q = z * z / 4.0;
    double dd = 0.5 * d;
    return 1.0 - q / dd + q * q / (2.0 * dd * (dd + 1.0)) -
           q * q * q / (6.0 * dd * (dd + 1.0) * (dd + 2.0)) +
           q * q * q * q / (24.0 * dd * (dd + 1.0) * (dd + 2.0) * (dd + 3.0));
  }
  switch (d) {
    case 2:
      return std::cyl_bessel_j(0.0, z);
    case 3:
      return std::sin(z) / z;
    case 4:
      return 2.0 * std::cyl_bessel_j(1.0, z) / z;
    case 5:
      return 3.0 * (std::sin(z) - z * std::cos(z)) / (z * z * z);
    default:
      throw input_error("angular_factor: d must be 2..5");
  }
}

// Momentum cutoff scale in units of n: beyond u_max the gaussian tail is
// below 1e-16 relative to the bulk for every n and power used here.
double momentum_cutoff(const MollifierSpec& spec, int n) {
  double u = std::sqrt((48.0 + 4.0 * std::log(1.0 + n)) / (2.0 * spec.width * spec.width));
  return u * n;
}

std::vector<double> momentum_edges(const MollifierSpec& spec, int n, double r,
                                   int level) {
  double pmax = momentum_cutoff(spec, n);
  // panel width limited by the oscillation phase (GL-24 resolves ~10 rad)
  // and by the structure scales: the mass knee at p ~ 1 and the gaussian
  // rolloff at p ~ n / width.
  double shrink = std::pow(1.6, level);
  double osc = r > 1e-12 ? 10.0 / (r * shrink) : pmax;
  double roll = std::max(0.5, n / spec.width / (6.0 * shrink));
  std::vector<double> edges{0.0};
  double x = 0.0;
  double w0 = std::min({0.5 / shrink, osc, roll});
  double w = w0;
  while (x + w < pmax) {
    x += w;
    edges.push_back(x);
    w = std::min({w * 1.5, osc, roll});
    if (edges.size() > 200000) throw numeric_error("momentum_edges: panel explosion");
  }
  edges.push_back(pmax);
  return edges;
}

// Dense radial table of c_n, cached per (d, n, width). Covers [0, sqrt(d)]
// plus headroom for torus-lag diagnostics.
class RadialCovariance {
 public:
  RadialCovariance(int n, int d, MollifierSpec spec)
      : n_(n), d_(d), spec_(spec) {
    norm_ = sphere_area(d) / std::pow(2.0 * M_PI, d);
    c0_ = moment_integral(d - 1);
    double second = -norm_ / d_ * raw_moment(d + 1);
    second_deriv_ = second;
    grad_variance_ = -d_ * second;
    build_table();
  }

  double c0() const { return c0_; }
  double second_deriv() const { return second_deriv_; }
  double grad_variance() const { return grad_variance_; }
  double achieved_tol() const { return achieved_tol_; }
  double r_max() const { return r_max_; }
  int n() const { return n_; }
  int d() const { return d_; }

  double at(double r) const {
    if (r < 0.0) r = -r;
    if (r == 0.0) return c0_;
    if (r >= r_max_) return value_at(r, 0);
    if (r <= r_head_) {
      // linear head: c is flat to O((n r)^2) here
      double t = r / r_head_;
      return c0_ * (1.0 - t) + head_val_ * t;
    }
    double x = (std::log(r) - log_r0_) / dlog_;
    size_t i = std::min<size_t>(static_cast<size_t>(std::max(0.0, x)),
                                vals_.size() - 2);
    size_t i0 = i == 0 ? 0 : (i >= vals_.size() - 2 ? vals_.size() - 4 : i - 1);
    double t = x - static_cast<double>(i0);
    double y0 = vals_[i0], y1 = vals_[i0 + 1], y2 = vals_[i0 + 2], y3 = vals_[i0 + 3];
    double a0 = -(t - 1) * (t - 2) * (t - 3) / 6.0;
    double a1 = t * (t - 2) * (t - 3) / 2.0;
    double a2 = -t * (t - 1) * (t - 3) / 2.0;
    double a3 = t * (t - 1) * (t - 2) / 6.0;
    return a0 * y0 + a1 * y1 + a2 * y2 + a3 * y3;
  }

 private:
  // int rho^k * chat(rho) d rho * norm, with doubling convergence.
  double moment_integral(int k) {
    auto eval = [&](int level) { return norm_ * raw_moment_level(k, level); };
    QuadResult q = converge_by_doubling(eval, 1e-10, 7);
    achieved_tol_ = std::max(achieved_tol_, q.achieved_tol);
    return q.value;
  }

  double raw_moment(int k) {
    return converge_by_doubling([&](int level) { return raw_moment_level(k, level); },
                                1e-10, 7)
        .value;
  }

  double raw_moment_level(int k, int level) {
    auto f = [&](double p) {
      return std::pow(p, k) * cutoff_spectral_density(spec_, n_, p);
    };
    std::vector<double> edges = momentum_edges(spec_, n_, 0.0, level);
    return integrate_panels(f, edges, 16 + 4 * level);
  }

  double value_at(double r, int level) const {
    auto f = [&](double p) {
      return std::pow(p, d_ - 1) * cutoff_spectral_density(spec_, n_, p) *
             angular_factor(d_, p * r);
    };
    std::vector<double> edges = momentum_edges(spec_, n_, r, level);
    return norm_ * integrate_panels(f, edges, 24);
  }

  void build_table() {
    r_max_ = std::sqrt(static_cast<double>(d_)) * 1.05;
    r_head_ = 5e-3 * spec_.width / n_;
    const int pts = 1400;
    log_r0_ = std::log(r_head_);
    dlog_ = (std::log(r_max_) - log_r0_) / (pts - 1);
    vals_.resize(pts);
    for (int i = 0; i < pts; ++i)
      vals_[static_cast<size_t>(i)] = value_at(std::exp(log_r0_ + i * dlog_), 0);
    head_val_ = vals_.front();
    // verify the oscillatory quadrature at a spread of radii
    double worst = 0.0;
    for (double r : {r_head_ * 3.0, 0.01, 0.1, 0.5, 1.0, r_max_ * 0.9}) {
      double a = value_at(r, 0), b = value_at(r, 1);
      double scale = std::max({std::fabs(a), std::fabs(b), c0_ * 1e-9});
      worst = std::max(worst, std::fabs(a - b) / scale);
    }
    if (worst > 1e-7)
      throw numeric_error("covariance table quadrature did not converge; achieved tolerance " +
                          std::to_string(worst));
    achieved_tol_ = std::max(achieved_tol_, worst);
  }

  int n_, d_;
  MollifierSpec spec_;
  double norm_ = 0.0, c0_ = 0.0, second_deriv_ = 0.0, grad_variance_ = 0.0;
  double achieved_tol_ = 0.0;
  double r_max_ = 0.0, r_head_ = 0.0, log_r0_ = 0.0, dlog_ = 0.0, head_val_ = 0.0;
  std::vector<double> vals_;
};

std::mutex g_cov_mutex;

const RadialCovariance& radial_covariance(int n, int d, const MollifierSpec& spec) {
  if (n < 1) throw input_error("covariance: cutoff n must be >= 1");
  if (d < 2 || d > 5) throw input_error("covariance: d must be in {2,3,4,5}");
  spec.validate();
  static std::map<std::tuple<int, int, double>, std::unique_ptr<RadialCovariance>> cache;
  std::lock_guard<std::mutex> lock(g_cov_mutex);
  auto key = std::make_tuple(n, d, spec.width);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_unique<RadialCovariance>(n, d, spec)).first;
  return *it->second;
}

}  // namespace

void CovarianceProfile::validate() const {
  if (!(c0 > 0.0)) throw numeric_error("covariance profile: c0 not positive");
  double prev = c0;
  for (const auto& [r, v] : radial_table) {
    if (!std::isfinite(v)) throw numeric_error("covariance profile: non-finite entry");
    if (v > c0 * (1.0 + 1e-12))
      throw numeric_error("covariance profile: c(r) exceeds c(0)");
    if (v > prev * (1.0 + 1e-9))
      throw numeric_error("covariance profile: radial table not non-increasing");
    prev = v;
  }
  double trace = 0.0;
  for (double s : second_derivs_at_zero) trace += s;
  if (std::fabs(grad_variance + trace) > 1e-12 * std::fabs(grad_variance))
    throw numeric_error("covariance profile: gradient variance mismatch");
  if (!(grad_variance > 0.0))
    throw numeric_error("covariance profile: gradient variance not positive");
}

CovarianceProfile covariance_profile(int n, int d, int resolution,
                                     const MollifierSpec& spec) {
  if (resolution < 8 * n)
    throw input_error(
        "covariance_profile: resolution " + std::to_string(resolution) +
        " too coarse to resolve the mollifier scale 1/n; need at least 8*n = " +
        std::to_string(8 * n));
  const RadialCovariance& rc = radial_covariance(n, d, spec);
  CovarianceProfile p;
  p.n = n;
  p.d = d;
  p.c0 = rc.c0();
  p.second_derivs_at_zero.assign(static_cast<size_t>(d), rc.second_deriv());
  p.grad_variance = rc.grad_variance();
  p.achieved_tol = rc.achieved_tol();
  p.radial_table.reserve(static_cast<size_t>(resolution));
  for (int i = 0; i < resolution; ++i) {
    double r = static_cast<double>(i) / (resolution - 1);
    p.radial_table.emplace_back(r, i == 0 ? rc.c0() : rc.at(r));
  }
  p.validate();
  return p;
}

double covariance_power_integral(int n, int d, int p, const MollifierSpec& spec) {
  if (p < 2 || p > 4) throw input_error("covariance_power_integral: p must be in {2,3,4}");
  const RadialCovariance& rc = radial_covariance(n, d, spec);
  auto f = [&](double r) { return std::pow(rc.at(r), p); };
  return integrate_radial_over_cube(d, f, spec.width / n);
}

double covariance_at(int n, int d, double r, const MollifierSpec& spec) {
  return radial_covariance(n, d, spec).at(r);
}

double covariance_c0(int n, int d, const MollifierSpec& spec) {
  return radial_covariance(n, d, spec).c0();
}

double covariance_grad_variance(int n, int d, const MollifierSpec& spec) {
  return radial_covariance(n, d, spec).grad_variance();
}

}  // namespace phi4lab
