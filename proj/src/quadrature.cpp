#include "phi4lab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "phi4lab/errors.hpp"

namespace phi4lab {

namespace {

GaussRule compute_gauss(int order) {
  GaussRule r;
  r.nodes.resize(order);
  r.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    // Newton iteration from the Chebyshev-angle initial guess.
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = order * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= order; ++k) {
      double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = order * (x * p1 - p0) / (x * x - 1.0);
    r.nodes[order - 1 - i] = x;
    r.weights[order - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

std::mutex g_gauss_mutex;
std::map<int, GaussRule> g_gauss_cache;

}  // namespace

const GaussRule& gauss_legendre(int order) {
  if (order < 1 || order > 256) throw input_error("gauss_legendre: bad order");
  std::lock_guard<std::mutex> lock(g_gauss_mutex);
  auto it = g_gauss_cache.find(order);
  if (it == g_gauss_cache.end())
    it = g_gauss_cache.emplace(order, compute_gauss(order)).first;
  return it->second;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int order) {
  const GaussRule& g = gauss_legendre(order);
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < order; ++i) s += g.weights[i] * f(c + h * g.nodes[i]);
  return s * h;
}

double integrate_panels(const std::function<double(double)>& f,
                        std::span<const double> edges, int order) {
  double s = 0.0;
  for (size_t i = 0; i + 1 < edges.size(); ++i)
    s += integrate_gl(f, edges[i], edges[i + 1], order);
  return s;
}

std::vector<double> uniform_edges(double a, double b, int panels) {
  std::vector<double> e(panels + 1);
  for (int i = 0; i <= panels; ++i) e[i] = a + (b - a) * i / panels;
  return e;
}

std::vector<double> geometric_edges(double a, double b, double first_width,
                                    double ratio) {
  std::vector<double> e{a};
  double w = first_width;
  while (e.back() + w < b) {
    e.push_back(e.back() + w);
    w *= ratio;
    if (e.size() > 4000) throw numeric_error("geometric_edges: too many panels");
  }
  e.push_back(b);
  return e;
}

QuadResult converge_by_doubling(const std::function<double(int)>& eval,
                                double rel_tol, int max_level) {
  QuadResult q;
  double prev = eval(0);
  double change = 1.0;
  for (int lv = 1; lv <= max_level; ++lv) {
    double cur = eval(lv);
    double scale = std::max({std::fabs(cur), std::fabs(prev), 1e-300});
    change = std::fabs(cur - prev) / scale;
    if (change < rel_tol) {
      q.value = cur;
      q.achieved_tol = change;
      q.levels = lv;
      return q;
    }
    prev = cur;
  }
  throw numeric_error("quadrature did not converge; achieved tolerance " +
                      std::to_string(change) + " vs requested " +
                      std::to_string(rel_tol));
}

double sphere_area(int d) {
  if (d < 1) throw input_error("sphere_area: d must be >= 1");
  return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
}

double integrate_sqrt_endpoints(const std::function<double(double)>& f, double a,
                                double b, int order, int panels) {
  if (b <= a) return 0.0;
  double mid = 0.5 * (a + b);
  auto left = [&](double t) { return f(a + t * t) * 2.0 * t; };
  auto right = [&](double t) { return f(b - t * t) * 2.0 * t; };
  double s = 0.0;
  s += integrate_panels(left, uniform_edges(0.0, std::sqrt(mid - a), panels), order);
  s += integrate_panels(right, uniform_edges(0.0, std::sqrt(b - mid), panels), order);
  return s;
}

namespace {

// A_1 is counting measure on {r} within [0,1].
double corner_area_1(double r) { return (r >= 0.0 && r <= 1.0) ? 1.0 : 0.0; }

double corner_area_2(double r) {
  if (r <= 0.0) return 0.0;
  if (r <= 1.0) return 0.5 * M_PI * r;
  if (r >= std::sqrt(2.0)) return 0.0;
  return r * (0.5 * M_PI - 2.0 * std::acos(1.0 / r));
}

// Slice recursion: A_d(r) = int A_{d-1}(sqrt(r^2-t^2)) * r/sqrt(r^2-t^2) dt
// over t in [sqrt(max(0,r^2-(d-1))), min(1,r)], with panel splits wherever
// the inner radius crosses a segment boundary sqrt(k) of A_{d-1}.
double corner_area_recursive(int d, double r,
                             const std::function<double(double)>& inner,
                             int order) {
  if (r <= 0.0 || r * r >= static_cast<double>(d)) return 0.0;
  double t_lo = r * r > static_cast<double>(d - 1)
                    ? std::sqrt(r * r - static_cast<double>(d - 1))
                    : 0.0;
  double t_hi = std::min(1.0, r);
  if (t_hi <= t_lo) return 0.0;
  std::vector<double> cuts{t_lo};
  for (int k = d - 2; k >= 1; --k) {
    double rr = r * r - static_cast<double>(k);
    if (rr > 0.0) {
      double t = std::sqrt(rr);
      if (t > t_lo + 1e-14 && t < t_hi - 1e-14) cuts.push_back(t);
    }
  }
  cuts.push_back(t_hi);
  std::sort(cuts.begin(), cuts.end());
  auto f = [&](double t) {
    double rho2 = r * r - t * t;
    if (rho2 <= 0.0) return 0.0;
    double rho = std::sqrt(rho2);
    return inner(rho) * r / rho;
  };
  // Each smooth span can carry sqrt-type behavior at its edges (spherical
  // caps opening up); the substitution removes it.
  double s = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i)
    s += integrate_sqrt_endpoints(f, cuts[i], cuts[i + 1], order, 2);
  return s;
}

// Piecewise tables for A_3..A_5, one smooth segment per [sqrt(k), sqrt(k+1)].
class CornerTable {
 public:
  CornerTable(int d, const std::function<double(double)>& inner) : d_(d) {
    const int pts = 600;
    for (int k = 0; k < d; ++k) {
      Segment seg;
      seg.lo = std::sqrt(static_cast<double>(k));
      seg.hi = std::sqrt(static_cast<double>(k + 1));
      seg.vals.resize(pts);
      for (int i = 0; i < pts; ++i) {
        double r = seg.lo + (seg.hi - seg.lo) * i / (pts - 1);
        seg.vals[i] = (k == 0 && d >= 2)
                          ? sphere_area(d) * std::pow(r, d - 1) / std::pow(2.0, d)
                          : corner_area_recursive(d, r, inner, 24);
      }
      segments_.push_back(std::move(seg));
    }
  }

  double eval(double r) const {
    if (r <= 0.0 || r * r >= static_cast<double>(d_)) return 0.0;
    for (const auto& seg : segments_) {
      if (r <= seg.hi + 1e-15 && r >= seg.lo - 1e-15) {
        if (r < seg.lo) return seg.vals.front();
        if (r > seg.hi) continue;
        return interp(seg, r);
      }
    }
    return 0.0;
  }

 private:
  struct Segment {
    double lo = 0.0, hi = 0.0;
    std::vector<double> vals;
  };

  static double interp(const Segment& seg, double r) {
    size_t n = seg.vals.size();
    double x = (r - seg.lo) / (seg.hi - seg.lo) * (n - 1);
    size_t i = std::min<size_t>(static_cast<size_t>(x), n - 2);
    // local 4-point Lagrange, clamped at segment ends
    size_t i0 = i == 0 ? 0 : (i >= n - 2 ? n - 4 : i - 1);
    double t = x - static_cast<double>(i0);
    double y0 = seg.vals[i0], y1 = seg.vals[i0 + 1], y2 = seg.vals[i0 + 2],
           y3 = seg.vals[i0 + 3];
    double c0 = -(t - 1) * (t - 2) * (t - 3) / 6.0;
    double c1 = t * (t - 2) * (t - 3) / 2.0;
    double c2 = -t * (t - 1) * (t - 3) / 2.0;
    double c3 = t * (t - 1) * (t - 2) / 6.0;
    return c0 * y0 + c1 * y1 + c2 * y2 + c3 * y3;
  }

  int d_;
  std::vector<Segment> segments_;
};

std::mutex g_corner_mutex;

const CornerTable& corner_table(int d) {
  static std::map<int, CornerTable> cache;
  std::lock_guard<std::mutex> lock(g_corner_mutex);
  auto it = cache.find(d);
  if (it != cache.end()) return it->second;
  std::function<double(double)> inner;
  if (d == 3) {
    inner = corner_area_2;
  } else {
    const CornerTable& below = [&]() -> const CornerTable& {
      auto jt = cache.find(d - 1);
      if (jt != cache.end()) return jt->second;
      // recursion happens via the unlocked builder below
      throw numeric_error("corner_table: build order violated");
    }();
    inner = [&below](double rho) { return below.eval(rho); };
  }
  // Build lower tables first (d=3 upward) outside of the map lookup above.
  it = cache.emplace(d, CornerTable(d, inner)).first;
  return it->second;
}

}  // namespace

double corner_sphere_area(int d, double r) {
  switch (d) {
    case 1:
      return corner_area_1(r);
    case 2:
      return corner_area_2(r);
    case 3:
    case 4:
    case 5: {
      // ensure build order 3 -> 4 -> 5
      for (int k = 3; k <= d; ++k) corner_table(k);
      return corner_table(d).eval(r);
    }
    default:
      throw input_error("corner_sphere_area: d must be 1..5");
  }
}

double integrate_radial_over_cube(int d, const std::function<double(double)>& f,
                                  double peak_scale) {
  if (d < 1 || d > 5) throw input_error("integrate_radial_over_cube: d must be 1..5");
  if (!(peak_scale > 0.0)) throw input_error("integrate_radial_over_cube: bad peak scale");
  double ball_coeff = sphere_area(d) / std::pow(2.0, d);
  // warm the corner tables (thread safety of first use)
  if (d >= 3) corner_sphere_area(d, 1.2);

  auto eval = [&](int level) {
    int order = 12 + 4 * level;
    // inside the unit ball the orthant sphere is complete
    double first = std::min(0.25, peak_scale / 8.0) / (1 << level);
    std::vector<double> edges = geometric_edges(0.0, 1.0, first, 1.35);
    auto g = [&](double r) { return f(r) * ball_coeff * std::pow(r, d - 1); };
    double inner = integrate_panels(g, edges, order);
    double outer = 0.0;
    if (d >= 2) {
      auto h = [&](double r) { return f(r) * corner_sphere_area(d, r); };
      for (int k = 1; k < d; ++k) {
        double a = std::sqrt(static_cast<double>(k));
        double b = std::sqrt(static_cast<double>(k + 1));
        outer += integrate_sqrt_endpoints(h, a, b, order, 2 + 2 * level);
      }
    }
    return inner + outer;
  };
  return converge_by_doubling(eval, 1e-9, 6).value;
}

}  // namespace phi4lab
