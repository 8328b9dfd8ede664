#pragma once

#include <functional>
#include <span>
#include <vector>

namespace phi4lab {

// Gauss-Legendre nodes/weights on [-1,1], cached per order.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int order);
double integrate_panels(const std::function<double(double)>& f,
                        std::span<const double> edges, int order);

std::vector<double> uniform_edges(double a, double b, int panels);
// Edges from a at widths growing geometrically until b is reached.
std::vector<double> geometric_edges(double a, double b, double first_width,
                                    double ratio);

// Run eval(level) with level = 0,1,2,... until successive values agree to
// rel_tol. Throws numeric_error (carrying the achieved tolerance) on failure.
struct QuadResult {
  double value = 0.0;
  double achieved_tol = 0.0;
  int levels = 0;
};
QuadResult converge_by_doubling(const std::function<double(int)>& eval,
                                double rel_tol, int max_level = 8);

// Surface measure of { x in [0,1]^d : |x| = r }, d in 1..5.
// Equals S_{d-1} r^{d-1} / 2^d for r <= 1 and vanishes at r = sqrt(d).
double corner_sphere_area(int d, double r);

// Integral of the radial function f(|x|) over the unit cube [0,1]^d.
// `peak_scale` grades the quadrature near r = 0 so integrands concentrated
// at scale ~peak_scale are resolved; pass 1.0 for smooth integrands.
double integrate_radial_over_cube(int d, const std::function<double(double)>& f,
                                  double peak_scale);

// Surface area of the unit sphere in R^d.
double sphere_area(int d);

// Integral over [a,b] via the substitution t^2 = r - a (and mirrored at b),
// accurate for integrands with sqrt-type endpoint behavior.
double integrate_sqrt_endpoints(const std::function<double(double)>& f, double a,
                                double b, int order, int panels);

}  // namespace phi4lab
