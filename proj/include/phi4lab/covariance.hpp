#pragma once

#include <utility>
#include <vector>

#include "phi4lab/mollifier.hpp"

namespace phi4lab {

// Deterministic covariance data for the cutoff field at (n, d): the variance
// c_n(0), the radial profile c_n(r), second derivatives at the origin and the
// gradient variance, all computed by radial quadrature of the momentum
// integral with density |chi_hat(p/n)|^2 / (p^2 + 1).
struct CovarianceProfile {
  int n = 0;
  int d = 0;
  double c0 = 0.0;
  std::vector<std::pair<double, double>> radial_table;  // (r in [0,1], c_n(r))
  std::vector<double> second_derivs_at_zero;            // d entries, all equal
  double grad_variance = 0.0;  // sum_j -d^2 c / dx_j^2 at 0
  double achieved_tol = 0.0;

  void validate() const;
};

CovarianceProfile covariance_profile(int n, int d, int resolution,
                                     const MollifierSpec& spec = {});

// int_V c_n(x)^p dx over V = [0,1]^d, p in {2,3,4}.
double covariance_power_integral(int n, int d, int p,
                                 const MollifierSpec& spec = {});

// Point values backed by a cached radial table (r up to sqrt(d)).
double covariance_at(int n, int d, double r, const MollifierSpec& spec = {});
double covariance_c0(int n, int d, const MollifierSpec& spec = {});
double covariance_grad_variance(int n, int d, const MollifierSpec& spec = {});

}  // namespace phi4lab
