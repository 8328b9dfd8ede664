#pragma once

#include <span>

namespace phi4lab {

enum class MollifierKind { Gaussian };

// Smooth approximate identity chi used to regularize the field. The cutoff
// kernel is delta_n(x) = n^d chi(n x), normalized so it integrates to 1 in
// every dimension; its transform at momentum p is mollifier_hat(spec, p/n).
struct MollifierSpec {
  MollifierKind kind = MollifierKind::Gaussian;
  double width = 0.25;  // chi_hat(p) = exp(-(width |p|)^2)

  void validate() const;
};

// d-dimensional Fourier transform of chi at momentum p (radial, so only |p|
// matters). Equals 1 at p = 0 and lies in [0,1] for the gaussian kind.
double mollifier_hat(const MollifierSpec& spec, std::span<const double> p);
double mollifier_hat_radial(const MollifierSpec& spec, double p_norm);

// |chi_hat(p/n)|^2 / (p^2 + 1): the momentum density of the cutoff field.
double cutoff_spectral_density(const MollifierSpec& spec, int n, double p_norm);

}  // namespace phi4lab
