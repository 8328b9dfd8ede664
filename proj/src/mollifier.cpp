#include "phi4lab/mollifier.hpp"

#include <cmath>

#include "phi4lab/errors.hpp"

namespace phi4lab {

void MollifierSpec::validate() const {
  if (kind != MollifierKind::Gaussian)
    throw input_error("mollifier: unsupported kind");
  if (!(width > 0.0) || !std::isfinite(width))
    throw input_error("mollifier: width must be positive and finite");
}

double mollifier_hat_radial(const MollifierSpec& spec, double p_norm) {
  spec.validate();
  if (!std::isfinite(p_norm)) throw input_error("mollifier_hat: non-finite momentum");
  double wp = spec.width * p_norm;
  return std::exp(-wp * wp);
}

double mollifier_hat(const MollifierSpec& spec, std::span<const double> p) {
  double s = 0.0;
  for (double c : p) {
    if (!std::isfinite(c)) throw input_error("mollifier_hat: non-finite momentum");
    s += c * c;
  }
  return mollifier_hat_radial(spec, std::sqrt(s));
}

double cutoff_spectral_density(const MollifierSpec& spec, int n, double p_norm) {
  if (n < 1) throw input_error("cutoff_spectral_density: n must be >= 1");
  double h = mollifier_hat_radial(spec, p_norm / n);
  return h * h / (p_norm * p_norm + 1.0);
}

}  // namespace phi4lab
