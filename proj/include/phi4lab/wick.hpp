#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "phi4lab/field.hpp"
#include "phi4lab/schedule.hpp"

namespace phi4lab {

// Wick-ordered power :x^p: with respect to variance c (Hermite form):
// p=2 -> x^2 - c, p=3 -> x^3 - 3cx, p=4 -> x^4 - 6cx^2 + 3c^2.
double wick_power(double x, double c, int p);

struct CellRecord {
  double I = 0.0;  // n^d * cell integral of :psi^4:
  double M = 0.0;  // n^d * cell integral of :psi^2:
  double D = 0.0;  // (n^d / d_n) * cell integral of :(grad psi)^2:
  double X = 0.0;  // lambda I - alpha M - beta D
};

struct CellObservables {
  int n = 0;
  int d = 0;
  CouplingSet couplings;
  std::vector<CellRecord> cells;  // n^d entries
  double I_n = 0.0, M_n = 0.0, D_n = 0.0;  // cell sums / n^d
  double L_n = 0.0;                        // (1/n^d) sum X

  void validate() const;
};

// Streaming accumulator over the lattices of one sample: feed the value
// lattice once and each gradient component once, then finish. Both the
// FieldSample route and the batch pipeline go through this single path.
class ObservableAccumulator {
 public:
  ObservableAccumulator(const CutoffConfig& config, uint64_t cell_budget = (1u << 22));

  void add_values(std::span<const double> psi, double site_variance);
  void add_gradient_component(int axis, std::span<const double> dpsi,
                              double component_variance);
  CellObservables finish(const CouplingSet& couplings) const;

 private:
  CutoffConfig config_;
  int cells_per_side_;
  uint64_t cell_count_;
  // per axis, per cell: first touched site and trapezoid weights
  struct AxisCell {
    int first_site = 0;
    std::vector<double> weights;
  };
  std::vector<std::vector<AxisCell>> axis_cells_;  // [axis][cell]
  std::vector<double> cell_i_, cell_m_, cell_e_;
  int gradients_seen_ = 0;
  bool values_seen_ = false;

  void accumulate(std::span<const double> lattice, double subtract,
                  std::vector<double>& out, int power) const;
};

CellObservables compute_observables(const FieldSample& sample,
                                    const CouplingSet& couplings);

struct ArrayMomentReport {
  int n = 0, d = 0;
  size_t sample_count = 0;
  // cell-averaged second moments with batch SEs over samples
  double I2 = 0.0, I2_se = 0.0;
  double M2 = 0.0, M2_se = 0.0;
  double D2 = 0.0, D2_se = 0.0;
  double X2 = 0.0, X2_se = 0.0;
  std::vector<std::pair<uint64_t, uint64_t>> pairs;
  std::vector<double> pair_corr_I;  // correlation over samples per pair
  std::vector<double> pair_corr_X;
  double corr_se = 0.0;  // ~ 1/sqrt(samples)
};

ArrayMomentReport array_moment_report(const std::vector<CellObservables>& per_sample,
                                      const std::vector<std::pair<uint64_t, uint64_t>>& pairs);
ArrayMomentReport array_moment_report(const std::vector<FieldSample>& samples,
                                      const CouplingSet& couplings,
                                      const std::vector<std::pair<uint64_t, uint64_t>>& pairs);

// Cell of maximal separation from cell 0 in the n^d subdivision.
uint64_t farthest_cell(int n, int d);

}  // namespace phi4lab
