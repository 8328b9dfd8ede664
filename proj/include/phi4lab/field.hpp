#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "phi4lab/mollifier.hpp"

namespace phi4lab {

// Periodic grid embedding of V = [0,1]^d into a torus of side L >= 2. The
// padding keeps wrap-around covariance images at lag >= L/2 where the massive
// kernel has decayed; the residual bias is reported, not assumed zero.
struct CutoffConfig {
  int d = 3;
  int n = 8;
  int grid_points_per_side = 64;  // M: power of two with M >= 8n
  double torus_side = 2.0;        // L
  MollifierSpec mollifier;
  bool normalize = true;  // divide by sqrt(c_n) to produce psi_n
  uint64_t memory_budget_bytes = (uint64_t{4} << 30);

  void validate() const;
  uint64_t lattice_points() const;
  double spacing() const { return torus_side / grid_points_per_side; }
  bool same_law(const CutoffConfig& other) const;
};

// Exact lattice moments of the synthesized field (population values, from the
// discrete spectrum): these are the Wick subtraction constants.
struct LatticeSpectrum {
  double c0 = 0.0;                    // site variance of the unnormalized field
  std::vector<double> grad_var;       // per-direction gradient variances (unnormalized)
  double wrap_bias = 0.0;             // covariance at lag L/2 (torus image scale)
};
const LatticeSpectrum& lattice_spectrum(const CutoffConfig& config);

struct FieldSample {
  CutoffConfig config;
  std::vector<double> values;                 // M^d sites, row-major
  std::vector<std::vector<double>> gradient;  // d spectral derivatives
  uint64_t seed = 0;
  uint64_t sample_id = 0;
  double site_variance = 0.0;                 // exact variance of `values`
  std::vector<double> grad_variance_per_dir;  // exact variances of `gradient`
};

// Draw one realization. Deterministic in (config, seed, sample_id); samples
// with distinct ids are independent in law.
FieldSample sample_field(const CutoffConfig& config, uint64_t seed,
                         uint64_t sample_id);

// One complex synthesis yields the independent sample pair (2k, 2k+1) as its
// real and imaginary parts. Batch pipelines reuse this workspace so the
// FieldSample route and the streaming route produce identical lattices.
class PairWorkspace {
 public:
  explicit PairWorkspace(const CutoffConfig& config);
  ~PairWorkspace();
  PairWorkspace(const PairWorkspace&) = delete;
  PairWorkspace& operator=(const PairWorkspace&) = delete;

  // Visits the value lattice (axis = -1) then each gradient component in
  // axis order, once per slot (0 = even sample id, 1 = odd).
  void generate(uint64_t seed, uint64_t pair,
                const std::function<void(int slot, int axis, std::span<const double>)>& visit);

  double site_variance() const;           // of the produced field
  double grad_variance(int axis) const;   // per direction
  const CutoffConfig& config() const { return config_; }

 private:
  struct Impl;
  CutoffConfig config_;
  std::unique_ptr<Impl> impl_;
};

struct CovEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};
// Cross-site product average over the V-interior at the given grid offset,
// batch-means SE over samples. All samples must share one config.
CovEstimate empirical_covariance(const std::vector<FieldSample>& samples,
                                 const std::vector<int>& lag);

// Spectral derivative of an arbitrary real lattice under `config`'s geometry.
std::vector<std::vector<double>> spectral_gradient(const CutoffConfig& config,
                                                   const std::vector<double>& values);

// Round-trip power check: relative gap between the site sum of squares and
// the momentum-space power sum of the same lattice.
double parseval_gap(const CutoffConfig& config, const std::vector<double>& values);

// Binary dump (little-endian, row-major float64) for cross-implementation checks.
void write_field_dump(const FieldSample& sample, const std::string& path);
FieldSample read_field_dump(const std::string& path);

}  // namespace phi4lab
