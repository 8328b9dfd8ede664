#include "phi4lab/wick.hpp"

#include <cmath>

#include "phi4lab/errors.hpp"
#include "phi4lab/stats.hpp"

namespace phi4lab {

double wick_power(double x, double c, int p) {
  if (!(c > 0.0)) throw input_error("wick_power: variance must be positive");
  switch (p) {
    case 0:
      return 1.0;
    case 1:
      return x;
    case 2:
      return x * x - c;
    case 3:
      return x * (x * x - 3.0 * c);
    case 4:
      return x * x * (x * x - 6.0 * c) + 3.0 * c * c;
    default:
      throw input_error("wick_power: p must be in {0,1,2,3,4}");
  }
}

void CellObservables::validate() const {
  const CouplingSet& cs = couplings;
  double lhs = L_n;
  double rhs = cs.lambda_n * I_n - cs.alpha_n * M_n - cs.beta_n * D_n;
  double scale = std::fabs(cs.lambda_n * I_n) + std::fabs(cs.alpha_n * M_n) +
                 std::fabs(cs.beta_n * D_n) + 1e-30;
  if (std::fabs(lhs - rhs) > 1e-12 * scale)
    throw numeric_error("cell observables: L_n does not match lambda I - alpha M - beta D");
  double nd = std::pow(static_cast<double>(n), d);
  double si = 0.0, sx = 0.0;
  for (const auto& c : cells) {
    si += c.I;
    sx += c.X;
  }
  if (std::fabs(si / nd - I_n) > 1e-12 * (std::fabs(I_n) + 1e-30))
    throw numeric_error("cell observables: aggregate I_n inconsistent with cell sum");
  if (std::fabs(sx / nd - L_n) > 1e-12 * (std::fabs(L_n) + 1e-30))
    throw numeric_error("cell observables: aggregate L_n inconsistent with cell sum");
}

namespace {

// Trapezoid weights of the piecewise-linear interpolant integrated over
// [a, b] on the grid x_m = m h: cell boundaries need not align with sites.
struct AxisWeights {
  int first_site;
  std::vector<double> w;
};

AxisWeights axis_cell_weights(double a, double b, double h, int m_sites) {
  int lo = static_cast<int>(std::floor(a / h + 1e-12));
  int hi = static_cast<int>(std::ceil(b / h - 1e-12));
  hi = std::min(hi, m_sites - 1);
  AxisWeights aw;
  aw.first_site = lo;
  aw.w.assign(static_cast<size_t>(hi - lo + 1), 0.0);
  for (int seg = lo; seg < hi; ++seg) {
    double x0 = seg * h, x1 = (seg + 1) * h;
    double s0 = std::max(a, x0), s1 = std::min(b, x1);
    if (s1 <= s0) continue;
    // integral of the two linear hat contributions over [s0, s1]
    double u0 = (x1 - s0), u1 = (x1 - s1);
    aw.w[static_cast<size_t>(seg - lo)] += (u0 * u0 - u1 * u1) / (2.0 * h);
    double v0 = (s1 - x0), v1 = (s0 - x0);
    aw.w[static_cast<size_t>(seg - lo + 1)] += (v0 * v0 - v1 * v1) / (2.0 * h);
  }
  return aw;
}

}  // namespace

ObservableAccumulator::ObservableAccumulator(const CutoffConfig& config,
                                             uint64_t cell_budget)
    : config_(config), cells_per_side_(config.n) {
  config_.validate();
  cell_count_ = 1;
  for (int a = 0; a < config_.d; ++a) {
    cell_count_ *= static_cast<uint64_t>(cells_per_side_);
    if (cell_count_ > cell_budget)
      throw capacity_error("observables: n^d = " + std::to_string(cell_count_) +
                           " cells exceeds the cell budget " +
                           std::to_string(cell_budget));
  }
  double h = config_.spacing();
  axis_cells_.resize(static_cast<size_t>(config_.d));
  for (int a = 0; a < config_.d; ++a) {
    auto& cells = axis_cells_[static_cast<size_t>(a)];
    cells.resize(static_cast<size_t>(cells_per_side_));
    for (int i = 0; i < cells_per_side_; ++i) {
      double lo = static_cast<double>(i) / cells_per_side_;
      double hi = static_cast<double>(i + 1) / cells_per_side_;
      AxisWeights aw = axis_cell_weights(lo, hi, h, config_.grid_points_per_side);
      cells[static_cast<size_t>(i)].first_site = aw.first_site;
      cells[static_cast<size_t>(i)].weights = std::move(aw.w);
    }
  }
  cell_i_.assign(cell_count_, 0.0);
  cell_m_.assign(cell_count_, 0.0);
  cell_e_.assign(cell_count_, 0.0);
}

// Accumulates n^d * cell integrals of the Wick transform of `lattice` into
// `out`. power=4 and 2 use the site variance, power=-2 means gradient square
// with its component variance in `subtract`.
void ObservableAccumulator::accumulate(std::span<const double> lattice,
                                       double subtract, std::vector<double>& out,
                                       int power) const {
  int d = config_.d, m = config_.grid_points_per_side;
  uint64_t pts = config_.lattice_points();
  if (lattice.size() != pts) throw input_error("observables: lattice size mismatch");

  std::vector<uint64_t> stride(static_cast<size_t>(d), 1);
  for (int a = d - 2; a >= 0; --a)
    stride[static_cast<size_t>(a)] = stride[static_cast<size_t>(a + 1)] * static_cast<uint64_t>(m);

  double nd = std::pow(static_cast<double>(cells_per_side_), d);
  std::vector<int> cell_idx(static_cast<size_t>(d), 0);
  std::vector<size_t> site_pos(static_cast<size_t>(d), 0);

  for (uint64_t cell = 0; cell < cell_count_; ++cell) {
    uint64_t rest = cell;
    for (int a = d - 1; a >= 0; --a) {
      cell_idx[static_cast<size_t>(a)] = static_cast<int>(rest % static_cast<uint64_t>(cells_per_side_));
      rest /= static_cast<uint64_t>(cells_per_side_);
    }
    // iterate the local site box
    double acc = 0.0;
    std::fill(site_pos.begin(), site_pos.end(), 0);
    for (;;) {
      double wprod = 1.0;
      uint64_t flat = 0;
      for (int a = 0; a < d; ++a) {
        const auto& ac = axis_cells_[static_cast<size_t>(a)][static_cast<size_t>(cell_idx[static_cast<size_t>(a)])];
        size_t k = site_pos[static_cast<size_t>(a)];
        wprod *= ac.weights[k];
        flat += static_cast<uint64_t>(ac.first_site + static_cast<int>(k)) * stride[static_cast<size_t>(a)];
      }
      double x = lattice[flat];
      double v;
      if (power == 4) {
        v = x * x * (x * x - 6.0 * subtract) + 3.0 * subtract * subtract;
      } else if (power == 2) {
        v = x * x - subtract;
      } else {  // gradient square, Wick-subtracted per component
        v = x * x - subtract;
      }
      acc += wprod * v;
      // advance the multi-index
      int a = d - 1;
      for (; a >= 0; --a) {
        const auto& ac = axis_cells_[static_cast<size_t>(a)][static_cast<size_t>(cell_idx[static_cast<size_t>(a)])];
        if (++site_pos[static_cast<size_t>(a)] < ac.weights.size()) break;
        site_pos[static_cast<size_t>(a)] = 0;
      }
      if (a < 0) break;
    }
    out[cell] += nd * acc;
  }
}

void ObservableAccumulator::add_values(std::span<const double> psi,
                                       double site_variance) {
  if (values_seen_) throw input_error("observables: values added twice");
  if (!(site_variance > 0.0)) throw input_error("observables: bad site variance");
  accumulate(psi, site_variance, cell_i_, 4);
  accumulate(psi, site_variance, cell_m_, 2);
  values_seen_ = true;
}

void ObservableAccumulator::add_gradient_component(int axis,
                                                   std::span<const double> dpsi,
                                                   double component_variance) {
  if (axis != gradients_seen_)
    throw input_error("observables: gradient components must arrive in axis order");
  accumulate(dpsi, component_variance, cell_e_, -2);
  ++gradients_seen_;
}

CellObservables ObservableAccumulator::finish(const CouplingSet& couplings) const {
  if (!values_seen_ || gradients_seen_ != config_.d)
    throw input_error("observables: sample lattices incomplete");
  if (couplings.n != config_.n)
    throw input_error("observables: couplings cutoff does not match the sample");
  double d_n = couplings.d_n > 0.0 ? couplings.d_n : static_cast<double>(config_.n);

  CellObservables obs;
  obs.n = config_.n;
  obs.d = config_.d;
  obs.couplings = couplings;
  obs.cells.resize(cell_count_);
  double nd = std::pow(static_cast<double>(config_.n), config_.d);
  double si = 0.0, sm = 0.0, sd = 0.0, sx = 0.0;
  for (uint64_t c = 0; c < cell_count_; ++c) {
    CellRecord& r = obs.cells[c];
    r.I = cell_i_[c];
    r.M = cell_m_[c];
    r.D = cell_e_[c] / d_n;
    r.X = couplings.lambda_n * r.I - couplings.alpha_n * r.M - couplings.beta_n * r.D;
    si += r.I;
    sm += r.M;
    sd += r.D;
    sx += r.X;
  }
  obs.I_n = si / nd;
  obs.M_n = sm / nd;
  obs.D_n = sd / nd;
  obs.L_n = sx / nd;
  obs.validate();
  return obs;
}

CellObservables compute_observables(const FieldSample& sample,
                                    const CouplingSet& couplings) {
  if (!sample.config.normalize)
    throw input_error("compute_observables: sample must be the normalized psi field");
  ObservableAccumulator acc(sample.config);
  acc.add_values(sample.values, sample.site_variance);
  for (int a = 0; a < sample.config.d; ++a)
    acc.add_gradient_component(a, sample.gradient[static_cast<size_t>(a)],
                               sample.grad_variance_per_dir[static_cast<size_t>(a)]);
  return acc.finish(couplings);
}

namespace {
double cell_avg_sq(const CellObservables& o, double CellRecord::*field) {
  double s = 0.0;
  for (const auto& c : o.cells) s += (c.*field) * (c.*field);
  return s / static_cast<double>(o.cells.size());
}
}  // namespace

ArrayMomentReport array_moment_report(const std::vector<CellObservables>& per_sample,
                                      const std::vector<std::pair<uint64_t, uint64_t>>& pairs) {
  if (per_sample.size() < 100)
    throw input_error("array_moment_report: need >= 100 samples");
  const CellObservables& first = per_sample.front();
  ArrayMomentReport rep;
  rep.n = first.n;
  rep.d = first.d;
  rep.sample_count = per_sample.size();
  rep.pairs = pairs;

  std::vector<double> i2, m2, d2, x2;
  for (const auto& o : per_sample) {
    if (o.n != first.n || o.d != first.d)
      throw input_error("array_moment_report: mixed configurations");
    i2.push_back(cell_avg_sq(o, &CellRecord::I));
    m2.push_back(cell_avg_sq(o, &CellRecord::M));
    d2.push_back(cell_avg_sq(o, &CellRecord::D));
    x2.push_back(cell_avg_sq(o, &CellRecord::X));
  }
  MeanSe s;
  s = batch_means(i2); rep.I2 = s.mean; rep.I2_se = s.se;
  s = batch_means(m2); rep.M2 = s.mean; rep.M2_se = s.se;
  s = batch_means(d2); rep.D2 = s.mean; rep.D2_se = s.se;
  s = batch_means(x2); rep.X2 = s.mean; rep.X2_se = s.se;

  for (const auto& [a, b] : pairs) {
    if (a >= first.cells.size() || b >= first.cells.size())
      throw input_error("array_moment_report: pair cell index out of range");
    std::vector<double> ia, ib, xa, xb;
    for (const auto& o : per_sample) {
      ia.push_back(o.cells[a].I);
      ib.push_back(o.cells[b].I);
      xa.push_back(o.cells[a].X);
      xb.push_back(o.cells[b].X);
    }
    rep.pair_corr_I.push_back(a == b ? 1.0 : correlation(ia, ib));
    rep.pair_corr_X.push_back(a == b ? 1.0 : correlation(xa, xb));
  }
  rep.corr_se = 1.0 / std::sqrt(static_cast<double>(per_sample.size()));
  return rep;
}

ArrayMomentReport array_moment_report(const std::vector<FieldSample>& samples,
                                      const CouplingSet& couplings,
                                      const std::vector<std::pair<uint64_t, uint64_t>>& pairs) {
  std::vector<CellObservables> obs;
  obs.reserve(samples.size());
  for (const auto& s : samples) obs.push_back(compute_observables(s, couplings));
  return array_moment_report(obs, pairs);
}

uint64_t farthest_cell(int n, int d) {
  uint64_t idx = 0;
  for (int a = 0; a < d; ++a) idx = idx * static_cast<uint64_t>(n) + static_cast<uint64_t>(n - 1);
  return idx;
}

}  // namespace phi4lab
