#include "phi4lab/field.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "phi4lab/errors.hpp"
#include "phi4lab/rng.hpp"

namespace phi4lab {

namespace {

// FFT-efficient grid sides: multiples of 4 with prime factors 2 and 3 only,
// so cutoff sweeps can keep M proportional to n (e.g. 32, 48, 64, 96, 128).
bool is_fft_friendly(int m) {
  if (m < 16 || m % 4 != 0) return false;
  while (m % 2 == 0) m /= 2;
  while (m % 3 == 0) m /= 3;
  return m == 1;
}

struct PlanDeleter {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex, PlanDeleter>;

FftwBuffer alloc_complex(uint64_t count) {
  fftw_complex* p = fftw_alloc_complex(count);
  if (!p) throw capacity_error("fftw allocation failed");
  return FftwBuffer(p);
}

std::mutex g_fftw_mutex;

fftw_plan make_plan(int d, int m, fftw_complex* buf, int sign) {
  std::lock_guard<std::mutex> lock(g_fftw_mutex);
  std::vector<int> dims(static_cast<size_t>(d), m);
  // FFTW_ESTIMATE keeps plan selection deterministic across runs.
  return fftw_plan_dft(d, dims.data(), buf, buf, sign, FFTW_ESTIMATE);
}

void destroy_plan(fftw_plan p) {
  std::lock_guard<std::mutex> lock(g_fftw_mutex);
  fftw_destroy_plan(p);
}

// signed mode index in [-M/2, M/2)
inline int signed_mode(int k, int m) { return k < m / 2 ? k : k - m; }

struct SpectrumKey {
  int d, n, m;
  double l, width;
  bool operator<(const SpectrumKey& o) const {
    return std::tie(d, n, m, l, width) < std::tie(o.d, o.n, o.m, o.l, o.width);
  }
};

}  // namespace

void CutoffConfig::validate() const {
  if (d < 2 || d > 5) throw input_error("config: d must be in {2,3,4,5}");
  if (n < 1) throw input_error("config: n must be >= 1");
  if (!is_fft_friendly(grid_points_per_side))
    throw input_error(
        "config: grid_points_per_side must be a multiple of 4 with prime "
        "factors 2 and 3 only");
  if (grid_points_per_side < 8 * n)
    throw input_error("config: grid_points_per_side must be >= 8*n to resolve the mollifier");
  if (!(torus_side >= 2.0))
    throw input_error("config: torus_side must be >= 2 so V fits with padding");
  mollifier.validate();
  uint64_t pts = lattice_points();
  // spectrum buffer + scratch + values + d gradients, all double-width
  uint64_t bytes = pts * (16 + 16 + 8 * (1 + static_cast<uint64_t>(d)));
  if (bytes > memory_budget_bytes)
    throw capacity_error("config: lattice of " + std::to_string(pts) +
                         " points needs " + std::to_string(bytes) +
                         " bytes, over the budget of " +
                         std::to_string(memory_budget_bytes));
}

uint64_t CutoffConfig::lattice_points() const {
  uint64_t pts = 1;
  for (int i = 0; i < d; ++i) pts *= static_cast<uint64_t>(grid_points_per_side);
  return pts;
}

bool CutoffConfig::same_law(const CutoffConfig& other) const {
  return d == other.d && n == other.n &&
         grid_points_per_side == other.grid_points_per_side &&
         torus_side == other.torus_side && normalize == other.normalize &&
         mollifier.width == other.mollifier.width &&
         mollifier.kind == other.mollifier.kind;
}

const LatticeSpectrum& lattice_spectrum(const CutoffConfig& config) {
  config.validate();
  static std::map<SpectrumKey, std::unique_ptr<LatticeSpectrum>> cache;
  static std::mutex mutex;
  SpectrumKey key{config.d, config.n, config.grid_points_per_side,
                  config.torus_side, config.mollifier.width};
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;

  auto spec = std::make_unique<LatticeSpectrum>();
  int m = config.grid_points_per_side, d = config.d;
  double l = config.torus_side;
  double dp = 2.0 * M_PI / l;
  uint64_t pts = config.lattice_points();
  double ld = std::pow(l, d);
  spec->grad_var.assign(static_cast<size_t>(d), 0.0);
  double c0 = 0.0, wrap = 0.0;
  std::vector<int> idx(static_cast<size_t>(d), 0);
  for (uint64_t flat = 0; flat < pts; ++flat) {
    uint64_t rest = flat;
    double p2 = 0.0;
    for (int a = d - 1; a >= 0; --a) {
      idx[static_cast<size_t>(a)] = static_cast<int>(rest % m);
      rest /= m;
    }
    double p0 = 0.0;
    for (int a = 0; a < d; ++a) {
      double pa = dp * signed_mode(idx[static_cast<size_t>(a)], m);
      if (a == 0) p0 = pa;
      p2 += pa * pa;
    }
    double chat = cutoff_spectral_density(config.mollifier, config.n, std::sqrt(p2));
    c0 += chat;
    wrap += chat * std::cos(p0 * l / 2.0);
    for (int a = 0; a < d; ++a) {
      double pa = dp * signed_mode(idx[static_cast<size_t>(a)], m);
      spec->grad_var[static_cast<size_t>(a)] += pa * pa * chat;
    }
  }
  spec->c0 = c0 / ld;
  spec->wrap_bias = wrap / ld;
  for (double& v : spec->grad_var) v /= ld;
  it = cache.emplace(key, std::move(spec)).first;
  return *it->second;
}

namespace {

// Fill the spectral noise A_k = sigma_k * xi_k for one sample pair. The pair
// (2*pair, 2*pair+1) shares one complex synthesis; its real and imaginary
// parts are independent fields with the target covariance.
void fill_noise(const CutoffConfig& cfg, uint64_t seed, uint64_t pair,
                fftw_complex* out) {
  int m = cfg.grid_points_per_side, d = cfg.d;
  double dp = 2.0 * M_PI / cfg.torus_side;
  double ld = std::pow(cfg.torus_side, d);
  uint64_t pts = cfg.lattice_points();
  uint64_t stream = make_stream(StreamTag::FieldModes, pair);
  for (uint64_t flat = 0; flat < pts; ++flat) {
    double p2 = 0.0;
    uint64_t rest = flat;
    for (int a = d - 1; a >= 0; --a) {
      int k = static_cast<int>(rest % static_cast<uint64_t>(m));
      rest /= static_cast<uint64_t>(m);
      double pa = dp * signed_mode(k, m);
      p2 += pa * pa;
    }
    double chat = cutoff_spectral_density(cfg.mollifier, cfg.n, std::sqrt(p2));
    double sigma = std::sqrt(ld * chat);
    NormalPair g = normal_pair(seed, stream, flat);
    out[flat][0] = sigma * g.a;
    out[flat][1] = sigma * g.b;
  }
}

// Multiply the spectrum by the derivative symbol i*p_axis.
void apply_gradient_symbol(const CutoffConfig& cfg, const fftw_complex* in,
                           int axis, fftw_complex* out) {
  int m = cfg.grid_points_per_side, d = cfg.d;
  double dp = 2.0 * M_PI / cfg.torus_side;
  uint64_t pts = cfg.lattice_points();
  uint64_t stride = 1;
  for (int a = d - 1; a > axis; --a) stride *= static_cast<uint64_t>(m);
  for (uint64_t flat = 0; flat < pts; ++flat) {
    int k = static_cast<int>((flat / stride) % static_cast<uint64_t>(m));
    double pa = dp * signed_mode(k, m);
    out[flat][0] = -pa * in[flat][1];
    out[flat][1] = pa * in[flat][0];
  }
}

}  // namespace

struct PairWorkspace::Impl {
  FftwBuffer noise;
  FftwBuffer work;
  std::vector<double> re, im;
  fftw_plan plan = nullptr;
  const LatticeSpectrum* spectrum = nullptr;

  ~Impl() {
    if (plan) destroy_plan(plan);
  }
};

PairWorkspace::PairWorkspace(const CutoffConfig& config)
    : config_(config), impl_(std::make_unique<Impl>()) {
  config_.validate();
  impl_->spectrum = &lattice_spectrum(config_);
  uint64_t pts = config_.lattice_points();
  impl_->noise = alloc_complex(pts);
  impl_->work = alloc_complex(pts);
  impl_->re.resize(pts);
  impl_->im.resize(pts);
  impl_->plan = make_plan(config_.d, config_.grid_points_per_side,
                          impl_->work.get(), FFTW_BACKWARD);
}

PairWorkspace::~PairWorkspace() = default;

double PairWorkspace::site_variance() const {
  return config_.normalize ? 1.0 : impl_->spectrum->c0;
}

double PairWorkspace::grad_variance(int axis) const {
  if (axis < 0 || axis >= config_.d) throw input_error("grad_variance: bad axis");
  double v = impl_->spectrum->grad_var[static_cast<size_t>(axis)];
  return config_.normalize ? v / impl_->spectrum->c0 : v;
}

void PairWorkspace::generate(
    uint64_t seed, uint64_t pair,
    const std::function<void(int, int, std::span<const double>)>& visit) {
  uint64_t pts = config_.lattice_points();
  double ld = std::pow(config_.torus_side, config_.d);
  double scale = 1.0 / ld;
  double norm = config_.normalize ? 1.0 / std::sqrt(impl_->spectrum->c0) : 1.0;
  double s = scale * norm;

  fill_noise(config_, seed, pair, impl_->noise.get());

  std::memcpy(impl_->work.get(), impl_->noise.get(), pts * sizeof(fftw_complex));
  fftw_execute_dft(impl_->plan, impl_->work.get(), impl_->work.get());
  for (uint64_t i = 0; i < pts; ++i) {
    impl_->re[i] = impl_->work.get()[i][0] * s;
    impl_->im[i] = impl_->work.get()[i][1] * s;
  }
  visit(0, -1, impl_->re);
  visit(1, -1, impl_->im);

  for (int a = 0; a < config_.d; ++a) {
    apply_gradient_symbol(config_, impl_->noise.get(), a, impl_->work.get());
    fftw_execute_dft(impl_->plan, impl_->work.get(), impl_->work.get());
    for (uint64_t i = 0; i < pts; ++i) {
      impl_->re[i] = impl_->work.get()[i][0] * s;
      impl_->im[i] = impl_->work.get()[i][1] * s;
    }
    visit(0, a, impl_->re);
    visit(1, a, impl_->im);
  }
}

FieldSample sample_field(const CutoffConfig& config, uint64_t seed,
                         uint64_t sample_id) {
  PairWorkspace ws(config);
  uint64_t pts = config.lattice_points();
  int want = static_cast<int>(sample_id & 1);

  FieldSample s;
  s.config = config;
  s.seed = seed;
  s.sample_id = sample_id;
  s.values.resize(pts);
  s.gradient.resize(static_cast<size_t>(config.d));
  s.site_variance = ws.site_variance();
  s.grad_variance_per_dir.resize(static_cast<size_t>(config.d));
  for (int a = 0; a < config.d; ++a)
    s.grad_variance_per_dir[static_cast<size_t>(a)] = ws.grad_variance(a);

  ws.generate(seed, sample_id >> 1,
              [&](int slot, int axis, std::span<const double> lattice) {
                if (slot != want) return;
                if (axis < 0) {
                  std::copy(lattice.begin(), lattice.end(), s.values.begin());
                } else {
                  auto& g = s.gradient[static_cast<size_t>(axis)];
                  g.assign(lattice.begin(), lattice.end());
                }
              });
  return s;
}

CovEstimate empirical_covariance(const std::vector<FieldSample>& samples,
                                 const std::vector<int>& lag) {
  if (samples.size() < 2) throw input_error("empirical_covariance: need >= 2 samples");
  const CutoffConfig& cfg = samples.front().config;
  for (const auto& s : samples)
    if (!s.config.same_law(cfg))
      throw input_error("empirical_covariance: samples mix configs");
  if (static_cast<int>(lag.size()) != cfg.d)
    throw input_error("empirical_covariance: lag dimension mismatch");

  int m = cfg.grid_points_per_side, d = cfg.d;
  int interior = static_cast<int>(std::floor(1.0 / cfg.spacing())) + 1;  // sites in [0,1]

  std::vector<uint64_t> strides(static_cast<size_t>(d), 1);
  for (int a = d - 2; a >= 0; --a)
    strides[static_cast<size_t>(a)] =
        strides[static_cast<size_t>(a + 1)] * static_cast<uint64_t>(m);

  // enumerate interior sites once
  std::vector<uint64_t> base, shifted;
  std::vector<int> idx(static_cast<size_t>(d), 0);
  uint64_t count = 1;
  for (int a = 0; a < d; ++a) count *= static_cast<uint64_t>(interior);
  base.reserve(count);
  shifted.reserve(count);
  for (uint64_t c = 0; c < count; ++c) {
    uint64_t rest = c, i0 = 0, i1 = 0;
    for (int a = d - 1; a >= 0; --a) {
      int k = static_cast<int>(rest % static_cast<uint64_t>(interior));
      rest /= static_cast<uint64_t>(interior);
      int ks = ((k + lag[static_cast<size_t>(a)]) % m + m) % m;
      i0 += static_cast<uint64_t>(k) * strides[static_cast<size_t>(a)];
      i1 += static_cast<uint64_t>(ks) * strides[static_cast<size_t>(a)];
    }
    base.push_back(i0);
    shifted.push_back(i1);
  }

  std::vector<double> per_sample;
  per_sample.reserve(samples.size());
  for (const auto& s : samples) {
    double acc = 0.0;
    for (uint64_t c = 0; c < count; ++c) acc += s.values[base[c]] * s.values[shifted[c]];
    per_sample.push_back(acc / static_cast<double>(count));
  }
  double mean = 0.0;
  for (double v : per_sample) mean += v;
  mean /= static_cast<double>(per_sample.size());
  double var = 0.0;
  for (double v : per_sample) var += (v - mean) * (v - mean);
  var /= static_cast<double>(per_sample.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(per_sample.size()))};
}

std::vector<std::vector<double>> spectral_gradient(const CutoffConfig& config,
                                                   const std::vector<double>& values) {
  config.validate();
  uint64_t pts = config.lattice_points();
  if (values.size() != pts) throw input_error("spectral_gradient: size mismatch");
  FftwBuffer freq = alloc_complex(pts);
  FftwBuffer work = alloc_complex(pts);
  for (uint64_t i = 0; i < pts; ++i) {
    freq.get()[i][0] = values[i];
    freq.get()[i][1] = 0.0;
  }
  fftw_plan fwd = make_plan(config.d, config.grid_points_per_side, freq.get(),
                            FFTW_FORWARD);
  fftw_execute_dft(fwd, freq.get(), freq.get());
  destroy_plan(fwd);
  fftw_plan bwd = make_plan(config.d, config.grid_points_per_side, work.get(),
                            FFTW_BACKWARD);
  std::vector<std::vector<double>> out(static_cast<size_t>(config.d));
  double inv = 1.0 / static_cast<double>(pts);
  for (int a = 0; a < config.d; ++a) {
    apply_gradient_symbol(config, freq.get(), a, work.get());
    fftw_execute_dft(bwd, work.get(), work.get());
    auto& g = out[static_cast<size_t>(a)];
    g.resize(pts);
    for (uint64_t i = 0; i < pts; ++i) g[i] = work.get()[i][0] * inv;
  }
  destroy_plan(bwd);
  return out;
}

double parseval_gap(const CutoffConfig& config, const std::vector<double>& values) {
  config.validate();
  uint64_t pts = config.lattice_points();
  if (values.size() != pts) throw input_error("parseval_gap: size mismatch");
  FftwBuffer freq = alloc_complex(pts);
  for (uint64_t i = 0; i < pts; ++i) {
    freq.get()[i][0] = values[i];
    freq.get()[i][1] = 0.0;
  }
  fftw_plan fwd = make_plan(config.d, config.grid_points_per_side, freq.get(),
                            FFTW_FORWARD);
  fftw_execute_dft(fwd, freq.get(), freq.get());
  destroy_plan(fwd);
  double site = 0.0, power = 0.0;
  for (uint64_t i = 0; i < pts; ++i) {
    site += values[i] * values[i];
    power += freq.get()[i][0] * freq.get()[i][0] + freq.get()[i][1] * freq.get()[i][1];
  }
  power /= static_cast<double>(pts);
  double scale = std::max(site, power);
  return scale > 0.0 ? std::fabs(site - power) / scale : 0.0;
}

namespace {
constexpr char kDumpMagic[8] = {'P', 'H', 'I', '4', 'F', 'L', 'D', '1'};
}

void write_field_dump(const FieldSample& sample, const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw input_error("write_field_dump: cannot open " + path);
  auto put = [&](const void* p, size_t len) {
    if (std::fwrite(p, 1, len, f) != len) {
      std::fclose(f);
      throw input_error("write_field_dump: short write");
    }
  };
  put(kDumpMagic, 8);
  uint32_t d = static_cast<uint32_t>(sample.config.d);
  uint32_t n = static_cast<uint32_t>(sample.config.n);
  uint32_t m = static_cast<uint32_t>(sample.config.grid_points_per_side);
  uint32_t normalize = sample.config.normalize ? 1 : 0;
  double l = sample.config.torus_side;
  put(&d, 4);
  put(&n, 4);
  put(&m, 4);
  put(&normalize, 4);
  put(&l, 8);
  put(&sample.seed, 8);
  put(&sample.sample_id, 8);
  put(sample.values.data(), sample.values.size() * 8);
  for (const auto& g : sample.gradient) put(g.data(), g.size() * 8);
  std::fclose(f);
}

FieldSample read_field_dump(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw input_error("read_field_dump: cannot open " + path);
  auto get = [&](void* p, size_t len) {
    if (std::fread(p, 1, len, f) != len) {
      std::fclose(f);
      throw integrity_error("read_field_dump: truncated file " + path);
    }
  };
  char magic[8];
  get(magic, 8);
  if (std::memcmp(magic, kDumpMagic, 8) != 0) {
    std::fclose(f);
    throw integrity_error("read_field_dump: bad magic in " + path);
  }
  uint32_t d, n, m, normalize;
  double l;
  FieldSample s;
  get(&d, 4);
  get(&n, 4);
  get(&m, 4);
  get(&normalize, 4);
  get(&l, 8);
  get(&s.seed, 8);
  get(&s.sample_id, 8);
  s.config.d = static_cast<int>(d);
  s.config.n = static_cast<int>(n);
  s.config.grid_points_per_side = static_cast<int>(m);
  s.config.normalize = normalize != 0;
  s.config.torus_side = l;
  s.config.validate();
  uint64_t pts = s.config.lattice_points();
  s.values.resize(pts);
  get(s.values.data(), pts * 8);
  s.gradient.resize(static_cast<size_t>(s.config.d));
  for (auto& g : s.gradient) {
    g.resize(pts);
    get(g.data(), pts * 8);
  }
  std::fclose(f);
  const LatticeSpectrum& spec = lattice_spectrum(s.config);
  s.site_variance = s.config.normalize ? 1.0 : spec.c0;
  s.grad_variance_per_dir.resize(static_cast<size_t>(s.config.d));
  for (int a = 0; a < s.config.d; ++a)
    s.grad_variance_per_dir[static_cast<size_t>(a)] =
        spec.grad_var[static_cast<size_t>(a)] / (s.config.normalize ? spec.c0 : 1.0);
  return s;
}

}  // namespace phi4lab
