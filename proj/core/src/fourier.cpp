#include "meanfield/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "meanfield/errors.hpp"

namespace mf {

namespace {

// Fibers are batched in groups of this many transforms. The grouping does
// not depend on the thread count, so results are bitwise reproducible.
constexpr std::size_t kBatch = 256;

struct PlanKey {
  int rank;
  int n;
  int howmany;
  int stride;
  int dist;
  int sign;
  auto operator<=>(const PlanKey&) const = default;
};

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(const PlanKey& key, cplx* sample) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    // FFTW_ESTIMATE leaves the arrays untouched during planning.
    auto* data = reinterpret_cast<fftw_complex*>(sample);
    const int dims[3] = {key.n, key.n, key.n};
    fftw_plan plan = fftw_plan_many_dft(key.rank, dims, key.howmany, data, nullptr, key.stride, key.dist,
                                        data, nullptr, key.stride, key.dist, key.sign,
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw std::runtime_error("FFTW planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

void execute(fftw_plan plan, cplx* data) {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, p, p);
}

std::size_t axis_stride(const TensorLayout& layout, int axis) {
  std::size_t s = 1;
  for (int a = axis + 1; a < layout.axes(); ++a) s *= static_cast<std::size_t>(layout.grid.points());
  return s;
}

}  // namespace

std::size_t TensorLayout::size() const { return checked_power(grid.size(), slots); }

std::size_t TensorLayout::slot_stride(int slot) const {
  return checked_power(grid.size(), slots - 1 - slot);
}

std::size_t TensorLayout::slot_index(std::size_t flat, int slot) const {
  return (flat / slot_stride(slot)) % grid.size();
}

void fft_axis(std::span<cplx> data, const TensorLayout& layout, int axis, FftDirection dir) {
  if (data.size() != layout.size()) throw ConfigError("tensor size does not match layout");
  if (axis < 0 || axis >= layout.axes()) throw ConfigError("fft axis out of range");
  const int n = layout.grid.points();
  const int sign = dir == FftDirection::forward ? FFTW_FORWARD : FFTW_BACKWARD;
  const std::size_t inner = axis_stride(layout, axis);
  const std::size_t block = inner * static_cast<std::size_t>(n);
  const std::size_t blocks = data.size() / block;
  cplx* base = data.data();

  if (inner == 1) {
    // Contiguous fibers: batch consecutive blocks.
    const std::size_t group = std::min(blocks, kBatch);
    const std::size_t groups = blocks / group;
    fftw_plan plan = PlanCache::instance().get({1, n, static_cast<int>(group), 1, n, sign}, base);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t g = 0; g < static_cast<std::ptrdiff_t>(groups); ++g) {
      execute(plan, base + static_cast<std::size_t>(g) * group * n);
    }
  } else {
    // Strided fibers: batch adjacent columns inside each block.
    const std::size_t group = std::min(inner, kBatch);
    const std::size_t per_block = inner / group;
    fftw_plan plan = PlanCache::instance().get(
        {1, n, static_cast<int>(group), static_cast<int>(inner), 1, sign}, base);
    const std::size_t work = blocks * per_block;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t w = 0; w < static_cast<std::ptrdiff_t>(work); ++w) {
      const std::size_t b = static_cast<std::size_t>(w) / per_block;
      const std::size_t c = static_cast<std::size_t>(w) % per_block;
      execute(plan, base + b * block + c * group);
    }
  }

  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(data.size()); ++i) base[i] *= scale;
}

void fft_fields_unscaled(std::span<cplx> data, const Grid& grid, std::size_t count, FftDirection dir) {
  const std::size_t m = grid.size();
  if (data.size() != count * m) throw ConfigError("field batch size does not match grid");
  if (count == 0) return;
  const int sign = dir == FftDirection::forward ? FFTW_FORWARD : FFTW_BACKWARD;
  fftw_plan plan = PlanCache::instance().get(
      {grid.dim(), grid.points(), static_cast<int>(count), 1, static_cast<int>(m), sign}, data.data());
  execute(plan, data.data());
}

void fft_fields(std::span<cplx> data, const Grid& grid, std::size_t count, FftDirection dir) {
  fft_fields_unscaled(data, grid, count, dir);
  const std::size_t m = grid.size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (cplx& v : data) v *= scale;
}

void fft_slot(std::span<cplx> data, const TensorLayout& layout, int slot, FftDirection dir) {
  const int d = layout.grid.dim();
  for (int a = 0; a < d; ++a) fft_axis(data, layout, slot * d + a, dir);
}

void fft_all(std::span<cplx> data, const TensorLayout& layout, FftDirection dir) {
  for (int a = 0; a < layout.axes(); ++a) fft_axis(data, layout, a, dir);
}

Symbol make_symbol(const Grid& grid, const std::function<cplx(const Momentum&)>& m) {
  Symbol s(grid.size());
  for (std::size_t q = 0; q < grid.size(); ++q) s[q] = m(grid.momentum(q));
  return s;
}

Symbol radial_symbol(const Grid& grid, const std::function<cplx(double)>& m) {
  Symbol s(grid.size());
  for (std::size_t q = 0; q < grid.size(); ++q) s[q] = m(grid.momentum_squared(q));
  return s;
}

Symbol free_propagator_symbol(const Grid& grid, double t) {
  return radial_symbol(grid, [t](double p2) { return std::polar(1.0, -0.5 * t * p2); });
}

Symbol heat_symbol(const Grid& grid, double kappa) {
  return radial_symbol(grid, [kappa](double p2) { return cplx{std::exp(-kappa * p2), 0.0}; });
}

Symbol bessel_symbol(const Grid& grid, double s) {
  return radial_symbol(grid, [s](double p2) { return cplx{std::pow(1.0 + p2, 0.5 * s), 0.0}; });
}

namespace {
void require_finite(const Symbol& symbol) {
  for (const auto& z : symbol) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw ConfigError("Fourier symbol is not finite on the momentum lattice");
    }
  }
}
}  // namespace

void apply_slot_symbol(std::span<cplx> data, const TensorLayout& layout, int slot,
                       const Symbol& symbol) {
  if (symbol.size() != layout.grid.size()) throw ConfigError("symbol size does not match grid");
  require_finite(symbol);
  fft_slot(data, layout, slot, FftDirection::forward);
  const std::size_t stride = layout.slot_stride(slot);
  const std::size_t m = layout.grid.size();
  cplx* base = data.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(data.size()); ++i) {
    base[i] *= symbol[(static_cast<std::size_t>(i) / stride) % m];
  }
  fft_slot(data, layout, slot, FftDirection::backward);
}

void apply_axis_factor(std::span<cplx> data, const TensorLayout& layout, int axis,
                       std::span<const cplx> factor) {
  const auto n = static_cast<std::size_t>(layout.grid.points());
  if (factor.size() != n) throw ConfigError("axis factor length must equal points per axis");
  fft_axis(data, layout, axis, FftDirection::forward);
  const std::size_t stride = axis_stride(layout, axis);
  cplx* base = data.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(data.size()); ++i) {
    base[i] *= factor[(static_cast<std::size_t>(i) / stride) % n];
  }
  fft_axis(data, layout, axis, FftDirection::backward);
}

WaveFn apply_multiplier(const WaveFn& psi, const Symbol& symbol) {
  WaveFn out = psi;
  apply_slot_symbol(out.values, TensorLayout{psi.grid, 1}, 0, symbol);
  if (!out.all_finite()) throw InstabilityError("multiplier produced non-finite values");
  return out;
}

WaveFn apply_multiplier(const WaveFn& psi, const std::function<cplx(const Momentum&)>& m) {
  return apply_multiplier(psi, make_symbol(psi.grid, m));
}

std::vector<cplx> to_momentum(const WaveFn& psi) {
  std::vector<cplx> hat = psi.values;
  fft_slot(hat, TensorLayout{psi.grid, 1}, 0, FftDirection::forward);
  return hat;
}

double sobolev_norm(const WaveFn& psi, int order) {
  const auto hat = to_momentum(psi);
  double s = 0.0;
  for (std::size_t q = 0; q < hat.size(); ++q) {
    s += std::pow(1.0 + psi.grid.momentum_squared(q), order) * std::norm(hat[q]);
  }
  return std::sqrt(psi.grid.cell_volume() * s);
}

double laplacian_norm(const WaveFn& psi) {
  const auto hat = to_momentum(psi);
  double s = 0.0;
  for (std::size_t q = 0; q < hat.size(); ++q) {
    const double p2 = psi.grid.momentum_squared(q);
    s += p2 * p2 * std::norm(hat[q]);
  }
  return std::sqrt(psi.grid.cell_volume() * s);
}

}  // namespace mf
