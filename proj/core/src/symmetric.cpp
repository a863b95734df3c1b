#include "meanfield/symmetric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "meanfield/errors.hpp"
#include "meanfield/hartree.hpp"

namespace mf {

namespace {

constexpr std::size_t kFiberBatch = 256;

std::uint64_t checked_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t num = n - k + i;
    if (r > std::numeric_limits<std::uint64_t>::max() / num) throw MemoryGuardError("multiset count overflows");
    r = r * num / i;
  }
  return r;
}

std::size_t sorted_count(std::size_t modes, int particles) {
  return static_cast<std::size_t>(checked_binomial(modes + static_cast<std::size_t>(particles) - 1,
                                                   static_cast<std::uint64_t>(particles)));
}

void guard(std::size_t entries, std::size_t max_entries, const char* what) {
  if (entries > max_entries) {
    throw MemoryGuardError(std::string(what) + " needs " + std::to_string(entries) +
                           " entries, above the limit of " + std::to_string(max_entries));
  }
}

// Inserts j into the sorted tuple `base`, writing the result to `out`.
void insert_sorted(std::span<const std::uint32_t> base, std::uint32_t j, std::uint32_t* out) {
  std::size_t w = 0;
  bool placed = false;
  for (std::uint32_t v : base) {
    if (!placed && j <= v) {
      out[w++] = j;
      placed = true;
    }
    out[w++] = v;
  }
  if (!placed) out[w] = j;
}

}  // namespace

MultisetIndex::MultisetIndex(std::size_t modes, int size) : modes_(modes), size_(size) {
  if (modes == 0 || size < 0) throw ConfigError("multiset index needs modes > 0 and size >= 0");
  count_ = sorted_count(modes, size);
  const std::size_t top = modes + static_cast<std::size_t>(size);
  binom_.assign(static_cast<std::size_t>(size) + 1, std::vector<std::uint64_t>(top + 1, 0));
  for (std::size_t j = 0; j <= static_cast<std::size_t>(size); ++j) {
    for (std::size_t i = 0; i <= top; ++i) binom_[j][i] = checked_binomial(i, j);
  }

  tuples_.assign(count_ * static_cast<std::size_t>(size), 0);
  multiplicity_.assign(count_, 1.0);
  if (size == 0) return;
  std::vector<std::uint32_t> t(static_cast<std::size_t>(size), 0);
  std::vector<double> fact(static_cast<std::size_t>(size) + 1, 1.0);
  for (int i = 1; i <= size; ++i) fact[static_cast<std::size_t>(i)] = fact[static_cast<std::size_t>(i) - 1] * i;
  while (true) {
    const std::size_t r = rank(t);
    std::copy(t.begin(), t.end(), tuples_.begin() + static_cast<std::ptrdiff_t>(r * t.size()));
    double denom = 1.0;
    std::size_t run = 1;
    for (std::size_t l = 1; l <= t.size(); ++l) {
      if (l < t.size() && t[l] == t[l - 1]) {
        ++run;
      } else {
        denom *= fact[run];
        run = 1;
      }
    }
    multiplicity_[r] = fact[t.size()] / denom;
    // Next non-decreasing tuple in lexicographic order.
    int pos = size - 1;
    while (pos >= 0 && t[static_cast<std::size_t>(pos)] + 1 == modes) --pos;
    if (pos < 0) break;
    const std::uint32_t v = t[static_cast<std::size_t>(pos)] + 1;
    for (int l = pos; l < size; ++l) t[static_cast<std::size_t>(l)] = v;
  }
}

std::size_t MultisetIndex::rank(std::span<const std::uint32_t> sorted) const {
  std::uint64_t r = 0;
  for (std::size_t l = 0; l < sorted.size(); ++l) r += binom_[l + 1][sorted[l] + l];
  return static_cast<std::size_t>(r);
}

SymmetricState::SymmetricState(const Grid& g, int n_particles, std::size_t max_entries)
    : grid(g), particles(n_particles) {
  if (n_particles < 1) throw ConfigError("particle count must be >= 1");
  guard(sorted_count(g.size(), n_particles), max_entries, "symmetric state");
  index_ = std::make_shared<const MultisetIndex>(g.size(), n_particles);
  values.assign(index_->count(), cplx{0.0, 0.0});
}

double SymmetricState::norm() const {
  double s = 0.0;
  for (std::size_t r = 0; r < values.size(); ++r) s += index_->multiplicity(r) * std::norm(values[r]);
  return std::sqrt(std::pow(grid.cell_volume(), particles) * s);
}

bool SymmetricState::all_finite() const {
  return std::all_of(values.begin(), values.end(),
                     [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

SymmetricState symmetric_product_state(const WaveFn& psi, int particles, std::size_t max_entries,
                                       bool require_normalized) {
  if (require_normalized && std::abs(psi.norm() - 1.0) > 1e-10) {
    throw ConfigError("product state needs a normalized one-body factor");
  }
  SymmetricState out(psi.grid, particles, max_entries);
  const auto& idx = out.index();
  for (std::size_t r = 0; r < idx.count(); ++r) {
    cplx v{1.0, 0.0};
    for (std::uint32_t q : idx.tuple(r)) v *= psi.values[q];
    out.values[r] = v;
  }
  return out;
}

SymmetricState compress(const NBodyState& psi, std::size_t max_entries) {
  SymmetricState out(psi.grid, psi.particles, max_entries);
  const auto& idx = out.index();
  const std::size_t m = psi.grid.size();
  for (std::size_t r = 0; r < idx.count(); ++r) {
    std::size_t flat = 0;
    for (std::uint32_t q : idx.tuple(r)) flat = flat * m + q;
    out.values[r] = psi.values[flat];
  }
  return out;
}

NBodyState expand(const SymmetricState& psi, std::size_t max_entries) {
  NBodyState out(psi.grid, psi.particles, max_entries);
  const std::size_t m = psi.grid.size();
  const auto& idx = psi.index();
  std::vector<std::uint32_t> t(static_cast<std::size_t>(psi.particles));
  for (std::size_t flat = 0; flat < out.values.size(); ++flat) {
    std::size_t rest = flat;
    for (int s = psi.particles - 1; s >= 0; --s) {
      t[static_cast<std::size_t>(s)] = static_cast<std::uint32_t>(rest % m);
      rest /= m;
    }
    std::sort(t.begin(), t.end());
    out.values[flat] = psi.values[idx.rank(t)];
  }
  return out;
}

double state_distance(const SymmetricState& a, const SymmetricState& b) {
  if (!(a.grid == b.grid) || a.particles != b.particles) throw ConfigError("state shapes differ");
  double s = 0.0;
  for (std::size_t r = 0; r < a.values.size(); ++r) {
    s += a.index().multiplicity(r) * std::norm(a.values[r] - b.values[r]);
  }
  return std::sqrt(std::pow(a.grid.cell_volume(), a.particles) * s);
}

double remainder_interaction_norm(const SymmetricState& psi, const RealField& near_potential) {
  if (near_potential.size() != psi.grid.size()) throw ConfigError("pair potential size does not match grid");
  const auto& idx = psi.index();
  const double coupling = 1.0 / psi.particles;
  double s = 0.0;
  for (std::size_t r = 0; r < idx.count(); ++r) {
    const auto t = idx.tuple(r);
    double w = 0.0;
    for (std::size_t l = 0; l < t.size(); ++l) {
      for (std::size_t j = l + 1; j < t.size(); ++j) w += near_potential[psi.grid.difference_index(t[l], t[j])];
    }
    w *= coupling;
    s += idx.multiplicity(r) * w * w * std::norm(psi.values[r]);
  }
  return std::sqrt(std::pow(psi.grid.cell_volume(), psi.particles) * s);
}

SymmetricPropagator::SymmetricPropagator(const Grid& grid, int particles, RealField pair_potential,
                                         std::size_t max_entries)
    : grid_(grid), particles_(particles) {
  if (particles < 1) throw ConfigError("particle count must be >= 1");
  if (pair_potential.size() != grid.size()) throw ConfigError("pair potential size does not match grid");
  const std::size_t m = grid.size();
  const auto n = static_cast<std::size_t>(particles);

  level_size_.resize(n + 1);
  for (std::size_t s = 0; s <= n; ++s) {
    level_size_[s] = sorted_count(m, static_cast<int>(s)) * sorted_count(m, particles - static_cast<int>(s));
    guard(level_size_[s], max_entries, "symmetric transform level");
    if (level_size_[s] >= (std::size_t{1} << 32)) throw MemoryGuardError("symmetric level exceeds 32-bit indexing");
  }
  indices_.resize(n + 1);
  for (std::size_t s = 0; s <= n; ++s) indices_[s] = std::make_shared<const MultisetIndex>(m, static_cast<int>(s));
  top_ = indices_[n];

  passes_.resize(n);
  std::vector<std::uint32_t> merged(n);
  for (std::size_t s = 0; s < n; ++s) {
    const MultisetIndex& lo_a = *indices_[s];
    const MultisetIndex& rest = *indices_[n - s - 1];
    const std::size_t lo_b = indices_[n - s]->count();
    const std::size_t rest_count = rest.count();
    Pass& pass = passes_[s];
    pass.fibers = lo_a.count() * rest_count;
    guard(pass.fibers * m, max_entries, "symmetric transform table");
    pass.lower.resize(pass.fibers * m);
    pass.upper.resize(pass.fibers * m);
    const std::size_t batches = (pass.fibers + kFiberBatch - 1) / kFiberBatch;
    pass.up.batch_begin.assign(batches + 1, 0);
    pass.down.batch_begin.assign(batches + 1, 0);
    for (std::size_t ra = 0; ra < lo_a.count(); ++ra) {
      const auto a = lo_a.tuple(ra);
      for (std::size_t rb = 0; rb < rest_count; ++rb) {
        const auto b = rest.tuple(rb);
        const std::size_t f = ra * rest_count + rb;
        const std::size_t batch = f / kFiberBatch;
        for (std::size_t j = 0; j < m; ++j) {
          const auto q = static_cast<std::uint32_t>(j);
          const std::size_t e = f * m + j;
          const auto local = static_cast<std::uint32_t>(e - batch * kFiberBatch * m);
          insert_sorted(b, q, merged.data());
          pass.lower[e] = static_cast<std::uint32_t>(ra * lo_b + indices_[n - s]->rank({merged.data(), b.size() + 1}));
          insert_sorted(a, q, merged.data());
          pass.upper[e] =
              static_cast<std::uint32_t>(indices_[s + 1]->rank({merged.data(), a.size() + 1}) * rest_count + rb);
          // Each level entry is written by exactly one fiber: the one whose
          // inserted index is the largest of its group.
          if (a.empty() || q >= a.back()) {
            pass.up.src.push_back(local);
            pass.up.dst.push_back(pass.upper[e]);
          }
          if (b.empty() || q >= b.back()) {
            pass.down.src.push_back(local);
            pass.down.dst.push_back(pass.lower[e]);
          }
        }
        if ((f + 1) % kFiberBatch == 0 || f + 1 == pass.fibers) {
          pass.up.batch_begin[batch + 1] = pass.up.src.size();
          pass.down.batch_begin[batch + 1] = pass.down.src.size();
        }
      }
    }
  }

  const double coupling = 1.0 / particles;
  interaction_.assign(top_->count(), 0.0);
  kinetic_.assign(top_->count(), 0.0);
  for (std::size_t r = 0; r < top_->count(); ++r) {
    const auto t = top_->tuple(r);
    double u = 0.0;
    double k = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      k += grid.momentum_squared(t[l]);
      for (std::size_t j = l + 1; j < n; ++j) u += pair_potential[grid.difference_index(t[l], t[j])];
    }
    interaction_[r] = coupling * u;
    kinetic_[r] = k;
  }
}

void SymmetricPropagator::transform(std::vector<cplx>& a, std::vector<cplx>& b, bool forward) const {
  const std::size_t m = grid_.size();
  const std::size_t n = passes_.size();
  const FftDirection dir = forward ? FftDirection::forward : FftDirection::backward;
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t s = forward ? step : n - 1 - step;
    const Pass& pass = passes_[s];
    const auto& gather = forward ? pass.lower : pass.upper;
    const Scatter& scatter = forward ? pass.up : pass.down;
    b.resize(level_size_[forward ? s + 1 : s]);
    const std::size_t batches = scatter.batch_begin.size() - 1;
    const cplx* src = a.data();
    cplx* dst = b.data();
#pragma omp parallel
    {
      std::vector<cplx> buf(kFiberBatch * m);
#pragma omp for schedule(static)
      for (std::ptrdiff_t g = 0; g < static_cast<std::ptrdiff_t>(batches); ++g) {
        const std::size_t f0 = static_cast<std::size_t>(g) * kFiberBatch;
        const std::size_t count = std::min(kFiberBatch, pass.fibers - f0);
        const std::uint32_t* idx = gather.data() + f0 * m;
        const std::size_t entries = count * m;
        for (std::size_t e = 0; e < entries; ++e) buf[e] = src[idx[e]];
        fft_fields_unscaled(std::span<cplx>(buf.data(), entries), grid_, count, dir);
        for (std::size_t w = scatter.batch_begin[static_cast<std::size_t>(g)];
             w < scatter.batch_begin[static_cast<std::size_t>(g) + 1]; ++w) {
          dst[scatter.dst[w]] = buf[scatter.src[w]];
        }
      }
    }
    a.swap(b);
  }
}

namespace {

void scale_values(std::vector<cplx>& v, double factor) {
  for (cplx& x : v) x *= factor;
}

}  // namespace

std::vector<cplx> SymmetricPropagator::to_momentum(const std::vector<cplx>& position) const {
  if (position.size() != top_->count()) throw ConfigError("symmetric values have the wrong size");
  std::vector<cplx> a = position;
  std::vector<cplx> b;
  transform(a, b, true);
  scale_values(a, std::pow(static_cast<double>(grid_.size()), -0.5 * particles_));
  return a;
}

std::vector<cplx> SymmetricPropagator::to_position(const std::vector<cplx>& momentum) const {
  if (momentum.size() != top_->count()) throw ConfigError("symmetric values have the wrong size");
  std::vector<cplx> a = momentum;
  std::vector<cplx> b;
  transform(a, b, false);
  scale_values(a, std::pow(static_cast<double>(grid_.size()), -0.5 * particles_));
  return a;
}

double SymmetricPropagator::energy(const SymmetricState& psi) const {
  if (!(psi.grid == grid_) || psi.particles != particles_) throw ConfigError("state does not match propagator");
  const std::vector<cplx> hat = to_momentum(psi.values);
  double e = 0.0;
  for (std::size_t r = 0; r < hat.size(); ++r) {
    e += top_->multiplicity(r) * (0.5 * kinetic_[r] * std::norm(hat[r]) + interaction_[r] * std::norm(psi.values[r]));
  }
  return std::pow(grid_.cell_volume(), particles_) * e;
}

void SymmetricPropagator::evolve(const SymmetricState& psi0, const NBodyOptions& options,
                                 const std::function<void(double, const SymmetricState&)>& observer) const {
  if (!(psi0.grid == grid_) || psi0.particles != particles_) {
    throw ConfigError("state does not match propagator");
  }
  if (options.record_every < 1) throw ConfigError("record_every must be >= 1");
  const int steps = step_count(options.final_time, options.dt);
  observer(0.0, psi0);
  if (steps == 0) return;

  const std::size_t count = top_->count();
  // The staged DFT is unnormalized; its round-trip factor M^N is folded into
  // the kinetic phases.
  const double norm = std::pow(static_cast<double>(grid_.size()), -particles_);
  std::vector<cplx> half(count), full(count), phase(count);
  for (std::size_t r = 0; r < count; ++r) {
    half[r] = std::polar(norm, -0.25 * options.dt * kinetic_[r]);
    full[r] = std::polar(norm, -0.5 * options.dt * kinetic_[r]);
    phase[r] = std::polar(1.0, -options.dt * interaction_[r]);
  }
  const auto multiply = [count](std::vector<cplx>& v, const std::vector<cplx>& f) {
    for (std::size_t r = 0; r < count; ++r) v[r] *= f[r];
  };

  const double norm0 = psi0.norm();
  SymmetricState psi = psi0;
  std::vector<cplx> scratch;
  scratch.reserve(*std::max_element(level_size_.begin(), level_size_.end()));
  psi.values.reserve(scratch.capacity());
  bool pending_half = false;
  for (int step = 1; step <= steps; ++step) {
    transform(psi.values, scratch, true);
    multiply(psi.values, pending_half ? full : half);
    transform(psi.values, scratch, false);
    multiply(psi.values, phase);
    pending_half = true;
    if (step % options.record_every == 0 || step == steps) {
      transform(psi.values, scratch, true);
      multiply(psi.values, half);
      transform(psi.values, scratch, false);
      pending_half = false;
      if (!psi.all_finite()) throw InstabilityError("N-body state became non-finite");
      const double drift = std::abs(psi.norm() - norm0);
      if (drift > options.norm_tolerance) {
        throw InstabilityError("N-body norm drift " + std::to_string(drift) + " at t = " +
                               std::to_string(step * options.dt));
      }
      observer(step * options.dt, psi);
    }
  }
}

}  // namespace mf
