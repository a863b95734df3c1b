#include "meanfield/nbody.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "meanfield/errors.hpp"
#include "meanfield/hartree.hpp"

namespace mf {

namespace {

std::size_t guarded_size(const Grid& g, int particles, std::size_t max_entries) {
  if (particles < 1) throw ConfigError("particle count must be >= 1");
  const std::size_t entries = checked_power(g.size(), particles);
  if (entries > max_entries) {
    throw MemoryGuardError("N-body tensor of " + std::to_string(entries) +
                           " entries exceeds the memory guard of " + std::to_string(max_entries));
  }
  return entries;
}

// diff[a * M + b] = flat index of the displacement a - b.
std::vector<std::size_t> difference_table(const Grid& g) {
  const std::size_t m = g.size();
  std::vector<std::size_t> table(m * m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) table[a * m + b] = g.difference_index(a, b);
  }
  return table;
}

// (1/N) sum_{l<j} v(x_l - x_j) at every configuration.
std::vector<double> pair_sum_tensor(const Grid& g, int particles, const RealField& v) {
  if (v.size() != g.size()) throw ConfigError("pair potential size does not match grid");
  const TensorLayout layout{g, particles};
  const std::size_t total = layout.size();
  const std::size_t m = g.size();
  const auto diff = difference_table(g);
  const double coupling = 1.0 / particles;
  std::vector<double> out(total, 0.0);
  if (particles < 2) return out;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(total); ++i) {
    std::size_t idx[64];
    std::size_t rest = static_cast<std::size_t>(i);
    for (int s = particles - 1; s >= 0; --s) {
      idx[s] = rest % m;
      rest /= m;
    }
    double sum = 0.0;
    for (int l = 0; l < particles; ++l) {
      for (int j = l + 1; j < particles; ++j) sum += v[diff[idx[l] * m + idx[j]]];
    }
    out[static_cast<std::size_t>(i)] = coupling * sum;
  }
  return out;
}

std::vector<cplx> free_axis_factor(const Grid& g, double t) {
  std::vector<cplx> f(static_cast<std::size_t>(g.points()));
  for (int j = 0; j < g.points(); ++j) {
    const double p = g.axis_momentum(j);
    f[static_cast<std::size_t>(j)] = std::polar(1.0, -0.5 * t * p * p);
  }
  return f;
}

void free_flow_all(NBodyState& psi, std::span<const cplx> factor) {
  const auto layout = psi.layout();
  for (int a = 0; a < layout.axes(); ++a) apply_axis_factor(psi.values, layout, a, factor);
}

// Kinetic part of the symbol summed over particles, evaluated at flat index i
// of the momentum-space tensor.
template <class F>
double reduce_momentum(const NBodyState& psi, F&& weight) {
  std::vector<cplx> hat = psi.values;
  const auto layout = psi.layout();
  fft_all(hat, layout, FftDirection::forward);
  const std::size_t m = psi.grid.size();
  std::vector<double> p2(m);
  for (std::size_t q = 0; q < m; ++q) p2[q] = psi.grid.momentum_squared(q);
  double s = 0.0;
  std::vector<double> slot_p2(static_cast<std::size_t>(psi.particles));
  for (std::size_t i = 0; i < hat.size(); ++i) {
    std::size_t rest = i;
    for (int sl = psi.particles - 1; sl >= 0; --sl) {
      slot_p2[static_cast<std::size_t>(sl)] = p2[rest % m];
      rest /= m;
    }
    s += weight(slot_p2) * std::norm(hat[i]);
  }
  return s * std::pow(psi.grid.cell_volume(), psi.particles);
}

}  // namespace

NBodyState::NBodyState(const Grid& g, int n_particles, std::size_t max_entries)
    : grid(g), particles(n_particles), values(guarded_size(g, n_particles, max_entries)) {}

double NBodyState::norm() const {
  double s = 0.0;
  for (const auto& z : values) s += std::norm(z);
  return std::sqrt(std::pow(grid.cell_volume(), particles) * s);
}

void NBodyState::normalize() {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw ConfigError("cannot normalize a zero or non-finite state");
  for (auto& z : values) z /= n;
}

bool NBodyState::all_finite() const {
  return std::all_of(values.begin(), values.end(),
                     [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

NBodyState product_state(const WaveFn& psi, int particles, std::size_t max_entries,
                         bool require_normalized) {
  if (require_normalized && std::abs(psi.norm() - 1.0) > 1e-10) {
    throw ConfigError("product_state needs a normalized one-body factor");
  }
  NBodyState out(psi.grid, particles, max_entries);
  const std::size_t m = psi.grid.size();
  out.values[0] = 1.0;
  std::size_t filled = 1;
  // Build the tensor one factor at a time: new[i * m + x] = old[i] * psi[x].
  std::vector<cplx> scratch;
  for (int s = 0; s < particles; ++s) {
    scratch.assign(out.values.begin(), out.values.begin() + static_cast<std::ptrdiff_t>(filled));
    for (std::size_t i = 0; i < filled; ++i) {
      for (std::size_t x = 0; x < m; ++x) out.values[i * m + x] = scratch[i] * psi.values[x];
    }
    filled *= m;
  }
  return out;
}

NBodyHamiltonian::NBodyHamiltonian(const Grid& grid, int particles, RealField pair_potential,
                                   std::size_t max_entries)
    : grid_(grid), particles_(particles), pair_(std::move(pair_potential)) {
  guarded_size(grid, particles, max_entries);
  interaction_ = pair_sum_tensor(grid_, particles_, pair_);
}

NBodyHamiltonian::NBodyHamiltonian(const PotentialSplit& split, PairMode mode, std::size_t max_entries)
    : NBodyHamiltonian(split.grid, split.params.particles,
                       mode == PairMode::full ? split.full : split.far, max_entries) {}

double NBodyHamiltonian::energy(const NBodyState& psi) const {
  if (!(psi.grid == grid_) || psi.particles != particles_) {
    throw ConfigError("state does not match Hamiltonian");
  }
  const double kinetic = reduce_momentum(psi, [](const std::vector<double>& p2) {
    double s = 0.0;
    for (double v : p2) s += 0.5 * v;
    return s;
  });
  double potential = 0.0;
  for (std::size_t i = 0; i < psi.values.size(); ++i) potential += interaction_[i] * std::norm(psi.values[i]);
  return kinetic + std::pow(grid_.cell_volume(), particles_) * potential;
}

NBodyState nbody_step(const NBodyState& psi, double dt, const NBodyHamiltonian& ham) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (!(psi.grid == ham.grid()) || psi.particles != ham.particles()) {
    throw ConfigError("state does not match Hamiltonian");
  }
  NBodyState out = psi;
  const auto half = free_axis_factor(psi.grid, 0.5 * dt);
  free_flow_all(out, half);
  const auto& u = ham.interaction();
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] *= std::polar(1.0, -dt * u[i]);
  free_flow_all(out, half);
  if (!out.all_finite()) throw InstabilityError("N-body state became non-finite");
  return out;
}

void evolve_nbody(const NBodyState& psi0, const NBodyHamiltonian& ham, const NBodyOptions& options,
                  const std::function<void(double, const NBodyState&)>& observer) {
  if (!(psi0.grid == ham.grid()) || psi0.particles != ham.particles()) {
    throw ConfigError("state does not match Hamiltonian");
  }
  if (options.record_every < 1) throw ConfigError("record_every must be >= 1");
  const int steps = step_count(options.final_time, options.dt);
  observer(0.0, psi0);
  if (steps == 0) return;

  const auto half = free_axis_factor(psi0.grid, 0.5 * options.dt);
  const auto full = free_axis_factor(psi0.grid, options.dt);
  std::vector<cplx> phase(ham.interaction().size());
  {
    const auto& u = ham.interaction();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(phase.size()); ++i) {
      phase[static_cast<std::size_t>(i)] = std::polar(1.0, -options.dt * u[static_cast<std::size_t>(i)]);
    }
  }
  const double norm0 = psi0.norm();
  NBodyState psi = psi0;
  bool pending_half = false;
  for (int step = 1; step <= steps; ++step) {
    free_flow_all(psi, pending_half ? std::span<const cplx>(full) : std::span<const cplx>(half));
    cplx* v = psi.values.data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(phase.size()); ++i) v[i] *= phase[static_cast<std::size_t>(i)];
    pending_half = true;
    if (step % options.record_every == 0 || step == steps) {
      free_flow_all(psi, half);
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

std::vector<NBodyFrame> evolve_nbody(const NBodyState& psi0, const NBodyHamiltonian& ham,
                                     const NBodyOptions& options) {
  std::vector<NBodyFrame> frames;
  evolve_nbody(psi0, ham, options,
               [&](double t, const NBodyState& psi) { frames.push_back({t, psi}); });
  return frames;
}

double expectation_L_pow(const NBodyState& psi, int k) {
  if (k < 1 || k > 2) throw ConfigError("expectation_L_pow supports k = 1 or 2");
  if (std::abs(psi.norm() - 1.0) > 1e-9) throw ConfigError("expectation_L_pow needs a normalized state");
  const double inv_n = 1.0 / psi.particles;
  return reduce_momentum(psi, [&](const std::vector<double>& p2) {
    double l = 0.0;
    for (double v : p2) l += 1.0 + v;
    l *= inv_n;
    return k == 1 ? l : l * l;
  });
}

double state_distance(const NBodyState& a, const NBodyState& b) {
  if (!(a.grid == b.grid) || a.particles != b.particles) throw ConfigError("state shapes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += std::norm(a.values[i] - b.values[i]);
  return std::sqrt(std::pow(a.grid.cell_volume(), a.particles) * s);
}

double remainder_interaction_norm(const NBodyState& psi, const RealField& near_potential) {
  const auto w = pair_sum_tensor(psi.grid, psi.particles, near_potential);
  double s = 0.0;
  for (std::size_t i = 0; i < psi.values.size(); ++i) s += w[i] * w[i] * std::norm(psi.values[i]);
  return std::sqrt(std::pow(psi.grid.cell_volume(), psi.particles) * s);
}

double symmetry_defect(const NBodyState& psi) {
  const std::size_t m = psi.grid.size();
  const int n = psi.particles;
  const auto layout = psi.layout();
  double worst = 0.0;
  for (int l = 0; l < n; ++l) {
    for (int j = l + 1; j < n; ++j) {
      const std::size_t sl = layout.slot_stride(l);
      const std::size_t sj = layout.slot_stride(j);
      double s = 0.0;
      for (std::size_t i = 0; i < psi.values.size(); ++i) {
        const std::size_t il = (i / sl) % m;
        const std::size_t ij = (i / sj) % m;
        const std::size_t swapped = i + (ij - il) * sl + (il - ij) * sj;
        s += std::norm(psi.values[i] - psi.values[swapped]);
      }
      worst = std::max(worst, s);
    }
  }
  return std::sqrt(std::pow(psi.grid.cell_volume(), n) * worst);
}

}  // namespace mf
