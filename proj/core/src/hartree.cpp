#include "meanfield/hartree.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "meanfield/errors.hpp"

namespace mf {

namespace {

// Convolution with a fixed pair potential via its precomputed transform.
class Convolver {
 public:
  Convolver(const Grid& grid, const RealField& v) : grid_(grid), hat_(v.begin(), v.end()) {
    if (v.size() != grid.size()) throw ConfigError("pair potential size does not match grid");
    double scale_v = 0.0;
    for (double x : v) scale_v = std::max(scale_v, std::abs(x));
    for (std::size_t q = 0; q < v.size(); ++q) {
      if (std::abs(v[q] - v[grid.difference_index(0, q)]) > 1e-12 * scale_v) {
        throw ConfigError("pair potential must be even");
      }
    }
    fft_slot(hat_, TensorLayout{grid, 1}, 0, FftDirection::forward);
    const double scale = grid.cell_volume() * std::sqrt(static_cast<double>(grid.size()));
    for (auto& z : hat_) z *= scale;
  }

  RealField apply(const WaveFn& psi) const {
    std::vector<cplx> rho(psi.values.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(psi.values[i]);
    const TensorLayout layout{grid_, 1};
    fft_slot(rho, layout, 0, FftDirection::forward);
    for (std::size_t q = 0; q < rho.size(); ++q) rho[q] *= hat_[q];
    fft_slot(rho, layout, 0, FftDirection::backward);
    RealField out(rho.size());
    double max_re = 0.0;
    double max_im = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      out[i] = rho[i].real();
      max_re = std::max(max_re, std::abs(rho[i].real()));
      max_im = std::max(max_im, std::abs(rho[i].imag()));
    }
    if (max_im > 1e-9 * std::max(1.0, max_re)) {
      throw ConfigError("mean field has imaginary residue " + std::to_string(max_im));
    }
    return out;
  }

 private:
  Grid grid_;
  std::vector<cplx> hat_;
};

void apply_phase(WaveFn& psi, const RealField& field, double dt) {
  for (std::size_t i = 0; i < psi.values.size(); ++i) psi.values[i] *= std::polar(1.0, -dt * field[i]);
}

}  // namespace

RealField mean_field(const WaveFn& psi, const RealField& pair_potential) {
  return Convolver(psi.grid, pair_potential).apply(psi);
}

double hartree_energy(const WaveFn& psi, const RealField& pair_potential) {
  const auto hat = to_momentum(psi);
  double kinetic = 0.0;
  for (std::size_t q = 0; q < hat.size(); ++q) kinetic += psi.grid.momentum_squared(q) * std::norm(hat[q]);
  const RealField field = mean_field(psi, pair_potential);
  double interaction = 0.0;
  for (std::size_t i = 0; i < psi.values.size(); ++i) interaction += field[i] * std::norm(psi.values[i]);
  return 0.5 * psi.grid.cell_volume() * (kinetic + interaction);
}

WaveFn hartree_step(const WaveFn& psi, double dt, const RealField& pair_potential) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  const Symbol half = free_propagator_symbol(psi.grid, 0.5 * dt);
  WaveFn out = apply_multiplier(psi, half);
  apply_phase(out, mean_field(out, pair_potential), dt);
  out = apply_multiplier(out, half);
  return out;
}

WaveFn smooth_initial(const WaveFn& psi, double kappa) {
  if (!(kappa >= 0.0)) throw ConfigError("smoothing parameter must be non-negative");
  if (kappa == 0.0) return psi;
  return apply_multiplier(psi, heat_symbol(psi.grid, kappa));
}

int step_count(double final_time, double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (!(final_time >= 0.0)) throw ConfigError("final time must be non-negative");
  const double ratio = final_time / dt;
  const double steps = std::round(ratio);
  if (std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("final time is not an integer multiple of dt");
  }
  return static_cast<int>(steps);
}

HartreeTrajectory evolve_hartree(const WaveFn& psi0, const RealField& pair_potential,
                                 const HartreeOptions& options) {
  if (!(options.final_time > 0.0)) throw ConfigError("final time must be positive");
  if (options.record_every < 1) throw ConfigError("record_every must be >= 1");
  const int steps = step_count(options.final_time, options.dt);
  const Convolver convolver(psi0.grid, pair_potential);
  const TensorLayout layout{psi0.grid, 1};
  const Symbol half = free_propagator_symbol(psi0.grid, 0.5 * options.dt);

  HartreeTrajectory traj;
  const double norm0 = psi0.norm();
  const double h1_0 = h1_norm(psi0);
  auto record = [&](int step, const WaveFn& psi) {
    traj.times.push_back(step * options.dt);
    traj.states.push_back(psi);
    traj.norms.push_back(psi.norm());
    traj.energies.push_back(hartree_energy(psi, pair_potential));
    traj.h1_norms.push_back(h1_norm(psi));
  };
  record(0, psi0);

  WaveFn psi = psi0;
  for (int step = 1; step <= steps; ++step) {
    apply_slot_symbol(psi.values, layout, 0, half);
    apply_phase(psi, convolver.apply(psi), options.dt);
    apply_slot_symbol(psi.values, layout, 0, half);

    const bool last = step == steps;
    if (step % options.record_every == 0 || last) {
      if (!psi.all_finite()) throw InstabilityError("Hartree state became non-finite");
      const double drift = std::abs(psi.norm() - norm0);
      if (drift > options.norm_tolerance) {
        throw InstabilityError("Hartree norm drift " + std::to_string(drift) + " at t = " +
                               std::to_string(step * options.dt));
      }
      record(step, psi);
      if (!(traj.h1_norms.back() <= options.blowup_factor * h1_0)) {
        throw InstabilityError("Hartree H1 norm blow-up at t = " + std::to_string(step * options.dt));
      }
    }
  }
  return traj;
}

}  // namespace mf
