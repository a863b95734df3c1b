#pragma once

#include <vector>

#include "meanfield/fourier.hpp"
#include "meanfield/grid.hpp"
#include "meanfield/potential.hpp"

namespace mf {

/// Self-consistent potential (V * |psi|^2)(x) = h^d sum_z V(x - z) |psi(z)|^2.
/// Throws ConfigError if the DFT result carries an imaginary residue > 1e-9.
RealField mean_field(const WaveFn& psi, const RealField& pair_potential);

/// E = 1/2 ||grad psi||^2 + 1/2 h^{2d} sum_{x,z} V(x - z) |psi(x)|^2 |psi(z)|^2.
double hartree_energy(const WaveFn& psi, const RealField& pair_potential);

/// One Strang step for i d_t psi = -1/2 Delta psi + (V * |psi|^2) psi:
/// half free step, potential phase from the half-stepped density, half free step.
WaveFn hartree_step(const WaveFn& psi, double dt, const RealField& pair_potential);

/// Heat-kernel smoothing e^{kappa Delta} psi.
WaveFn smooth_initial(const WaveFn& psi, double kappa);

struct HartreeOptions {
  double final_time = 1.0;
  double dt = 1e-3;
  int record_every = 10;
  /// Abort when | ||psi_t|| - ||psi_0|| | exceeds this.
  double norm_tolerance = 1e-6;
  /// Abort when ||psi_t||_{H^1} exceeds this multiple of the initial value.
  double blowup_factor = 1e6;
};

struct HartreeTrajectory {
  std::vector<double> times;
  std::vector<WaveFn> states;
  std::vector<double> norms;
  std::vector<double> energies;
  std::vector<double> h1_norms;
};

/// Integrates to `final_time`, recording step 0, every `record_every` steps
/// and the last step. Throws InstabilityError on norm drift or blow-up.
HartreeTrajectory evolve_hartree(const WaveFn& psi0, const RealField& pair_potential,
                                 const HartreeOptions& options);

/// Number of steps dt that make up T; throws ConfigError unless T/dt is an
/// integer to within 1e-9 relative.
int step_count(double final_time, double dt);

}  // namespace mf
