#pragma once

#include <functional>
#include <vector>

#include "meanfield/fourier.hpp"
#include "meanfield/grid.hpp"
#include "meanfield/potential.hpp"

namespace mf {

/// Bosonic N-body wave function on (grid)^N with ||Psi||^2 = h^{dN} sum |Psi|^2.
/// Particle slot 0 is the slowest index.
struct NBodyState {
  Grid grid;
  int particles = 1;
  std::vector<cplx> values;

  /// Zero state; throws MemoryGuardError when M^N exceeds `max_entries`.
  NBodyState(const Grid& g, int n_particles, std::size_t max_entries = kDefaultMaxEntries);

  TensorLayout layout() const { return {grid, particles}; }
  double norm() const;
  void normalize();
  bool all_finite() const;
};

/// Psi(x_1..x_N) = prod_j psi(x_j). With `require_normalized` the factor
/// must have unit norm to 1e-10.
NBodyState product_state(const WaveFn& psi, int particles,
                         std::size_t max_entries = kDefaultMaxEntries,
                         bool require_normalized = true);

enum class PairMode { full, cutoff };

/// H = -1/2 sum_l Delta_l + (1/N) sum_{l<j} V_pair(x_l - x_j), with the
/// pair interaction tabulated once as a real tensor of the state's shape.
class NBodyHamiltonian {
 public:
  NBodyHamiltonian(const Grid& grid, int particles, RealField pair_potential,
                   std::size_t max_entries = kDefaultMaxEntries);
  /// Uses V for `full` and V_far for `cutoff`.
  NBodyHamiltonian(const PotentialSplit& split, PairMode mode,
                   std::size_t max_entries = kDefaultMaxEntries);

  const Grid& grid() const { return grid_; }
  int particles() const { return particles_; }
  const RealField& pair_potential() const { return pair_; }
  /// (1/N) sum_{l<j} V_pair(x_l - x_j) at every configuration.
  const std::vector<double>& interaction() const { return interaction_; }

  /// <Psi, H Psi> (not divided by the norm).
  double energy(const NBodyState& psi) const;

 private:
  Grid grid_;
  int particles_;
  RealField pair_;
  std::vector<double> interaction_;
};

/// Strang step: half free step on every coordinate, the diagonal phase
/// e^{-i dt U}, half free step. Unitary up to roundoff.
NBodyState nbody_step(const NBodyState& psi, double dt, const NBodyHamiltonian& ham);

struct NBodyOptions {
  double final_time = 1.0;
  double dt = 1e-3;
  int record_every = 10;
  double norm_tolerance = 1e-6;
};

struct NBodyFrame {
  double time;
  NBodyState state;
};

/// Streams recorded frames (step 0, every `record_every` steps, last step)
/// to `observer`; consecutive half free steps are fused. T = 0 records only
/// the initial state.
void evolve_nbody(const NBodyState& psi0, const NBodyHamiltonian& ham, const NBodyOptions& options,
                  const std::function<void(double, const NBodyState&)>& observer);

std::vector<NBodyFrame> evolve_nbody(const NBodyState& psi0, const NBodyHamiltonian& ham,
                                     const NBodyOptions& options);

/// <Psi, L^k Psi> with L = (1/N) sum_l (I - Delta_l), k in {1, 2}.
double expectation_L_pow(const NBodyState& psi, int k);

double state_distance(const NBodyState& a, const NBodyState& b);

/// ||W Psi|| for W = (1/N) sum_{l<j} V_near(x_l - x_j).
double remainder_interaction_norm(const NBodyState& psi, const RealField& near_potential);

/// max over transpositions (l j) of ||Psi - Psi o (l j)||.
double symmetry_defect(const NBodyState& psi);

}  // namespace mf
