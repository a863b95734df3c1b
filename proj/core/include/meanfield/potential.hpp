#pragma once

#include <vector>

#include "meanfield/grid.hpp"

namespace mf {

/// Real field on the one-body lattice. Pair potentials are indexed by the
/// flat index of the lattice displacement x - y.
using RealField = std::vector<double>;

/// How the r = 0 Coulomb singularity is regularized.
enum class CoreMode {
  soft,    ///< +-mu / sqrt(r^2 + a^2)
  capped,  ///< +-mu / r, with the r = 0 sample replaced by +-mu / (h/2)
};

struct PotentialParams {
  int sign = +1;
  double mu = 1.0;
  double eps = 1.0;
  int particles = 1;
  /// Soft-core length a; negative selects the default a = h.
  double softening = -1.0;
  CoreMode core = CoreMode::soft;
};

/// Coulomb-type pair potential with its N-dependent cutoff split
/// V = V_far + V_near, V_far(x) = theta(sqrt(N) |x| / eps) V(x).
///
/// V_far vanishes where sqrt(N)|x|/eps <= 1 and equals V where it is >= 2;
/// V_near = V - V_far is the short-range remainder.
struct PotentialSplit {
  Grid grid;
  PotentialParams params;
  double softening = 0.0;  ///< resolved a
  RealField full;
  RealField far;
  RealField near;
};

/// Smoothstep cutoff: 0 on [0,1], 3s^2 - 2s^3 with s = r - 1 on [1,2], 1 beyond.
double cutoff_profile(double r);

/// +-mu / sqrt(r^2 + a^2) (or the capped 1/r) on minimal-image displacements.
RealField coulomb_potential(const Grid& grid, int sign, double mu, double softening, CoreMode core);

PotentialSplit build_potential_split(const Grid& grid, const PotentialParams& params);

RealField constant_field(const Grid& grid, double value);

}  // namespace mf
