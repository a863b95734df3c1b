#include "meanfield/potential.hpp"

#include <algorithm>
#include <cmath>

#include "meanfield/errors.hpp"

namespace mf {

double cutoff_profile(double r) {
  const double s = std::clamp(r - 1.0, 0.0, 1.0);
  return s * s * (3.0 - 2.0 * s);
}

RealField coulomb_potential(const Grid& grid, int sign, double mu, double softening, CoreMode core) {
  if (sign != 1 && sign != -1) throw ConfigError("potential sign must be +1 or -1");
  if (!(mu > 0.0)) throw ConfigError("coupling mu must be positive");
  if (!(softening >= 0.0)) throw ConfigError("softening must be non-negative");
  if (core == CoreMode::capped && grid.dim() == 1) {
    throw ConfigError("the capped Coulomb core is only available in three dimensions");
  }
  if (core == CoreMode::soft && softening == 0.0) {
    throw ConfigError("soft-core potential needs a > 0 (use the capped core for a = 0)");
  }
  RealField v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid.displacement_radius(i);
    double value = 0.0;
    if (core == CoreMode::soft) {
      value = mu / std::sqrt(r * r + softening * softening);
    } else {
      value = mu / (r > 0.0 ? r : 0.5 * grid.spacing());
    }
    v[i] = sign * value;
  }
  return v;
}

PotentialSplit build_potential_split(const Grid& grid, const PotentialParams& params) {
  if (!(params.eps > 0.0)) throw ConfigError("cutoff eps must be positive");
  if (params.particles < 1) throw ConfigError("particle count must be >= 1");
  PotentialSplit split{grid, params, 0.0, {}, {}, {}};
  split.softening = params.softening < 0.0 ? grid.spacing() : params.softening;
  if (params.core == CoreMode::capped) split.softening = 0.0;
  split.full = coulomb_potential(grid, params.sign, params.mu, split.softening, params.core);
  split.far.resize(grid.size());
  split.near.resize(grid.size());
  const double scale = std::sqrt(static_cast<double>(params.particles)) / params.eps;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    split.far[i] = cutoff_profile(scale * grid.displacement_radius(i)) * split.full[i];
    split.near[i] = split.full[i] - split.far[i];
  }
  return split;
}

RealField constant_field(const Grid& grid, double value) { return RealField(grid.size(), value); }

}  // namespace mf
