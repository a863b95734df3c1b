#include "meanfield/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "meanfield/errors.hpp"

namespace mf {

std::size_t checked_power(std::size_t base, int exponent) {
  std::size_t result = 1;
  for (int i = 0; i < exponent; ++i) {
    if (base != 0 && result > std::numeric_limits<std::size_t>::max() / base) {
      throw MemoryGuardError("size overflow computing " + std::to_string(base) + "^" +
                             std::to_string(exponent));
    }
    result *= base;
  }
  return result;
}

Grid::Grid(int dim, int points, double box)
    : dim_(dim), points_(points), box_(box), size_(checked_power(points, dim)) {}

Grid Grid::make(int dim, int points, double box) {
  if (dim != 1 && dim != 3) {
    throw ConfigError("grid dimension must be 1 or 3, got " + std::to_string(dim));
  }
  if (points < 4 || (points & (points - 1)) != 0) {
    throw ConfigError("points per axis must be a power of two >= 4, got " +
                      std::to_string(points));
  }
  if (!(box > 0.0) || !std::isfinite(box)) {
    throw ConfigError("box length must be positive and finite");
  }
  return Grid(dim, points, box);
}

double Grid::cell_volume() const { return std::pow(spacing(), dim_); }

double Grid::axis_momentum(int j) const {
  const int k = j < points_ / 2 ? j : j - points_;
  return 2.0 * std::numbers::pi * k / box_;
}

double Grid::axis_coordinate(int i) const { return -0.5 * box_ + i * spacing(); }

std::vector<double> Grid::momentum_lattice() const {
  std::vector<double> p;
  p.reserve(points_);
  for (int k = -points_ / 2; k < points_ / 2; ++k) p.push_back(2.0 * std::numbers::pi * k / box_);
  return p;
}

std::array<int, 3> Grid::axis_indices(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % points_);
    flat /= points_;
  }
  return idx;
}

std::size_t Grid::flat_index(const std::array<int, 3>& idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) {
    const int i = ((idx[a] % points_) + points_) % points_;
    flat = flat * points_ + static_cast<std::size_t>(i);
  }
  return flat;
}

Momentum Grid::momentum(std::size_t flat) const {
  const auto idx = axis_indices(flat);
  Momentum p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) p[a] = axis_momentum(idx[a]);
  return p;
}

double Grid::momentum_squared(std::size_t flat) const {
  const auto p = momentum(flat);
  return p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
}

std::array<double, 3> Grid::position(std::size_t flat) const {
  const auto idx = axis_indices(flat);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[a] = axis_coordinate(idx[a]);
  return x;
}

std::size_t Grid::difference_index(std::size_t a, std::size_t b) const {
  const auto ia = axis_indices(a);
  const auto ib = axis_indices(b);
  std::array<int, 3> d{0, 0, 0};
  for (int k = 0; k < dim_; ++k) d[k] = ia[k] - ib[k];
  return flat_index(d);
}

double Grid::displacement_radius(std::size_t disp) const {
  const auto idx = axis_indices(disp);
  double r2 = 0.0;
  for (int a = 0; a < dim_; ++a) {
    const int k = idx[a] <= points_ / 2 ? idx[a] : idx[a] - points_;
    const double x = k * spacing();
    r2 += x * x;
  }
  return std::sqrt(r2);
}

WaveFn::WaveFn(const Grid& g) : grid(g), values(g.size(), cplx{0.0, 0.0}) {}

WaveFn::WaveFn(const Grid& g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw ConfigError("wave function size does not match grid");
}

double WaveFn::norm() const {
  double s = 0.0;
  for (const auto& z : values) s += std::norm(z);
  return std::sqrt(grid.cell_volume() * s);
}

void WaveFn::normalize() {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw ConfigError("cannot normalize a zero or non-finite field");
  for (auto& z : values) z /= n;
}

bool WaveFn::all_finite() const {
  return std::all_of(values.begin(), values.end(),
                     [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

WaveFn WaveFn::gaussian(const Grid& g, const std::array<double, 3>& center, double width,
                        const Momentum& boost) {
  if (!(width > 0.0)) throw ConfigError("gaussian width must be positive");
  WaveFn psi(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.position(i);
    double r2 = 0.0;
    double phase = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      const double dx = x[a] - center[a];
      r2 += dx * dx;
      phase += boost[a] * x[a];
    }
    psi.values[i] = std::exp(-0.5 * r2 / (width * width)) * std::polar(1.0, phase);
  }
  psi.normalize();
  return psi;
}

WaveFn WaveFn::plane_wave(const Grid& g, const std::array<int, 3>& mode) {
  WaveFn psi(g);
  const double amp = 1.0 / std::sqrt(std::pow(g.box(), g.dim()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto idx = g.axis_indices(i);
    double phase = 0.0;
    // Phase from integer indices keeps the mode exactly periodic.
    for (int a = 0; a < g.dim(); ++a) {
      phase += 2.0 * std::numbers::pi * static_cast<double>(mode[a]) * idx[a] / g.points();
    }
    psi.values[i] = std::polar(amp, phase);
  }
  return psi;
}

WaveFn WaveFn::constant(const Grid& g) {
  return WaveFn(g, std::vector<cplx>(g.size(), cplx{1.0 / std::sqrt(std::pow(g.box(), g.dim())), 0.0}));
}

cplx inner_product(const WaveFn& a, const WaveFn& b) {
  if (!(a.grid == b.grid)) throw ConfigError("inner product of fields on different grids");
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < a.values.size(); ++i) s += std::conj(a.values[i]) * b.values[i];
  return a.grid.cell_volume() * s;
}

double distance(const WaveFn& a, const WaveFn& b) {
  if (!(a.grid == b.grid)) throw ConfigError("distance of fields on different grids");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += std::norm(a.values[i] - b.values[i]);
  return std::sqrt(a.grid.cell_volume() * s);
}

}  // namespace mf
