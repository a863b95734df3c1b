#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace mf {

using cplx = std::complex<double>;
using Momentum = std::array<double, 3>;

/// Default cap on complex entries of N-body tensors (2^27).
inline constexpr std::size_t kDefaultMaxEntries = std::size_t{1} << 27;

/// Periodic lattice of n points per axis on a box [-L/2, L/2)^d, d in {1, 3}.
///
/// Flat one-body indices are row-major over the d axes. Position index i on
/// an axis sits at x_i = -L/2 + i h. Momentum index j is in FFT order and
/// carries p_j = 2 pi k / L with k = j for j < n/2 and k = j - n otherwise,
/// which spans the lattice {-n/2, ..., n/2 - 1} * 2 pi / L.
class Grid {
 public:
  /// Throws ConfigError unless d in {1,3}, n >= 4 is a power of two, L > 0.
  static Grid make(int dim, int points, double box);

  int dim() const { return dim_; }
  int points() const { return points_; }
  double box() const { return box_; }
  double spacing() const { return box_ / points_; }
  double cell_volume() const;
  /// One-body dimension M = n^d.
  std::size_t size() const { return size_; }

  double axis_momentum(int j) const;
  double axis_coordinate(int i) const;
  /// Sorted momentum lattice p_j, j = -n/2 .. n/2-1.
  std::vector<double> momentum_lattice() const;

  std::array<int, 3> axis_indices(std::size_t flat) const;
  std::size_t flat_index(const std::array<int, 3>& idx) const;

  Momentum momentum(std::size_t flat) const;
  double momentum_squared(std::size_t flat) const;
  std::array<double, 3> position(std::size_t flat) const;

  /// Flat index of the lattice displacement a - b (componentwise mod n).
  std::size_t difference_index(std::size_t a, std::size_t b) const;
  /// Minimal-image length of the displacement with flat index `disp`.
  double displacement_radius(std::size_t disp) const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Grid(int dim, int points, double box);

  int dim_ = 1;
  int points_ = 4;
  double box_ = 1.0;
  std::size_t size_ = 4;
};

/// One-body complex field on a grid with ||psi||^2 = h^d sum |psi(x)|^2.
struct WaveFn {
  Grid grid;
  std::vector<cplx> values;

  explicit WaveFn(const Grid& g);
  WaveFn(const Grid& g, std::vector<cplx> v);

  double norm() const;
  void normalize();
  bool all_finite() const;

  static WaveFn gaussian(const Grid& g, const std::array<double, 3>& center, double width,
                         const Momentum& boost = {0.0, 0.0, 0.0});
  /// e^{i p.x} / sqrt(L^d) for the lattice mode with signed integer indices `mode`.
  static WaveFn plane_wave(const Grid& g, const std::array<int, 3>& mode);
  static WaveFn constant(const Grid& g);
};

/// h^d sum conj(a) b.
cplx inner_product(const WaveFn& a, const WaveFn& b);
double distance(const WaveFn& a, const WaveFn& b);

/// Integer power n^e with overflow check (throws MemoryGuardError).
std::size_t checked_power(std::size_t base, int exponent);

}  // namespace mf
