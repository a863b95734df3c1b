#pragma once

#include <functional>
#include <span>
#include <vector>

#include "meanfield/grid.hpp"

namespace mf {

enum class FftDirection { forward, backward };

/// Field over `slots` copies of the one-body grid. Slot 0 is the slowest
/// index; axis a of the tensor is axis (a mod d) of slot (a / d).
struct TensorLayout {
  Grid grid;
  int slots = 1;

  std::size_t size() const;
  int axes() const { return slots * grid.dim(); }
  std::size_t slot_stride(int slot) const;
  std::size_t slot_index(std::size_t flat, int slot) const;
};

/// Unitary DFT (1/sqrt(n) per axis) along one tensor axis, in place.
void fft_axis(std::span<cplx> data, const TensorLayout& layout, int axis, FftDirection dir);
/// Unitary one-body DFT applied to `count` consecutive one-body fields.
/// Runs on the calling thread.
void fft_fields(std::span<cplx> data, const Grid& grid, std::size_t count, FftDirection dir);
/// As fft_fields without the 1/sqrt(M) factor (sum over e^{-+2 pi i k.x/n}).
void fft_fields_unscaled(std::span<cplx> data, const Grid& grid, std::size_t count, FftDirection dir);
void fft_slot(std::span<cplx> data, const TensorLayout& layout, int slot, FftDirection dir);
void fft_all(std::span<cplx> data, const TensorLayout& layout, FftDirection dir);

/// Fourier symbol sampled on the one-body momentum lattice (FFT order).
using Symbol = std::vector<cplx>;

Symbol make_symbol(const Grid& grid, const std::function<cplx(const Momentum&)>& m);
Symbol radial_symbol(const Grid& grid, const std::function<cplx(double p2)>& m);

/// e^{-i t p^2 / 2}, the free propagator e^{i t Delta / 2}.
Symbol free_propagator_symbol(const Grid& grid, double t);
/// e^{-kappa p^2}, the heat semigroup e^{kappa Delta}.
Symbol heat_symbol(const Grid& grid, double kappa);
/// (1 + p^2)^{s/2}; s = 1 gives S = (I - Delta)^{1/2}, s = -1 its inverse.
Symbol bessel_symbol(const Grid& grid, double s);

/// Applies the symbol to the given slot of a tensor (transform, multiply,
/// transform back). Throws ConfigError on non-finite symbol values.
void apply_slot_symbol(std::span<cplx> data, const TensorLayout& layout, int slot,
                       const Symbol& symbol);

/// Applies a per-axis factor f[j] (FFT-ordered, length n) along one axis.
/// Symbols that factor over axes, like the free propagator, are cheapest
/// applied this way.
void apply_axis_factor(std::span<cplx> data, const TensorLayout& layout, int axis,
                       std::span<const cplx> factor);

WaveFn apply_multiplier(const WaveFn& psi, const Symbol& symbol);
WaveFn apply_multiplier(const WaveFn& psi, const std::function<cplx(const Momentum&)>& m);

/// Unitary DFT of psi (values indexed by momentum flat index).
std::vector<cplx> to_momentum(const WaveFn& psi);

/// sqrt(h^d sum_p (1 + p^2)^order |psi_hat(p)|^2).
double sobolev_norm(const WaveFn& psi, int order);
inline double h1_norm(const WaveFn& psi) { return sobolev_norm(psi, 1); }
inline double h2_norm(const WaveFn& psi) { return sobolev_norm(psi, 2); }
/// ||Delta psi|| = sqrt(h^d sum_p p^4 |psi_hat(p)|^2).
double laplacian_norm(const WaveFn& psi);

}  // namespace mf
