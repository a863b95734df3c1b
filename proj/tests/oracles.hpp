#pragma once

// Independent reference computations. Nothing here calls the library's FFT,
// convolution, contraction or trace-norm code paths.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "meanfield/density.hpp"
#include "meanfield/grid.hpp"
#include "meanfield/nbody.hpp"
#include "meanfield/potential.hpp"

namespace oracle {

using mf::cplx;
using Dense = Eigen::MatrixXcd;

inline std::vector<cplx> random_field(std::size_t size, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<cplx> out(size);
  for (auto& z : out) z = {g(rng), g(rng)};
  return out;
}

inline mf::WaveFn random_wave(const mf::Grid& grid, std::mt19937_64& rng) {
  mf::WaveFn psi(grid, random_field(grid.size(), rng));
  psi.normalize();
  return psi;
}

/// Signed integer momentum index of FFT slot j.
inline int signed_mode(int j, int n) { return j < n / 2 ? j : j - n; }

/// Unitary DFT by direct summation over all one-body lattice sites.
inline std::vector<cplx> direct_dft(const mf::Grid& grid, const std::vector<cplx>& f) {
  const std::size_t m = grid.size();
  const int n = grid.points();
  std::vector<cplx> out(m);
  for (std::size_t p = 0; p < m; ++p) {
    const auto kp = grid.axis_indices(p);
    cplx acc = 0.0;
    for (std::size_t x = 0; x < m; ++x) {
      const auto kx = grid.axis_indices(x);
      double phase = 0.0;
      for (int a = 0; a < grid.dim(); ++a) phase += static_cast<double>(kp[a]) * kx[a];
      acc += f[x] * std::polar(1.0, -2.0 * std::numbers::pi * phase / n);
    }
    out[p] = acc / std::sqrt(static_cast<double>(m));
  }
  return out;
}

/// Momentum squared of FFT slot p from the integer mode numbers.
inline double mode_p2(const mf::Grid& grid, std::size_t p) {
  const auto k = grid.axis_indices(p);
  double p2 = 0.0;
  for (int a = 0; a < grid.dim(); ++a) {
    const double q = 2.0 * std::numbers::pi * signed_mode(k[a], grid.points()) / grid.box();
    p2 += q * q;
  }
  return p2;
}

/// Unitary DFT matrix F with (F f)_p = M^{-1/2} sum_x e^{-2 pi i k_p.k_x / n} f_x.
inline Dense dft_matrix(const mf::Grid& grid) {
  const std::size_t m = grid.size();
  Dense f(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t p = 0; p < m; ++p) {
    const auto kp = grid.axis_indices(p);
    for (std::size_t x = 0; x < m; ++x) {
      const auto kx = grid.axis_indices(x);
      double phase = 0.0;
      for (int a = 0; a < grid.dim(); ++a) phase += static_cast<double>(kp[a]) * kx[a];
      f(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(x)) =
          std::polar(1.0 / std::sqrt(static_cast<double>(m)), -2.0 * std::numbers::pi * phase / grid.points());
    }
  }
  return f;
}

/// -1/2 Delta as a dense matrix in the orthonormal position basis.
inline Dense dense_kinetic(const mf::Grid& grid) {
  const Dense f = dft_matrix(grid);
  Eigen::VectorXcd d(f.rows());
  for (Eigen::Index p = 0; p < f.rows(); ++p) d(p) = 0.5 * mode_p2(grid, static_cast<std::size_t>(p));
  return f.adjoint() * d.asDiagonal() * f;
}

inline Dense kron(const Dense& a, const Dense& b) {
  Dense out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

/// Two-particle H = T (x) I + I (x) T + V(x1 - x2) / particles.
inline Dense dense_two_body_hamiltonian(const mf::Grid& grid, const mf::RealField& v, int particles) {
  const Dense t = dense_kinetic(grid);
  const Dense id = Dense::Identity(t.rows(), t.cols());
  Dense h = kron(t, id) + kron(id, t);
  const std::size_t m = grid.size();
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      const auto i = static_cast<Eigen::Index>(a * m + b);
      h(i, i) += v[grid.difference_index(a, b)] / particles;
    }
  }
  return h;
}

/// e^{-i t H} for Hermitian H.
inline Dense expm_hermitian(const Dense& h, double t) {
  Eigen::SelfAdjointEigenSolver<Dense> es(h);
  Eigen::VectorXcd phase(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) phase(i) = std::polar(1.0, -t * es.eigenvalues()(i));
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

/// Sum of singular values from the eigenvalues of A* A.
inline double trace_norm_via_gram(const Dense& a) {
  const Dense gram = a.adjoint() * a;
  Eigen::SelfAdjointEigenSolver<Dense> es(gram);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) s += std::sqrt(std::max(es.eigenvalues()(i), 0.0));
  return s;
}

/// h^d sum_z V(x - z) |psi(z)|^2 by direct double sum.
inline std::vector<double> direct_convolution(const mf::WaveFn& psi, const mf::RealField& v) {
  const auto& g = psi.grid;
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t x = 0; x < g.size(); ++x) {
    for (std::size_t z = 0; z < g.size(); ++z) out[x] += v[g.difference_index(x, z)] * std::norm(psi.values[z]);
    out[x] *= g.cell_volume();
  }
  return out;
}

/// Hartree energy by direct sums: kinetic from the direct DFT, potential
/// from the double sum.
inline double direct_energy(const mf::WaveFn& psi, const mf::RealField& v) {
  const auto& g = psi.grid;
  const auto hat = direct_dft(g, psi.values);
  double kin = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) kin += mode_p2(g, p) * std::norm(hat[p]);
  kin *= 0.5 * g.cell_volume();
  double pot = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x) {
    for (std::size_t z = 0; z < g.size(); ++z) {
      pot += v[g.difference_index(x, z)] * std::norm(psi.values[x]) * std::norm(psi.values[z]);
    }
  }
  return kin + 0.5 * g.cell_volume() * g.cell_volume() * pot;
}

/// gamma^(1) of a three-particle state by an explicit triple loop, in the
/// orthonormal basis.
inline Dense reduce_three_to_one(const mf::NBodyState& psi) {
  const std::size_t m = psi.grid.size();
  const double w = std::pow(psi.grid.cell_volume(), 3);
  Dense out = Dense::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < m; ++y) {
      cplx acc = 0.0;
      for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) {
          acc += psi.values[(x * m + a) * m + b] * std::conj(psi.values[(y * m + a) * m + b]);
        }
      }
      out(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = w * acc;
    }
  }
  return out;
}

/// Random symmetric three-particle state: the symmetrization of an i.i.d. tensor.
inline mf::NBodyState random_symmetric_three(const mf::Grid& grid, std::mt19937_64& rng) {
  const std::size_t m = grid.size();
  const auto raw = random_field(m * m * m, rng);
  mf::NBodyState psi(grid, 3);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      for (std::size_t c = 0; c < m; ++c) {
        auto at = [&](std::size_t i, std::size_t j, std::size_t k) { return raw[(i * m + j) * m + k]; };
        psi.values[(a * m + b) * m + c] =
            (at(a, b, c) + at(a, c, b) + at(b, a, c) + at(b, c, a) + at(c, a, b) + at(c, b, a)) / 6.0;
      }
    }
  }
  psi.normalize();
  return psi;
}

/// Gaussian e^{-x^2/(2 w^2)} evolved by i d_t psi = -1/2 psi'' on the line:
/// (w^2/(w^2 + i t))^{1/2} e^{-x^2/(2(w^2 + i t))}, summed over periodic images.
inline cplx free_gaussian(double x, double width, double t, double box, int images = 3) {
  const cplx s = width * width + cplx{0.0, t};
  cplx acc = 0.0;
  for (int k = -images; k <= images; ++k) {
    const double y = x + k * box;
    acc += std::exp(-y * y / (2.0 * s));
  }
  return std::sqrt(width * width / s) * acc;
}

}  // namespace oracle
