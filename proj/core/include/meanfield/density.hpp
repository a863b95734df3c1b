#pragma once

#include <Eigen/Dense>

#include "meanfield/fourier.hpp"
#include "meanfield/grid.hpp"
#include "meanfield/nbody.hpp"
#include "meanfield/potential.hpp"
#include "meanfield/symmetric.hpp"

namespace mf {

/// Operator on (grid)^k in the orthonormal lattice basis e_X = delta_X / h^{d/2}.
/// Row-major: entry (X, X') sits at X * M^k + X', with X row-major over the
/// k particle indices.
using OpMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Largest operator dimension handled by dense decompositions.
inline constexpr std::size_t kMaxOperatorDim = 4096;

/// k-particle density matrix. `matrix` is in the orthonormal basis; the
/// kernel gamma(X; X') equals matrix(X, X') / h^{dk}.
struct ReducedDensityMatrix {
  Grid grid;
  int order = 1;
  OpMatrix matrix;

  std::size_t dimension() const { return static_cast<std::size_t>(matrix.rows()); }
  cplx trace() const { return matrix.trace(); }
  cplx kernel(Eigen::Index row, Eigen::Index col) const;
  double hermiticity_defect() const;
  double min_eigenvalue() const;

  /// |psi><psi| (one-particle projector, unnormalized if psi is).
  static ReducedDensityMatrix projector(const WaveFn& psi);
};

/// (grid)^k dimension check shared by dense routines; throws MemoryGuardError.
std::size_t operator_dimension(const Grid& grid, int order);

/// gamma^(k)(X; X') = h^{d(N-k)} sum_rest Psi(X, rest) conj Psi(X', rest).
ReducedDensityMatrix reduce(const NBodyState& psi, int k);
/// Same contraction over sorted rest configurations weighted by their multiplicity.
ReducedDensityMatrix reduce(const SymmetricState& psi, int k);

/// Sum of singular values. Hermitian input (to 1e-12 relative) uses the
/// eigenvalue route sum |lambda_i|, which coincides with the SVD one.
double trace_norm(const OpMatrix& a);
double trace_distance(const ReducedDensityMatrix& a, const ReducedDensityMatrix& b);

OpMatrix kron(const OpMatrix& a, const OpMatrix& b);
ReducedDensityMatrix tensor_product(const ReducedDensityMatrix& a, const ReducedDensityMatrix& b);
ReducedDensityMatrix tensor_power(const ReducedDensityMatrix& a, int k);

/// B[i, i'] = sum_j A[(i, j), (i', j)] for A on C^{d1} (x) C^{d2}.
OpMatrix partial_trace(const OpMatrix& a, std::size_t keep_dim, std::size_t traced_dim);
/// Traces out the last particle.
ReducedDensityMatrix partial_trace(const ReducedDensityMatrix& gamma);

/// Left-multiplies by the multiplier `symbol` acting on particle `variable`.
void apply_left_symbol(OpMatrix& a, const Grid& grid, int order, int variable, const Symbol& symbol);
/// Right-multiplies by the multiplier `symbol` acting on particle `variable`.
void apply_right_symbol(OpMatrix& a, const Grid& grid, int order, int variable, const Symbol& symbol);

/// S_1..S_k gamma S_k..S_1 with S = (I - Delta)^{1/2}.
OpMatrix sobolev_weighted(const ReducedDensityMatrix& gamma);
/// ||gamma||_{H^{1,(k)}} = Tr |S_1..S_k gamma S_k..S_1|.
double sobolev_norm_k(const ReducedDensityMatrix& gamma);
/// Tr prod_j (I - Delta_j) gamma, computed on the momentum diagonal.
double sobolev_trace(const ReducedDensityMatrix& gamma);

/// Tr_{k+1}[V(x_ell - x_{k+1}) gamma^(k+1)]; `ell` is 1-based.
OpMatrix collision_trace(const ReducedDensityMatrix& gamma_next, int ell, const RealField& v);
/// Tr_{k+1}[gamma^(k+1) V(x'_ell - x_{k+1})].
OpMatrix collision_trace_right(const ReducedDensityMatrix& gamma_next, int ell, const RealField& v);
/// sum_ell (left - right): the kernel of
/// int (V(x_l - x_{k+1}) - V(x'_l - x_{k+1})) gamma^(k+1) dx_{k+1}.
OpMatrix collision_commutator(const ReducedDensityMatrix& gamma_next, const RealField& v);

}  // namespace mf
