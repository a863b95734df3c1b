#include "meanfield/density.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "meanfield/errors.hpp"

namespace mf {

std::size_t operator_dimension(const Grid& grid, int order) {
  if (order < 1) throw ConfigError("density matrix order must be >= 1");
  const std::size_t dim = checked_power(grid.size(), order);
  if (dim > kMaxOperatorDim) {
    throw MemoryGuardError("operator dimension " + std::to_string(dim) + " exceeds " +
                           std::to_string(kMaxOperatorDim));
  }
  return dim;
}

cplx ReducedDensityMatrix::kernel(Eigen::Index row, Eigen::Index col) const {
  return matrix(row, col) / std::pow(grid.cell_volume(), order);
}

double ReducedDensityMatrix::hermiticity_defect() const {
  return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
}

double ReducedDensityMatrix::min_eigenvalue() const {
  const OpMatrix h = 0.5 * (matrix + matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<OpMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

ReducedDensityMatrix ReducedDensityMatrix::projector(const WaveFn& psi) {
  const auto m = static_cast<Eigen::Index>(psi.grid.size());
  Eigen::Map<const Eigen::VectorXcd> v(psi.values.data(), m);
  // Orthonormal-basis coefficients are h^{d/2} psi(x).
  OpMatrix p = psi.grid.cell_volume() * (v * v.adjoint());
  return {psi.grid, 1, std::move(p)};
}

ReducedDensityMatrix reduce(const NBodyState& psi, int k) {
  if (k < 1 || k > psi.particles) throw ConfigError("reduce needs 1 <= k <= N");
  const auto dim = static_cast<Eigen::Index>(operator_dimension(psi.grid, k));
  const auto rest = static_cast<Eigen::Index>(psi.values.size()) / dim;
  using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> a(psi.values.data(), dim, rest);
  OpMatrix gamma = OpMatrix::Zero(dim, dim);
  gamma.selfadjointView<Eigen::Lower>().rankUpdate(a, std::pow(psi.grid.cell_volume(), psi.particles));
  gamma.triangularView<Eigen::StrictlyUpper>() = gamma.adjoint();
  return {psi.grid, k, std::move(gamma)};
}

ReducedDensityMatrix reduce(const SymmetricState& psi, int k) {
  if (k < 1 || k > psi.particles) throw ConfigError("reduce needs 1 <= k <= N");
  const std::size_t dim = operator_dimension(psi.grid, k);
  const std::size_t m = psi.grid.size();
  const MultisetIndex rest(m, psi.particles - k);
  const auto& top = psi.index();
  using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMat a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(rest.count()));
  std::vector<double> weight(rest.count());
  for (std::size_t r = 0; r < rest.count(); ++r) weight[r] = std::sqrt(rest.multiplicity(r));
  std::vector<std::uint32_t> x(static_cast<std::size_t>(k));
  std::vector<std::uint32_t> merged(static_cast<std::size_t>(psi.particles));
  for (std::size_t row = 0; row < dim; ++row) {
    std::size_t flat = row;
    for (int s = k - 1; s >= 0; --s) {
      x[static_cast<std::size_t>(s)] = static_cast<std::uint32_t>(flat % m);
      flat /= m;
    }
    std::sort(x.begin(), x.end());
    for (std::size_t r = 0; r < rest.count(); ++r) {
      std::merge(x.begin(), x.end(), rest.tuple(r).begin(), rest.tuple(r).end(), merged.begin());
      a(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(r)) = weight[r] * psi.values[top.rank(merged)];
    }
  }
  const auto n = static_cast<Eigen::Index>(dim);
  OpMatrix gamma = OpMatrix::Zero(n, n);
  gamma.selfadjointView<Eigen::Lower>().rankUpdate(a, std::pow(psi.grid.cell_volume(), psi.particles));
  gamma.triangularView<Eigen::StrictlyUpper>() = gamma.adjoint();
  return {psi.grid, k, std::move(gamma)};
}

double trace_norm(const OpMatrix& a) {
  if (a.rows() != a.cols()) throw ConfigError("trace norm of a non-square operator");
  if (static_cast<std::size_t>(a.rows()) > kMaxOperatorDim) {
    throw MemoryGuardError("operator too large for a dense trace norm");
  }
  if (a.size() == 0) return 0.0;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  const double skew = (a - a.adjoint()).cwiseAbs().maxCoeff();
  if (skew <= 1e-12 * scale) {
    const OpMatrix h = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<OpMatrix> es(h, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed in trace_norm");
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(a);
  if (svd.info() != Eigen::Success) throw std::runtime_error("SVD failed in trace_norm");
  return svd.singularValues().sum();
}

double trace_distance(const ReducedDensityMatrix& a, const ReducedDensityMatrix& b) {
  if (!(a.grid == b.grid) || a.order != b.order) throw ConfigError("density matrices differ in shape");
  return trace_norm(a.matrix - b.matrix);
}

OpMatrix kron(const OpMatrix& a, const OpMatrix& b) {
  OpMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ReducedDensityMatrix tensor_product(const ReducedDensityMatrix& a, const ReducedDensityMatrix& b) {
  if (!(a.grid == b.grid)) throw ConfigError("tensor product of density matrices on different grids");
  operator_dimension(a.grid, a.order + b.order);
  return {a.grid, a.order + b.order, kron(a.matrix, b.matrix)};
}

ReducedDensityMatrix tensor_power(const ReducedDensityMatrix& a, int k) {
  if (k < 1) throw ConfigError("tensor power needs k >= 1");
  ReducedDensityMatrix out = a;
  for (int i = 1; i < k; ++i) out = tensor_product(out, a);
  return out;
}

OpMatrix partial_trace(const OpMatrix& a, std::size_t keep_dim, std::size_t traced_dim) {
  const auto keep = static_cast<Eigen::Index>(keep_dim);
  const auto traced = static_cast<Eigen::Index>(traced_dim);
  if (a.rows() != keep * traced || a.cols() != keep * traced) {
    throw ConfigError("partial trace dimensions do not match the operator");
  }
  OpMatrix b = OpMatrix::Zero(keep, keep);
  for (Eigen::Index i = 0; i < keep; ++i) {
    for (Eigen::Index ip = 0; ip < keep; ++ip) {
      cplx s{0.0, 0.0};
      for (Eigen::Index j = 0; j < traced; ++j) s += a(i * traced + j, ip * traced + j);
      b(i, ip) = s;
    }
  }
  return b;
}

ReducedDensityMatrix partial_trace(const ReducedDensityMatrix& gamma) {
  if (gamma.order < 2) throw ConfigError("partial trace needs order >= 2");
  const std::size_t m = gamma.grid.size();
  const std::size_t keep = static_cast<std::size_t>(gamma.matrix.rows()) / m;
  return {gamma.grid, gamma.order - 1, partial_trace(gamma.matrix, keep, m)};
}

namespace {

Symbol reflected(const Grid& grid, const Symbol& symbol) {
  // s(-p): negate every axis index modulo n.
  Symbol out(symbol.size());
  for (std::size_t q = 0; q < symbol.size(); ++q) {
    auto idx = grid.axis_indices(q);
    for (int a = 0; a < grid.dim(); ++a) idx[a] = -idx[a];
    out[q] = symbol[grid.flat_index(idx)];
  }
  return out;
}

}  // namespace

void apply_left_symbol(OpMatrix& a, const Grid& grid, int order, int variable, const Symbol& symbol) {
  if (variable < 0 || variable >= order) throw ConfigError("variable index out of range");
  const TensorLayout layout{grid, 2 * order};
  apply_slot_symbol(std::span<cplx>(a.data(), static_cast<std::size_t>(a.size())), layout, variable, symbol);
}

void apply_right_symbol(OpMatrix& a, const Grid& grid, int order, int variable, const Symbol& symbol) {
  if (variable < 0 || variable >= order) throw ConfigError("variable index out of range");
  // (A T)(X, .) = T^t applied to the row vector; T^t is the multiplier s(-p).
  const TensorLayout layout{grid, 2 * order};
  apply_slot_symbol(std::span<cplx>(a.data(), static_cast<std::size_t>(a.size())), layout,
                    order + variable, reflected(grid, symbol));
}

OpMatrix sobolev_weighted(const ReducedDensityMatrix& gamma) {
  OpMatrix a = gamma.matrix;
  const Symbol s = bessel_symbol(gamma.grid, 1.0);
  for (int j = 0; j < gamma.order; ++j) {
    apply_left_symbol(a, gamma.grid, gamma.order, j, s);
    apply_right_symbol(a, gamma.grid, gamma.order, j, s);
  }
  return a;
}

double sobolev_norm_k(const ReducedDensityMatrix& gamma) { return trace_norm(sobolev_weighted(gamma)); }

double sobolev_trace(const ReducedDensityMatrix& gamma) {
  // Diagonal of F gamma F^dagger: transform rows forward and columns with the
  // conjugate transform, which is the reflected forward transform.
  OpMatrix a = gamma.matrix;
  const auto m = gamma.grid.size();
  const TensorLayout layout{gamma.grid, 2 * gamma.order};
  std::span<cplx> data(a.data(), static_cast<std::size_t>(a.size()));
  for (int j = 0; j < gamma.order; ++j) {
    fft_slot(data, layout, j, FftDirection::forward);
    fft_slot(data, layout, gamma.order + j, FftDirection::backward);
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double weight = 1.0;
    std::size_t rest = static_cast<std::size_t>(i);
    for (int j = 0; j < gamma.order; ++j) {
      weight *= 1.0 + gamma.grid.momentum_squared(rest % m);
      rest /= m;
    }
    s += weight * a(i, i).real();
  }
  return s;
}

namespace {

OpMatrix collision_side(const ReducedDensityMatrix& g, int ell, const RealField& v, bool left) {
  if (g.order < 2) throw ConfigError("collision term needs gamma of order >= 2");
  const int k = g.order - 1;
  if (ell < 1 || ell > k) throw ConfigError("collision index ell out of range");
  if (v.size() != g.grid.size()) throw ConfigError("pair potential size does not match grid");
  const std::size_t m = g.grid.size();
  const auto keep = static_cast<Eigen::Index>(checked_power(m, k));
  const std::size_t stride = checked_power(m, k - ell);
  OpMatrix b = OpMatrix::Zero(keep, keep);
  for (Eigen::Index x = 0; x < keep; ++x) {
    for (Eigen::Index xp = 0; xp < keep; ++xp) {
      const std::size_t site = ((left ? static_cast<std::size_t>(x) : static_cast<std::size_t>(xp)) / stride) % m;
      cplx s{0.0, 0.0};
      for (std::size_t j = 0; j < m; ++j) {
        s += v[g.grid.difference_index(site, j)] *
             g.matrix(x * static_cast<Eigen::Index>(m) + static_cast<Eigen::Index>(j),
                      xp * static_cast<Eigen::Index>(m) + static_cast<Eigen::Index>(j));
      }
      b(x, xp) = s;
    }
  }
  return b;
}

}  // namespace

OpMatrix collision_trace(const ReducedDensityMatrix& gamma_next, int ell, const RealField& v) {
  return collision_side(gamma_next, ell, v, true);
}

OpMatrix collision_trace_right(const ReducedDensityMatrix& gamma_next, int ell, const RealField& v) {
  return collision_side(gamma_next, ell, v, false);
}

OpMatrix collision_commutator(const ReducedDensityMatrix& gamma_next, const RealField& v) {
  const int k = gamma_next.order - 1;
  OpMatrix c = collision_trace(gamma_next, 1, v) - collision_trace_right(gamma_next, 1, v);
  for (int ell = 2; ell <= k; ++ell) {
    c += collision_trace(gamma_next, ell, v) - collision_trace_right(gamma_next, ell, v);
  }
  return c;
}

}  // namespace mf
