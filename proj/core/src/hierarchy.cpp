#include "meanfield/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "meanfield/errors.hpp"

namespace mf {

ReducedDensityMatrix free_flow(const ReducedDensityMatrix& gamma, double t) {
  ReducedDensityMatrix out = gamma;
  if (t == 0.0) return out;
  const Symbol u = free_propagator_symbol(gamma.grid, t);
  Symbol u_adj(u.size());
  for (std::size_t q = 0; q < u.size(); ++q) u_adj[q] = std::conj(u[q]);
  for (int j = 0; j < gamma.order; ++j) {
    apply_left_symbol(out.matrix, gamma.grid, gamma.order, j, u);
    apply_right_symbol(out.matrix, gamma.grid, gamma.order, j, u_adj);
  }
  return out;
}

OpMatrix dense_hamiltonian(const Grid& grid, int k, int particles, const RealField& v) {
  if (k < 1 || k > 2) throw ConfigError("dense k-body Hamiltonian supports k = 1 or 2");
  if (particles < k) throw ConfigError("particle count must be >= k");
  if (v.size() != grid.size()) throw ConfigError("pair potential size does not match grid");
  const std::size_t dim = operator_dimension(grid, k);
  const auto m = static_cast<Eigen::Index>(grid.size());
  const int n = grid.points();

  // K(x, y) = (1/M) sum_q (p_q^2 / 2) e^{2 pi i q.(x - y) / n}.
  Eigen::MatrixXcd kin(m, m);
  for (Eigen::Index x = 0; x < m; ++x) {
    const auto ix = grid.axis_indices(static_cast<std::size_t>(x));
    for (Eigen::Index y = 0; y < m; ++y) {
      const auto iy = grid.axis_indices(static_cast<std::size_t>(y));
      cplx s{0.0, 0.0};
      for (Eigen::Index q = 0; q < m; ++q) {
        const auto iq = grid.axis_indices(static_cast<std::size_t>(q));
        double phase = 0.0;
        for (int a = 0; a < grid.dim(); ++a) {
          phase += 2.0 * std::numbers::pi * iq[a] * (ix[a] - iy[a]) / n;
        }
        s += 0.5 * grid.momentum_squared(static_cast<std::size_t>(q)) * std::polar(1.0, phase);
      }
      kin(x, y) = s / static_cast<double>(m);
    }
  }

  OpMatrix h = OpMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  if (k == 1) {
    h = kin;
    return h;
  }
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(m, m);
  h = kron(OpMatrix(kin), OpMatrix(id)) + kron(OpMatrix(id), OpMatrix(kin));
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      h(a * m + b, a * m + b) +=
          v[grid.difference_index(static_cast<std::size_t>(a), static_cast<std::size_t>(b))] / particles;
    }
  }
  return h;
}

KBodyPropagator::KBodyPropagator(const Grid& grid, int k, int particles, const RealField& v)
    : grid_(grid), k_(k) {
  const OpMatrix h = dense_hamiltonian(grid, k, particles, v);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(0.5 * (h + h.adjoint())));
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed for H_N^(k)");
  vectors_ = es.eigenvectors();
  values_ = es.eigenvalues();
}

OpMatrix KBodyPropagator::unitary(double t) const {
  Eigen::VectorXcd phases(values_.size());
  for (Eigen::Index i = 0; i < values_.size(); ++i) phases(i) = std::polar(1.0, -t * values_(i));
  return vectors_ * phases.asDiagonal() * vectors_.adjoint();
}

OpMatrix KBodyPropagator::conjugate(const OpMatrix& a, double t) const {
  if (t == 0.0) return a;
  const OpMatrix u = unitary(t);
  return u * a * u.adjoint();
}

ReducedDensityMatrix KBodyPropagator::apply(const ReducedDensityMatrix& gamma, double t) const {
  if (gamma.order != k_ || !(gamma.grid == grid_)) throw ConfigError("density matrix does not match propagator");
  return {gamma.grid, gamma.order, conjugate(gamma.matrix, t)};
}

ReducedDensityMatrix interacting_flow(const ReducedDensityMatrix& gamma, double t, const RealField& v,
                                      int particles) {
  if (gamma.order > 2) throw ConfigError("interacting flow supports k <= 2");
  return KBodyPropagator(gamma.grid, gamma.order, particles, v).apply(gamma, t);
}

std::vector<double> quadrature_weights(int intervals, double step, Quadrature rule, int recorded) {
  if (intervals < 0) throw ConfigError("negative interval count");
  if (rule == Quadrature::simpson && intervals == 1 && recorded >= 3) {
    return {5.0 * step / 12.0, 8.0 * step / 12.0, -step / 12.0};
  }
  std::vector<double> w(static_cast<std::size_t>(intervals) + 1, 0.0);
  if (intervals == 0) return w;
  auto trapezoid = [&](int from, int to) {
    for (int i = from; i < to; ++i) {
      w[static_cast<std::size_t>(i)] += 0.5 * step;
      w[static_cast<std::size_t>(i) + 1] += 0.5 * step;
    }
  };
  if (rule == Quadrature::trapezoid || intervals == 1) {
    trapezoid(0, intervals);
    return w;
  }
  int simpson_end = intervals % 2 == 0 ? intervals : intervals - 3;
  for (int i = 0; i < simpson_end; i += 2) {
    w[static_cast<std::size_t>(i)] += step / 3.0;
    w[static_cast<std::size_t>(i) + 1] += 4.0 * step / 3.0;
    w[static_cast<std::size_t>(i) + 2] += step / 3.0;
  }
  if (simpson_end != intervals) {
    const auto s = static_cast<std::size_t>(simpson_end);
    w[s] += 3.0 * step / 8.0;
    w[s + 1] += 9.0 * step / 8.0;
    w[s + 2] += 9.0 * step / 8.0;
    w[s + 3] += 3.0 * step / 8.0;
  }
  return w;
}

OpMatrix collision_commutator_from_state(const NBodyState& psi, int k, const RealField& v) {
  if (k < 1 || k >= psi.particles) throw ConfigError("collision term needs 1 <= k < N");
  if (v.size() != psi.grid.size()) throw ConfigError("pair potential size does not match grid");
  const std::size_t m = psi.grid.size();
  const auto dim = static_cast<Eigen::Index>(operator_dimension(psi.grid, k));
  const auto rest = static_cast<Eigen::Index>(psi.values.size()) / dim;
  const Eigen::Index tail = rest / static_cast<Eigen::Index>(m);  // variables k+2..N
  using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> a(psi.values.data(), dim, rest);
  const double weight = std::pow(psi.grid.cell_volume(), psi.particles);

  OpMatrix c = OpMatrix::Zero(dim, dim);
  for (int ell = 1; ell <= k; ++ell) {
    const std::size_t stride = checked_power(m, k - ell);
    // A_V(X, (j, rest)) = V(x_ell - x_{k+1} = j) Psi(X, j, rest).
    RowMat av(dim, rest);
    for (Eigen::Index x = 0; x < dim; ++x) {
      const std::size_t site = (static_cast<std::size_t>(x) / stride) % m;
      for (std::size_t j = 0; j < m; ++j) {
        const double vj = v[psi.grid.difference_index(site, j)];
        const Eigen::Index col = static_cast<Eigen::Index>(j) * tail;
        av.row(x).segment(col, tail) = vj * a.row(x).segment(col, tail);
      }
    }
    const OpMatrix left = weight * (av * a.adjoint());
    c += left - left.adjoint();
  }
  return c;
}

HierarchyInput hierarchy_input_from_states(const std::vector<NBodyFrame>& frames, int k,
                                           const RealField& v) {
  HierarchyInput in;
  in.order = k;
  for (const auto& f : frames) {
    in.times.push_back(f.time);
    in.gammas.push_back(reduce(f.state, k));
    in.commutators.push_back(collision_commutator_from_state(f.state, k, v));
  }
  return in;
}

HierarchyInput hierarchy_input_from_densities(const std::vector<double>& times,
                                              const std::vector<ReducedDensityMatrix>& lower,
                                              const std::vector<ReducedDensityMatrix>& upper,
                                              const RealField& v) {
  if (times.size() != lower.size() || times.size() != upper.size()) {
    throw ConfigError("hierarchy input lists differ in length");
  }
  HierarchyInput in;
  in.order = lower.empty() ? 1 : lower.front().order;
  in.times = times;
  in.gammas = lower;
  for (const auto& g : upper) in.commutators.push_back(collision_commutator(g, v));
  return in;
}

HierarchyInput hierarchy_input_from_hartree(const HartreeTrajectory& traj, int k, const RealField& v) {
  if (k < 1 || k > 2) throw ConfigError("Hartree product hierarchy supports k = 1 or 2");
  HierarchyInput in;
  in.order = k;
  in.times = traj.times;
  for (const auto& psi : traj.states) {
    const auto p = ReducedDensityMatrix::projector(psi);
    in.gammas.push_back(tensor_power(p, k));
    in.commutators.push_back(collision_commutator(tensor_power(p, k + 1), v));
  }
  return in;
}

double HierarchyResidualReport::max_residual() const {
  return residuals.empty() ? 0.0 : *std::max_element(residuals.begin(), residuals.end());
}

namespace {

double uniform_spacing(const std::vector<double>& times) {
  if (times.size() < 2) return 0.0;
  const double step = times[1] - times[0];
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs((times[i] - times[i - 1]) - step) > 1e-9 * std::max(1.0, step)) {
      throw ConfigError("hierarchy residual needs uniformly spaced nodes");
    }
  }
  if (std::abs(times[0]) > 1e-12) throw ConfigError("hierarchy nodes must start at t = 0");
  return step;
}

// flow(a, t) conjugates an operator on the k-particle space by the chosen
// k-body evolution.
template <class Flow>
HierarchyResidualReport residual(const HierarchyInput& in, double prefactor, Flow&& flow,
                                 Quadrature rule, const char* name) {
  if (in.gammas.size() != in.times.size() || in.commutators.size() != in.times.size()) {
    throw ConfigError("incomplete hierarchy input: missing nodes");
  }
  if (in.times.empty()) throw ConfigError("hierarchy input has no nodes");
  HierarchyResidualReport rep;
  rep.order = in.order;
  rep.hierarchy = name;
  rep.rule = rule;
  rep.nodes = static_cast<int>(in.times.size());
  rep.times = in.times;
  rep.node_spacing = uniform_spacing(in.times);

  // int_0^t U(t - s) C(s) ds = U(t) int_0^t U(-s) C(s) ds.
  std::vector<OpMatrix> pulled;
  pulled.reserve(in.times.size());
  for (std::size_t j = 0; j < in.times.size(); ++j) pulled.push_back(flow(in.commutators[j], -in.times[j]));

  const cplx i_unit{0.0, 1.0};
  const OpMatrix& g0 = in.gammas.front().matrix;
  for (std::size_t mnode = 0; mnode < in.times.size(); ++mnode) {
    const double t = in.times[mnode];
    if (mnode == 0) {
      rep.residuals.push_back(trace_norm(in.gammas[0].matrix - g0));
      continue;
    }
    const auto w = quadrature_weights(static_cast<int>(mnode), rep.node_spacing, rule, rep.nodes);
    OpMatrix integral = OpMatrix::Zero(g0.rows(), g0.cols());
    for (std::size_t j = 0; j < w.size(); ++j) integral += w[j] * pulled[j];
    const OpMatrix defect = in.gammas[mnode].matrix - flow(g0, t) + i_unit * prefactor * flow(integral, t);
    rep.residuals.push_back(trace_norm(defect));
    if (mnode + 1 == in.times.size()) {
      const auto wt = quadrature_weights(static_cast<int>(mnode), rep.node_spacing, Quadrature::trapezoid);
      OpMatrix other = OpMatrix::Zero(g0.rows(), g0.cols());
      for (std::size_t j = 0; j <= mnode; ++j) other += wt[j] * pulled[j];
      rep.quadrature_estimate = prefactor * trace_norm(flow(OpMatrix(integral - other), t));
    }
  }
  return rep;
}

}  // namespace

HierarchyResidualReport finite_hierarchy_residual(const HierarchyInput& input, int particles,
                                                  const RealField& v, Quadrature rule) {
  if (input.gammas.empty()) throw ConfigError("hierarchy input has no nodes");
  const int k = input.order;
  if (k > 2) throw ConfigError("finite hierarchy residual supports k <= 2");
  if (particles <= k) throw ConfigError("finite hierarchy needs N > k");
  const Grid& grid = input.gammas.front().grid;
  const KBodyPropagator prop(grid, k, particles, v);
  const double prefactor = static_cast<double>(particles - k) / particles;
  return residual(input, prefactor, [&](const OpMatrix& a, double t) { return prop.conjugate(a, t); },
                  rule, "finite");
}

HierarchyResidualReport infinite_hierarchy_residual(const HierarchyInput& input, Quadrature rule) {
  if (input.gammas.empty()) throw ConfigError("hierarchy input has no nodes");
  const Grid grid = input.gammas.front().grid;
  const int k = input.order;
  return residual(
      input, 1.0,
      [&](const OpMatrix& a, double t) { return free_flow(ReducedDensityMatrix{grid, k, a}, t).matrix; },
      rule, "infinite");
}

}  // namespace mf
