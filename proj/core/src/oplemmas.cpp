#include "meanfield/oplemmas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "meanfield/eigensolve.hpp"
#include "meanfield/errors.hpp"
#include "meanfield/fourier.hpp"

namespace mf {

namespace {

Eigen::VectorXcd random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = cplx{g(rng), g(rng)};
  return v;
}

std::span<cplx> as_span(Eigen::VectorXcd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

OpMatrix to_op(const Eigen::MatrixXcd& m) { return OpMatrix(m); }

}  // namespace

double hardy_tolerance_scale(const Grid& grid, double softening) {
  double sum = 0.0;
  for (std::size_t q = 0; q < grid.size(); ++q) {
    const double r = grid.displacement_radius(q);
    sum += 0.25 / (r * r + softening * softening);
  }
  return sum / static_cast<double>(grid.size());
}

InequalityReport check_hardy(const Grid& grid, const HardyOptions& options) {
  if (grid.dim() != 3) throw ConfigError("the Hardy check needs a three-dimensional grid");
  if (!(options.softening > 0.0)) throw ConfigError("Hardy softening must be positive");
  if (options.random_starts < 0) throw ConfigError("random_starts must be non-negative");

  const std::size_t m = grid.size();
  std::vector<double> well(m);
  for (std::size_t q = 0; q < m; ++q) {
    const double r = grid.displacement_radius(q);
    well[q] = options.coefficient / (r * r + options.softening * options.softening);
  }
  const Symbol kinetic = radial_symbol(grid, [](double p2) { return cplx{p2, 0.0}; });
  const TensorLayout layout{grid, 1};
  const LinearOperator op = [&](const Eigen::VectorXcd& x) {
    Eigen::VectorXcd y = x;
    apply_slot_symbol(as_span(y), layout, 0, kinetic);
    for (std::size_t q = 0; q < m; ++q) y[static_cast<Eigen::Index>(q)] -= well[q] * x[static_cast<Eigen::Index>(q)];
    return y;
  };

  const double scale = hardy_tolerance_scale(grid, options.softening);
  std::mt19937_64 rng(options.seed);
  double lowest = std::numeric_limits<double>::infinity();
  for (int s = 0; s <= options.random_starts; ++s) {
    Eigen::VectorXcd start = s == 0 ? Eigen::VectorXcd::Ones(static_cast<Eigen::Index>(m))
                                    : random_vector(m, rng);
    const auto pair = lobpcg(op, start, Extreme::smallest, 1e-9 * std::max(1.0, scale), 4000);
    lowest = std::min(lowest, pair.value);
  }

  InequalityReport rep;
  rep.lemma = "hardy";
  rep.instance = "c=" + std::to_string(options.coefficient);
  rep.measured = lowest;
  rep.bound = -options.tolerance_factor * scale;
  rep.ratio = lowest / scale;
  rep.pass = lowest >= rep.bound;
  rep.seed = options.seed;
  rep.parameters = {{"n", grid.points()},
                    {"L", grid.box()},
                    {"softening", options.softening},
                    {"coefficient", options.coefficient},
                    {"tolerance_scale", scale}};
  return rep;
}

RealField ball_power_potential(const Grid& grid, double lambda, double kappa, int subsamples) {
  if (!(lambda > 0.0)) throw ConfigError("ball radius must be positive");
  if (!(kappa >= 0.0 && kappa < grid.dim())) throw ConfigError("power must lie in [0, d)");
  if (subsamples < 2 || subsamples % 2 != 0) throw ConfigError("subsamples must be even and >= 2");
  const double h = grid.spacing();
  const int d = grid.dim();
  const int n = grid.points();
  const double half_diag = 0.5 * h * std::sqrt(static_cast<double>(d));
  int per_cell = 1;
  for (int a = 0; a < d; ++a) per_cell *= subsamples;

  RealField w(grid.size(), 0.0);
  for (std::size_t q = 0; q < grid.size(); ++q) {
    if (grid.displacement_radius(q) - half_diag > lambda) continue;
    const auto idx = grid.axis_indices(q);
    std::array<double, 3> center{0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) center[a] = (idx[a] <= n / 2 ? idx[a] : idx[a] - n) * h;
    double sum = 0.0;
    for (int s = 0; s < per_cell; ++s) {
      int rest = s;
      double r2 = 0.0;
      for (int a = 0; a < d; ++a) {
        const int j = rest % subsamples;
        rest /= subsamples;
        const double x = center[a] + ((j + 0.5) / subsamples - 0.5) * h;
        r2 += x * x;
      }
      const double r = std::sqrt(r2);
      if (r <= lambda) sum += std::pow(r, -kappa);
    }
    w[q] = sum / per_cell;
  }
  return w;
}

double domination_top_eigenvalue(const Grid& grid, const RealField& w) {
  const std::size_t m = grid.size();
  if (w.size() != m) throw ConfigError("potential size does not match grid");
  const TensorLayout layout{grid, 2};
  const std::size_t dim = layout.size();
  std::vector<double> pair(dim);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) pair[i * m + j] = w[grid.difference_index(i, j)];
  }
  const Symbol inv = bessel_symbol(grid, -1.0);
  const auto smooth = [&](Eigen::VectorXcd& v) {
    apply_slot_symbol(as_span(v), layout, 0, inv);
    apply_slot_symbol(as_span(v), layout, 1, inv);
  };
  const LinearOperator op = [&](const Eigen::VectorXcd& x) {
    Eigen::VectorXcd y = x;
    smooth(y);
    for (std::size_t q = 0; q < dim; ++q) y[static_cast<Eigen::Index>(q)] *= pair[q];
    smooth(y);
    return y;
  };

  // W concentrates near x = y; start from a smoothed diagonal plus noise.
  Eigen::VectorXcd start = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < m; ++i) start[static_cast<Eigen::Index>(i * m + i)] = 1.0;
  smooth(start);
  std::mt19937_64 rng(0x5eed);
  start += 1e-3 * start.norm() / std::sqrt(static_cast<double>(dim)) * random_vector(dim, rng);
  const double wmax = *std::max_element(w.begin(), w.end());
  const auto top = lobpcg(op, start, Extreme::largest, 1e-9 * std::max(wmax, 1e-300), 4000);
  return top.value;
}

InequalityReport check_l1_domination(const Grid& grid, const RealField& w) {
  if (w.size() != grid.size()) throw ConfigError("potential size does not match grid");
  double l1 = 0.0;
  for (double x : w) {
    if (x < 0.0 || !std::isfinite(x)) throw ConfigError("domination check needs finite W >= 0");
    l1 += x;
  }
  l1 *= grid.cell_volume();

  InequalityReport rep;
  rep.lemma = "l1-domination";
  rep.instance = "n=" + std::to_string(grid.points());
  rep.parameters = {{"n", grid.points()}, {"L", grid.box()}, {"l1_norm", l1}};
  if (l1 == 0.0) {
    rep.pass = true;
    return rep;
  }
  const double top = domination_top_eigenvalue(grid, w);
  rep.measured = top;
  rep.bound = l1;
  rep.ratio = top / l1;
  rep.pass = std::isfinite(rep.ratio) && rep.ratio <= 1.0;
  return rep;
}

DominationSweep l1_domination_sweep(const Grid& grid, double kappa, const std::vector<double>& lambdas,
                                    double spread_limit) {
  if (lambdas.empty()) throw ConfigError("sweep needs at least one radius");
  DominationSweep sweep;
  sweep.spread_limit = spread_limit;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double lambda : lambdas) {
    const RealField w = ball_power_potential(grid, lambda, kappa);
    InequalityReport rep = check_l1_domination(grid, w);
    const double rho = rep.ratio;
    rep.instance = "lambda=" + std::to_string(lambda);
    rep.ratio = rep.measured * std::pow(lambda, kappa - grid.dim());
    rep.parameters.emplace_back("lambda", lambda);
    rep.parameters.emplace_back("kappa", kappa);
    rep.parameters.emplace_back("rho", rho);
    lo = std::min(lo, rep.ratio);
    hi = std::max(hi, rep.ratio);
    sweep.rows.push_back(std::move(rep));
  }
  sweep.spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  sweep.pass = sweep.spread < spread_limit;
  return sweep;
}

Eigen::MatrixXcd random_complex(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXcd a(rows, cols);
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = cplx{g(rng), g(rng)};
  }
  return a;
}

Eigen::MatrixXcd random_psd(int dim, std::mt19937_64& rng, double lo) {
  if (dim < 1) throw ConfigError("matrix dimension must be positive");
  if (!(lo > 0.0 && lo <= 1.0)) throw ConfigError("eigenvalue floor must lie in (0, 1]");
  const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(random_complex(dim, dim, rng));
  const Eigen::MatrixXcd q = qr.householderQ();
  std::uniform_real_distribution<double> u(std::log(lo), 0.0);
  Eigen::VectorXd lam(dim);
  for (int i = 0; i < dim; ++i) lam[i] = std::exp(u(rng));
  Eigen::MatrixXcd a = q * lam.asDiagonal() * q.adjoint();
  return 0.5 * (a + a.adjoint());
}

double trace_sqrt(const Eigen::MatrixXcd& x) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(x, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) s += std::sqrt(std::max(0.0, es.eigenvalues()[i]));
  return s;
}

namespace {

void require_psd(const Eigen::MatrixXcd& a, const char* name) {
  if (a.rows() != a.cols()) throw ConfigError(std::string(name) + " must be square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ConfigError(std::string(name) + " must be Hermitian");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().size() > 0 && es.eigenvalues().minCoeff() < -1e-10 * scale) {
    throw ConfigError(std::string(name) + " must be positive semidefinite");
  }
}

}  // namespace

InequalityReport check_root_cycle(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  require_psd(a, "A");
  require_psd(b, "B");
  if (a.rows() != b.rows()) throw ConfigError("A and B must have equal dimension");
  const Eigen::MatrixXcd ab2a = a * b * b * a;
  const Eigen::MatrixXcd ba2b = b * a * a * b;
  const double lhs = trace_sqrt(0.5 * (ab2a + ab2a.adjoint()));
  const double rhs = trace_sqrt(0.5 * (ba2b + ba2b.adjoint()));
  InequalityReport rep;
  rep.lemma = "root-cycle";
  rep.instance = "dim=" + std::to_string(a.rows());
  rep.measured = std::abs(lhs - rhs);
  rep.bound = 1e-8 * (1.0 + std::max(lhs, rhs));
  rep.ratio = lhs > 0.0 ? rhs / lhs : (rhs == 0.0 ? 1.0 : 0.0);
  rep.pass = rep.measured <= rep.bound;
  rep.parameters = {{"dim", static_cast<double>(a.rows())}, {"lhs", lhs}, {"rhs", rhs}};
  return rep;
}

InequalityReport check_sqrt_subadd(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  require_psd(a, "A");
  require_psd(b, "B");
  if (a.rows() != b.rows()) throw ConfigError("A and B must have equal dimension");
  const double lhs = trace_sqrt(0.5 * ((a + b) + (a + b).adjoint()));
  const double rhs = 2.0 * (trace_sqrt(a) + trace_sqrt(b));
  InequalityReport rep;
  rep.lemma = "sqrt-subadditivity";
  rep.instance = "dim=" + std::to_string(a.rows());
  rep.measured = lhs;
  rep.bound = rhs;
  rep.ratio = rhs > 0.0 ? lhs / rhs : 0.0;
  rep.pass = lhs <= rhs * (1.0 + 1e-12) + 1e-14;
  rep.parameters = {{"dim", static_cast<double>(a.rows())}};
  return rep;
}

double partial_trace_duality_defect(const OpMatrix& a, std::size_t dim1, std::size_t dim2,
                                    std::mt19937_64& rng, int tests) {
  const OpMatrix reduced = partial_trace(a, dim1, dim2);
  const OpMatrix id2 = OpMatrix::Identity(static_cast<Eigen::Index>(dim2), static_cast<Eigen::Index>(dim2));
  double worst = 0.0;
  for (int t = 0; t < tests; ++t) {
    const OpMatrix k = to_op(random_complex(static_cast<int>(dim1), static_cast<int>(dim1), rng));
    const cplx lhs = (reduced * k).trace();
    const cplx rhs = (a * kron(k, id2)).trace();
    worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
  }
  return worst;
}

InequalityReport check_partial_trace_calculus(std::uint64_t seed, int dim1, int dim2, int duality_tests) {
  if (dim1 < 1 || dim2 < 1) throw ConfigError("factor dimensions must be positive");
  std::mt19937_64 rng(seed);
  const auto d1 = static_cast<std::size_t>(dim1);
  const auto d2 = static_cast<std::size_t>(dim2);
  const OpMatrix b = to_op(random_complex(dim1 * dim2, dim1 * dim2, rng));
  Eigen::MatrixXcd a2 = random_complex(dim2, dim2, rng);
  a2 /= std::max(1e-300, a2.norm());
  const OpMatrix lift = kron(OpMatrix::Identity(dim1, dim1), to_op(a2));

  const double left = trace_norm(partial_trace(OpMatrix(lift * b), d1, d2));
  const double right = trace_norm(partial_trace(OpMatrix(b * lift), d1, d2));
  const double cycle = std::abs(left - right) / (1.0 + std::max(left, right));
  const double reduced = trace_norm(partial_trace(b, d1, d2));
  const double full = trace_norm(b);
  const double fubini = std::max(0.0, reduced - full) / (1.0 + full);
  const double duality = partial_trace_duality_defect(b, d1, d2, rng, duality_tests);

  InequalityReport rep;
  rep.lemma = "partial-trace";
  rep.instance = "dims=" + std::to_string(dim1) + "x" + std::to_string(dim2);
  rep.measured = std::max({cycle, fubini, duality});
  rep.bound = 1e-9;
  rep.ratio = full > 0.0 ? reduced / full : 0.0;
  rep.pass = rep.measured <= rep.bound;
  rep.seed = seed;
  rep.parameters = {{"cycle_defect", cycle},   {"fubini_excess", fubini}, {"duality_defect", duality},
                    {"reduced_trace_norm", reduced}, {"trace_norm", full}};
  return rep;
}

}  // namespace mf
