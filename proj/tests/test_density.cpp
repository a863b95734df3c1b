#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "meanfield/density.hpp"
#include "meanfield/errors.hpp"
#include "meanfield/fourier.hpp"
#include "meanfield/hartree.hpp"
#include "meanfield/nbody.hpp"
#include "meanfield/oplemmas.hpp"
#include "meanfield/symmetric.hpp"
#include "oracles.hpp"

using namespace mf;

namespace {

RealField soft_coulomb(const Grid& g, double a) { return coulomb_potential(g, +1, 1.0, a, CoreMode::soft); }

OpMatrix random_op(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  OpMatrix a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = {g(rng), g(rng)};
  }
  return a;
}

/// Random density matrix sum_j w_j |phi_j><phi_j| with smooth phi_j.
ReducedDensityMatrix random_density(const Grid& g, int order, int rank, std::mt19937_64& rng) {
  const auto dim = static_cast<Eigen::Index>(operator_dimension(g, order));
  OpMatrix gamma = OpMatrix::Zero(dim, dim);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  double total = 0.0;
  for (int j = 0; j < rank; ++j) {
    NBodyState phi(g, order);
    phi.values = oracle::random_field(phi.values.size(), rng);
    for (int s = 0; s < order; ++s) apply_slot_symbol(phi.values, phi.layout(), s, heat_symbol(g, 0.5));
    phi.normalize();
    Eigen::VectorXcd v(dim);
    const double scale = std::sqrt(std::pow(g.cell_volume(), order));
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = scale * phi.values[static_cast<std::size_t>(i)];
    const double w = u(rng);
    total += w;
    gamma += w * v * v.adjoint();
  }
  return {g, order, gamma / total};
}

}  // namespace

TEST_CASE("product states reduce to tensor powers of the projector") {
  const Grid g = Grid::make(1, 8, 4.0);
  const WaveFn psi = WaveFn::gaussian(g, {0.2, 0, 0}, 0.7, {0.5, 0, 0});
  const NBodyState big = product_state(psi, 3);
  const auto proj = ReducedDensityMatrix::projector(psi);
  for (int k = 1; k <= 3; ++k) {
    const auto gamma = reduce(big, k);
    CHECK(trace_norm(gamma.matrix - tensor_power(proj, k).matrix) < 1e-13);
    CHECK(std::abs(gamma.trace() - 1.0) < 1e-12);
    CHECK(gamma.hermiticity_defect() < 1e-13);
    CHECK(gamma.min_eigenvalue() > -1e-12);
  }
  // k = N: rank-one projector onto Psi.
  const auto full = reduce(big, 3);
  Eigen::SelfAdjointEigenSolver<OpMatrix> es(full.matrix);
  CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(es.eigenvalues().cwiseAbs().sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("reduce matches the brute-force contraction oracle") {
  const Grid g = Grid::make(1, 8, 4.0);
  std::mt19937_64 rng(17);
  const NBodyState psi = oracle::random_symmetric_three(g, rng);
  const auto gamma = reduce(psi, 1);
  const auto brute = oracle::reduce_three_to_one(psi);
  CHECK((gamma.matrix - brute).cwiseAbs().maxCoeff() < 1e-12);
  const auto sym = reduce(compress(psi), 1);
  CHECK((sym.matrix - brute).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((reduce(compress(psi), 2).matrix - reduce(psi, 2).matrix).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("marginals are consistent under partial trace") {
  const Grid g = Grid::make(1, 8, 4.0);
  std::mt19937_64 rng(18);
  const NBodyState psi = oracle::random_symmetric_three(g, rng);
  for (int k = 1; k < 3; ++k) {
    const auto lower = reduce(psi, k);
    const auto upper = reduce(psi, k + 1);
    CHECK(trace_norm(partial_trace(upper).matrix - lower.matrix) < 1e-10);
  }
  CHECK_THROWS_AS(reduce(psi, 4), ConfigError);
  CHECK_THROWS_AS(reduce(psi, 0), ConfigError);
}

TEST_CASE("trace norm examples and the eigendecomposition oracle") {
  CHECK(trace_norm(OpMatrix::Identity(7, 7)) == doctest::Approx(7.0).epsilon(1e-14));
  const Grid g = Grid::make(1, 16, 4.0);
  CHECK(trace_norm(ReducedDensityMatrix::projector(WaveFn::gaussian(g, {0, 0, 0}, 1.0)).matrix) ==
        doctest::Approx(1.0).epsilon(1e-13));
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 5; ++trial) {
    const OpMatrix a = random_op(50, rng);
    CHECK(std::abs(trace_norm(a) - oracle::trace_norm_via_gram(a)) < 1e-9);
    const OpMatrix h = a + a.adjoint();
    CHECK(std::abs(trace_norm(h) - oracle::trace_norm_via_gram(h)) < 1e-9);
    CHECK(trace_norm(a) >= std::abs(a.trace()));
  }
  const auto rho = random_density(g, 1, 4, rng);
  CHECK(trace_norm(rho.matrix) == doctest::Approx(rho.trace().real()).epsilon(1e-9));
  CHECK_THROWS_AS(trace_norm(OpMatrix::Zero(3, 4)), ConfigError);
}

TEST_CASE("trace distance examples") {
  const Grid g = Grid::make(1, 16, 8.0);
  const auto a = ReducedDensityMatrix::projector(WaveFn::plane_wave(g, {1, 0, 0}));
  const auto b = ReducedDensityMatrix::projector(WaveFn::plane_wave(g, {2, 0, 0}));
  CHECK(trace_distance(a, a) == doctest::Approx(0.0));
  CHECK(trace_distance(a, b) == doctest::Approx(2.0).epsilon(1e-12));
  std::mt19937_64 rng(20);
  const auto x = random_density(g, 1, 3, rng);
  const auto y = random_density(g, 1, 3, rng);
  const auto z = random_density(g, 1, 3, rng);
  CHECK(trace_distance(x, y) == doctest::Approx(trace_distance(y, x)).epsilon(1e-12));
  CHECK(trace_distance(x, z) <= trace_distance(x, y) + trace_distance(y, z) + 1e-12);
  const WaveFn psi = WaveFn::gaussian(g, {0, 0, 0}, 1.0);
  CHECK(trace_distance(reduce(product_state(psi, 2), 1), ReducedDensityMatrix::projector(psi)) < 1e-14);
}

TEST_CASE("Sobolev norms of density matrices") {
  const Grid g = Grid::make(1, 16, 8.0);
  CHECK(sobolev_norm_k(ReducedDensityMatrix::projector(WaveFn::constant(g))) == doctest::Approx(1.0).epsilon(1e-12));
  const double p0 = 2 * std::numbers::pi * 3 / g.box();
  const auto pw = ReducedDensityMatrix::projector(WaveFn::plane_wave(g, {3, 0, 0}));
  CHECK(sobolev_norm_k(pw) == doctest::Approx(1 + p0 * p0).epsilon(1e-12));

  const WaveFn psi = WaveFn::gaussian(g, {0.4, 0, 0}, 1.0, {0.5, 0, 0});
  const auto two = tensor_power(ReducedDensityMatrix::projector(psi), 2);
  const double h1 = h1_norm(psi);
  CHECK(sobolev_norm_k(two) == doctest::Approx(std::pow(h1, 4)).epsilon(1e-10));

  std::mt19937_64 rng(21);
  for (int k = 1; k <= 2; ++k) {
    const auto rho = random_density(g, k, 3, rng);
    CHECK(sobolev_norm_k(rho) == doctest::Approx(sobolev_trace(rho)).epsilon(1e-8));
    CHECK(sobolev_norm_k(rho) >= rho.trace().real());
  }
}

TEST_CASE("partial trace examples and duality") {
  std::mt19937_64 rng(22);
  const OpMatrix a = random_op(4, rng);
  const OpMatrix b = random_op(3, rng);
  CHECK((partial_trace(kron(a, b), 4, 3) - b.trace() * a).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((partial_trace(OpMatrix::Identity(12, 12), 4, 3) - 3.0 * OpMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(partial_trace(OpMatrix::Identity(12, 12), 5, 3), ConfigError);

  // Tr[B K] = Tr[A (K (x) I)] for rank-one K = u v^dagger, by a direct double sum.
  const std::size_t d1 = 6;
  const std::size_t d2 = 7;
  const OpMatrix big = random_op(static_cast<Eigen::Index>(d1 * d2), rng);
  const OpMatrix reduced = partial_trace(big, d1, d2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto u = oracle::random_field(d1, rng);
    const auto v = oracle::random_field(d1, rng);
    cplx lhs = 0.0;
    for (std::size_t i = 0; i < d1; ++i) {
      for (std::size_t ip = 0; ip < d1; ++ip) lhs += reduced(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(ip)) * u[ip] * std::conj(v[i]);
    }
    cplx rhs = 0.0;
    for (std::size_t i = 0; i < d1; ++i) {
      for (std::size_t ip = 0; ip < d1; ++ip) {
        for (std::size_t j = 0; j < d2; ++j) {
          rhs += big(static_cast<Eigen::Index>(i * d2 + j), static_cast<Eigen::Index>(ip * d2 + j)) * u[ip] * std::conj(v[i]);
        }
      }
    }
    CHECK(std::abs(lhs - rhs) < 1e-10 * (1 + std::abs(rhs)));
  }
  CHECK(partial_trace_duality_defect(big, d1, d2, rng, 20) < 1e-10);
}

TEST_CASE("fubini and cycle relations on random bipartite operators") {
  std::mt19937_64 rng(23);
  const std::size_t d1 = 6;
  const std::size_t d2 = 7;
  for (int trial = 0; trial < 100; ++trial) {
    const OpMatrix a = random_op(static_cast<Eigen::Index>(d1 * d2), rng);
    CHECK(trace_norm(partial_trace(a, d1, d2)) <= trace_norm(a) + 1e-10);
  }
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXcd p = random_psd(static_cast<int>(d2), rng);
    const OpMatrix lift = kron(OpMatrix::Identity(static_cast<Eigen::Index>(d1), static_cast<Eigen::Index>(d1)), OpMatrix(p));
    const OpMatrix b = random_op(static_cast<Eigen::Index>(d1 * d2), rng);
    const double left = trace_norm(partial_trace(OpMatrix(lift * b), d1, d2));
    const double right = trace_norm(partial_trace(OpMatrix(b * lift), d1, d2));
    CHECK(std::abs(left - right) < 1e-9 * (1 + left));
  }
}

TEST_CASE("collision trace examples") {
  const Grid g = Grid::make(1, 8, 4.0);
  std::mt19937_64 rng(24);
  const NBodyState psi = oracle::random_symmetric_three(g, rng);
  const auto g2 = reduce(psi, 2);
  const auto g1 = reduce(psi, 1);
  CHECK(collision_trace(g2, 1, constant_field(g, 0.0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((collision_trace(g2, 1, constant_field(g, 1.5)) - 1.5 * g1.matrix).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(collision_commutator(g2, constant_field(g, 1.5)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK_THROWS_AS(collision_trace(g2, 2, constant_field(g, 0.0)), ConfigError);
}

TEST_CASE("collision trace of a product is the mean-field weighted projector") {
  const Grid g = Grid::make(1, 16, 8.0);
  const WaveFn psi = WaveFn::gaussian(g, {0.3, 0, 0}, 1.0, {0.6, 0, 0});
  const RealField v = soft_coulomb(g, g.spacing());
  const auto proj = ReducedDensityMatrix::projector(psi);
  const OpMatrix c = collision_trace(tensor_power(proj, 2), 1, v);
  const auto field = mean_field(psi, v);
  double err = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x) {
    for (std::size_t y = 0; y < g.size(); ++y) {
      const cplx kernel = c(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) / g.cell_volume();
      err = std::max(err, std::abs(kernel - field[x] * psi.values[x] * std::conj(psi.values[y])));
    }
  }
  CHECK(err < 1e-10);
  const OpMatrix right = collision_trace_right(tensor_power(proj, 2), 1, v);
  CHECK((right - OpMatrix(c.adjoint())).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("collision terms are bounded by the Sobolev norm of the next marginal") {
  const Grid g = Grid::make(1, 16, 8.0);
  std::mt19937_64 rng(25);
  const RealField v = soft_coulomb(g, g.spacing());
  const double sup = *std::max_element(v.begin(), v.end());
  for (double eps : {0.3, 0.6, 1.2, 2.4}) {
    PotentialParams p;
    p.eps = eps;
    p.particles = 3;
    p.softening = g.spacing();
    const auto split = build_potential_split(g, p);
    double c_emp = 0.0;
    for (int trial = 0; trial < 8; ++trial) {
      const auto rho = random_density(g, 2, 3, rng);
      c_emp = std::max(c_emp, trace_norm(collision_trace(rho, 1, split.far)) / sobolev_norm_k(rho));
    }
    // |Tr_2 V_far rho| <= sup |V| Tr rho <= sup |V| ||rho||_{H^{1,(2)}}, uniformly in eps.
    CHECK(c_emp <= sup);
  }
}

TEST_CASE("weighted collision bound is stable under grid refinement") {
  // C = Tr|S Tr_2[V rho] S| / ||rho||_{H^{1,(2)}} on product Gaussians, with a
  // fixed physical softening so both grids discretize the same potential.
  auto constant = [](int n) {
    const Grid g = Grid::make(1, n, 16.0);
    const RealField v = soft_coulomb(g, 0.5);
    double worst = 0.0;
    for (double width : {0.7, 1.0, 1.5}) {
      for (double boost : {0.0, 1.0}) {
        const auto proj = ReducedDensityMatrix::projector(WaveFn::gaussian(g, {0, 0, 0}, width, {boost, 0, 0}));
        const auto rho = tensor_power(proj, 2);
        OpMatrix c = collision_trace(rho, 1, v);
        apply_left_symbol(c, g, 1, 0, bessel_symbol(g, 1.0));
        apply_right_symbol(c, g, 1, 0, bessel_symbol(g, 1.0));
        worst = std::max(worst, trace_norm(c) / sobolev_norm_k(rho));
      }
    }
    return worst;
  };
  const double c16 = constant(16);
  const double c32 = constant(32);
  MESSAGE("C_emp n=16 " << c16 << ", n=32 " << c32);
  CHECK(std::max(c16, c32) / std::min(c16, c32) < 2.0);
}

TEST_CASE("left and right symbols act on the chosen variable") {
  const Grid g = Grid::make(1, 8, 4.0);
  const WaveFn a = WaveFn::gaussian(g, {0, 0, 0}, 1.0);
  const WaveFn b = WaveFn::plane_wave(g, {1, 0, 0});
  const auto pa = ReducedDensityMatrix::projector(a);
  const auto pb = ReducedDensityMatrix::projector(b);
  OpMatrix m = tensor_product(pa, pb).matrix;
  const Symbol s = bessel_symbol(g, 1.0);
  apply_left_symbol(m, g, 2, 1, s);
  apply_right_symbol(m, g, 2, 1, s);
  const double p = 2 * std::numbers::pi / g.box();
  CHECK(m.trace().real() == doctest::Approx(1 + p * p).epsilon(1e-12));
  CHECK_THROWS_AS(apply_left_symbol(m, g, 2, 2, s), ConfigError);
}

TEST_CASE("operator size guard") {
  CHECK_THROWS_AS(operator_dimension(Grid::make(1, 32, 8.0), 3), MemoryGuardError);
  CHECK(operator_dimension(Grid::make(1, 64, 8.0), 2) == 4096);
}
