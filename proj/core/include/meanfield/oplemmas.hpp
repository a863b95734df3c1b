#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "meanfield/density.hpp"
#include "meanfield/grid.hpp"
#include "meanfield/potential.hpp"

namespace mf {

/// One checked instance of an operator inequality or trace identity. All
/// operator statements are discrete-torus analogues of their continuum forms.
struct InequalityReport {
  std::string lemma;
  std::string instance;
  std::string statement = "discrete-torus analogue";
  double measured = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> parameters;
};

// ---- Hardy: 1/(4|x|^2) <= -Delta in three dimensions ---------------------

struct HardyOptions {
  double softening = 1.0;   ///< a in 1/(4 (r^2 + a^2))
  double coefficient = 0.25;
  int random_starts = 3;
  std::uint64_t seed = 0;
  /// Pass threshold: lambda_min >= -tolerance_factor * <1/(4 (r^2 + a^2))>,
  /// the box average of the uninflated potential. The torus constant mode has
  /// no kinetic energy, so lambda_min sits below zero by about that average.
  double tolerance_factor = 2.0;
};

/// Box average of 1/(4 (r^2 + a^2)).
double hardy_tolerance_scale(const Grid& grid, double softening);

/// Most negative Rayleigh quotient of -Delta - c/(r^2 + a^2) found by LOBPCG
/// from the constant vector and random starts. Throws ConfigError for d != 3.
InequalityReport check_hardy(const Grid& grid, const HardyOptions& options);

// ---- L^1 domination: W(x - y) <= C ||W||_1 (I - Delta_x)(I - Delta_y) --------

/// Cell averages of chi(r <= lambda) / r^kappa (m^d midpoint subsamples per cell).
RealField ball_power_potential(const Grid& grid, double lambda, double kappa, int subsamples = 8);

/// Top eigenvalue of S_x^{-1} S_y^{-1} W(x - y) S_x^{-1} S_y^{-1} (LOBPCG with
/// Fourier-space matvecs on the two-particle grid).
double domination_top_eigenvalue(const Grid& grid, const RealField& w);

/// rho(W) = top eigenvalue / ||W||_{L^1}. W == 0 is a trivial pass with rho 0.
/// Throws ConfigError for negative W.
InequalityReport check_l1_domination(const Grid& grid, const RealField& w);

struct DominationSweep {
  std::vector<InequalityReport> rows;  ///< one per lambda; ratio = compensated value
  double spread = 0.0;                 ///< max / min of the compensated values
  double spread_limit = 3.0;
  bool pass = false;
};

/// Scaled variant: lambda_top(chi(r<=lambda)/r^kappa) * lambda^{kappa-3} for
/// each lambda; passes when max/min < spread_limit.
DominationSweep l1_domination_sweep(const Grid& grid, double kappa, const std::vector<double>& lambdas,
                                    double spread_limit = 3.0);

// ---- Trace identities on random matrices -------------------------------------

/// Random positive definite matrix Q diag(lambda) Q^dagger with eigenvalues
/// log-uniform in [lo, 1].
Eigen::MatrixXcd random_psd(int dim, std::mt19937_64& rng, double lo = 1e-2);
Eigen::MatrixXcd random_complex(int rows, int cols, std::mt19937_64& rng);

/// Tr sqrt(X) for Hermitian PSD X (negative roundoff eigenvalues clamped).
double trace_sqrt(const Eigen::MatrixXcd& x);

/// Tr sqrt(A B^2 A) = Tr sqrt(B A^2 B); pass if |diff| <= 1e-8 (1 + |value|).
InequalityReport check_root_cycle(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

/// Tr sqrt(A + B) <= 2 (Tr sqrt A + Tr sqrt B); ratio = lhs / rhs.
InequalityReport check_sqrt_subadd(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

/// Random instance on C^{dim1} (x) C^{dim2}: the cycle relation
/// Tr_1|Tr_2 (I (x) A) B| = Tr_1|Tr_2 B (I (x) A)|, the bound
/// Tr_1|Tr_2 B| <= Tr|B|, and the defining duality of the partial trace on
/// `duality_tests` random compact K. Pass thresholds 1e-9.
InequalityReport check_partial_trace_calculus(std::uint64_t seed, int dim1, int dim2,
                                              int duality_tests = 20);

/// Worst relative defect of Tr[Tr_2(A) K] = Tr[A (K (x) I)] over `tests` random K.
double partial_trace_duality_defect(const OpMatrix& a, std::size_t dim1, std::size_t dim2,
                                    std::mt19937_64& rng, int tests);

}  // namespace mf
