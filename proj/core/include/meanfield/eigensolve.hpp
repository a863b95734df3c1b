#pragma once

#include <Eigen/Dense>
#include <functional>

namespace mf {

using LinearOperator = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;

struct ExtremeEigenpair {
  double value = 0.0;
  Eigen::VectorXcd vector;
  int iterations = 0;
  double residual = 0.0;
};

enum class Extreme { smallest, largest };

/// Single-vector LOBPCG for a Hermitian operator: Rayleigh-Ritz on
/// span{x, r, p} until ||A x - theta x|| <= tol or `max_iter` is reached.
ExtremeEigenpair lobpcg(const LinearOperator& apply, const Eigen::VectorXcd& start, Extreme which,
                        double tol = 1e-10, int max_iter = 2000);

}  // namespace mf
