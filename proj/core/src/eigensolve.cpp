#include "meanfield/eigensolve.hpp"

#include <cmath>

#include "meanfield/errors.hpp"

namespace mf {

namespace {

// Orthonormalizes the columns in place, dropping near-dependent ones.
Eigen::MatrixXcd orthonormal_basis(const Eigen::MatrixXcd& cols) {
  Eigen::MatrixXcd q(cols.rows(), 0);
  for (Eigen::Index c = 0; c < cols.cols(); ++c) {
    Eigen::VectorXcd v = cols.col(c);
    const double original = v.norm();
    if (original == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < q.cols(); ++j) v -= q.col(j).dot(v) * q.col(j);
    }
    const double n = v.norm();
    if (n <= 1e-10 * original) continue;
    q.conservativeResize(Eigen::NoChange, q.cols() + 1);
    q.col(q.cols() - 1) = v / n;
  }
  return q;
}

}  // namespace

ExtremeEigenpair lobpcg(const LinearOperator& apply, const Eigen::VectorXcd& start, Extreme which,
                        double tol, int max_iter) {
  if (start.size() == 0 || start.norm() == 0.0) throw ConfigError("LOBPCG needs a nonzero start vector");
  Eigen::VectorXcd x = start.normalized();
  Eigen::VectorXcd ax = apply(x);
  double theta = x.dot(ax).real();
  Eigen::VectorXcd p = Eigen::VectorXcd::Zero(x.size());
  ExtremeEigenpair out;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXcd r = ax - theta * x;
    out.residual = r.norm();
    out.iterations = it;
    if (out.residual <= tol * std::max(1.0, std::abs(theta))) break;

    Eigen::MatrixXcd cols(x.size(), p.norm() > 0.0 ? 3 : 2);
    cols.col(0) = x;
    cols.col(1) = r;
    if (cols.cols() == 3) cols.col(2) = p;
    const Eigen::MatrixXcd q = orthonormal_basis(cols);
    Eigen::MatrixXcd aq(q.rows(), q.cols());
    for (Eigen::Index c = 0; c < q.cols(); ++c) aq.col(c) = apply(q.col(c));
    Eigen::MatrixXcd small = q.adjoint() * aq;
    small = 0.5 * (small + small.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(small);
    const Eigen::Index pick = which == Extreme::smallest ? 0 : small.rows() - 1;
    const Eigen::VectorXcd coef = es.eigenvectors().col(pick);
    const Eigen::VectorXcd x_new = q * coef;
    // Search direction: the new iterate minus its component along the old one.
    p = x_new - x.dot(x_new) * x;
    x = x_new.normalized();
    ax = apply(x);
    theta = x.dot(ax).real();
  }
  out.value = theta;
  out.vector = x;
  out.residual = (ax - theta * x).norm();
  return out;
}

}  // namespace mf
