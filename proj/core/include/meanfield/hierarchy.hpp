#pragma once

#include <string>
#include <vector>

#include "meanfield/density.hpp"
#include "meanfield/hartree.hpp"
#include "meanfield/nbody.hpp"

namespace mf {

/// U_k(t) gamma = e^{i t Delta/2} gamma e^{-i t Delta/2} on each of the k variables.
ReducedDensityMatrix free_flow(const ReducedDensityMatrix& gamma, double t);

/// Dense H_N^(k) = -1/2 sum_l Delta_l + (1/N) sum_{l<j<=k} V(x_l - x_j) in the
/// orthonormal lattice basis, for k in {1, 2}. The kinetic part is summed
/// directly from plane waves.
OpMatrix dense_hamiltonian(const Grid& grid, int k, int particles, const RealField& v);

/// e^{-i t H} gamma e^{i t H} from one eigendecomposition of H_N^(k).
class KBodyPropagator {
 public:
  KBodyPropagator(const Grid& grid, int k, int particles, const RealField& v);

  int order() const { return k_; }
  OpMatrix unitary(double t) const;
  OpMatrix conjugate(const OpMatrix& a, double t) const;
  ReducedDensityMatrix apply(const ReducedDensityMatrix& gamma, double t) const;

 private:
  Grid grid_;
  int k_;
  Eigen::MatrixXcd vectors_;
  Eigen::VectorXd values_;
};

ReducedDensityMatrix interacting_flow(const ReducedDensityMatrix& gamma, double t, const RealField& v,
                                      int particles);

enum class Quadrature { trapezoid, simpson };

/// Quadrature weights on nodes 0..m with uniform spacing `step`. Simpson on
/// an odd interval count closes with the 3/8 rule. A single Simpson interval
/// with `recorded` >= 3 nodes uses the quadratic through nodes 0, 1, 2, so the
/// returned vector then has three entries.
std::vector<double> quadrature_weights(int intervals, double step, Quadrature rule, int recorded = 0);

/// gamma^(k) and the summed collision commutator
/// C = sum_l Tr_{k+1}[V(x_l - x_{k+1}) - V(x'_l - x_{k+1}), gamma^(k+1)]
/// at uniformly spaced times.
struct HierarchyInput {
  int order = 1;
  std::vector<double> times;
  std::vector<ReducedDensityMatrix> gammas;
  std::vector<OpMatrix> commutators;
};

/// Collision commutator straight from the N-body state, without forming
/// gamma^(k+1).
OpMatrix collision_commutator_from_state(const NBodyState& psi, int k, const RealField& v);

HierarchyInput hierarchy_input_from_states(const std::vector<NBodyFrame>& frames, int k,
                                           const RealField& v);
HierarchyInput hierarchy_input_from_densities(const std::vector<double>& times,
                                              const std::vector<ReducedDensityMatrix>& lower,
                                              const std::vector<ReducedDensityMatrix>& upper,
                                              const RealField& v);
/// Product family gamma^(k) = (x)^k |psi_t><psi_t| along a Hartree trajectory.
HierarchyInput hierarchy_input_from_hartree(const HartreeTrajectory& traj, int k, const RealField& v);

struct HierarchyResidualReport {
  int order = 1;
  std::string hierarchy;  ///< "finite" or "infinite"
  Quadrature rule = Quadrature::simpson;
  int nodes = 0;
  std::vector<double> times;
  std::vector<double> residuals;  ///< trace norm of the defect at each node
  /// Trace norm of (Simpson - trapezoid) integral at the last node.
  double quadrature_estimate = 0.0;
  double node_spacing = 0.0;

  double max_residual() const;
};

/// Defect of gamma_t = U_{N,k}(t) gamma_0 - i (N-k)/N sum_l int_0^t U_{N,k}(t-s) C(s) ds.
HierarchyResidualReport finite_hierarchy_residual(const HierarchyInput& input, int particles,
                                                  const RealField& v, Quadrature rule);

/// Same defect with the free flow U_k and no (N-k)/N prefactor.
HierarchyResidualReport infinite_hierarchy_residual(const HierarchyInput& input, Quadrature rule);

}  // namespace mf
