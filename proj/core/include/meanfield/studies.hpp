#pragma once

#include "meanfield/config.hpp"
#include "meanfield/persist.hpp"

namespace mf {

/// Rows: t, norm, energy, h1_norm.
StudyResult run_hartree(const ExperimentConfig& config);

/// Evolves N = particles[0] in the symmetric sector. Rows: N, t, norm,
/// energy. When `trajectory` is given it receives the recorded frames as a
/// full tensor container.
StudyResult run_nbody(const ExperimentConfig& config, TrajectoryFile* trajectory = nullptr);

/// Rows: N, t, D1, D2, F with D_k = ||gamma^(k)_{N,t} - (x)^k |psi_t><psi_t| ||_1
/// and F = ||gamma^(2)_{N,t} - gamma^(1)_{N,t} (x) gamma^(1)_{N,t}||_1.
StudyResult run_convergence_study(const ExperimentConfig& config);

/// Rows: eps, t, D, W2 with D = ||Psi^{delta,eps}_t - Psi^delta_t||^2 (cutoff
/// pair potential V_far against the full V) and W2 = ||W Psi^{delta,eps}_t||^2.
StudyResult run_cutoff_study(const ExperimentConfig& config);

/// Rows: delta, t, distance = ||Psi_{N,t} - Psi^delta_{N,t}||, where
/// Psi^delta is the product of e^{(delta/N) Delta} psi0 (not renormalized).
StudyResult run_smoothing_study(const ExperimentConfig& config);

/// Rows: hierarchy, k, t, residual for the finite (N-body) and infinite
/// (Hartree product) hierarchies.
StudyResult run_hierarchy_study(const ExperimentConfig& config);

/// Rows: lemma, instance, seed, measured, bound, ratio, pass.
StudyResult run_opcheck(const ExperimentConfig& config);

StudyResult run_study(const ExperimentConfig& config);

/// splitmix64 mix of a base seed and an instance counter.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t instance);

}  // namespace mf
