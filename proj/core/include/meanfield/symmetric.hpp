#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "meanfield/nbody.hpp"

namespace mf {

/// Ranks of non-decreasing index tuples i_1 <= ... <= i_k over [0, modes).
///
/// The rank is the colex rank of the strictly increasing tuple i_l + l, so
/// rank(t) = sum_l C(i_l + l, l + 1). Tuples are stored in rank order.
class MultisetIndex {
 public:
  MultisetIndex(std::size_t modes, int size);

  std::size_t modes() const { return modes_; }
  int size() const { return size_; }
  std::size_t count() const { return count_; }

  std::size_t rank(std::span<const std::uint32_t> sorted) const;
  std::span<const std::uint32_t> tuple(std::size_t r) const {
    return {tuples_.data() + r * static_cast<std::size_t>(size_), static_cast<std::size_t>(size_)};
  }
  /// Number of ordered tuples with this multiset: k! / prod n_i!.
  double multiplicity(std::size_t r) const { return multiplicity_[r]; }

 private:
  std::size_t modes_;
  int size_;
  std::size_t count_;
  std::vector<std::vector<std::uint64_t>> binom_;  // binom_[j][i] = C(i, j)
  std::vector<std::uint32_t> tuples_;
  std::vector<double> multiplicity_;
};

/// Bosonic N-body state stored on sorted configurations only: values[r] is
/// Psi at any ordering of multiset r. ||Psi||^2 = h^{dN} sum_r mult(r) |values[r]|^2.
struct SymmetricState {
  Grid grid;
  int particles = 1;
  std::vector<cplx> values;

  /// Zero state. The memory guard applies to the number of sorted
  /// configurations C(M + N - 1, N).
  SymmetricState(const Grid& g, int n_particles, std::size_t max_entries = kDefaultMaxEntries);

  const MultisetIndex& index() const { return *index_; }
  double norm() const;
  bool all_finite() const;

 private:
  std::shared_ptr<const MultisetIndex> index_;
};

SymmetricState symmetric_product_state(const WaveFn& psi, int particles,
                                       std::size_t max_entries = kDefaultMaxEntries,
                                       bool require_normalized = true);
/// Samples a full tensor on sorted configurations (exact for symmetric input).
SymmetricState compress(const NBodyState& psi, std::size_t max_entries = kDefaultMaxEntries);
NBodyState expand(const SymmetricState& psi, std::size_t max_entries = kDefaultMaxEntries);
double state_distance(const SymmetricState& a, const SymmetricState& b);
/// ||W Psi|| for W = (1/N) sum_{l<j} V_near(x_l - x_j).
double remainder_interaction_norm(const SymmetricState& psi, const RealField& near_potential);

/// Strang propagation of H = -1/2 sum_l Delta_l + (1/N) sum_{l<j} V(x_l - x_j)
/// restricted to the symmetric sector. Produces the same discrete dynamics as
/// evolve_nbody on the full tensor.
///
/// The N-fold DFT is staged: after s passes the tensor is stored as
/// (sorted transformed indices, sorted untransformed indices), which stays
/// symmetric within each group. Every pass transforms one-body fibers and
/// each output entry is written exactly once.
class SymmetricPropagator {
 public:
  SymmetricPropagator(const Grid& grid, int particles, RealField pair_potential,
                      std::size_t max_entries = kDefaultMaxEntries);

  const Grid& grid() const { return grid_; }
  int particles() const { return particles_; }

  void evolve(const SymmetricState& psi0, const NBodyOptions& options,
              const std::function<void(double, const SymmetricState&)>& observer) const;

  /// <Psi, H Psi> (not divided by the norm).
  double energy(const SymmetricState& psi) const;

  /// Position-sorted values to momentum-sorted values and back (unitary DFT).
  std::vector<cplx> to_momentum(const std::vector<cplx>& position) const;
  std::vector<cplx> to_position(const std::vector<cplx>& momentum) const;

 private:
  /// Writes of one direction: per fiber batch, (buffer offset, level index)
  /// pairs for the entries this batch owns.
  struct Scatter {
    std::vector<std::uint32_t> src;
    std::vector<std::uint32_t> dst;
    std::vector<std::size_t> batch_begin;
  };
  struct Pass {
    std::size_t fibers = 0;
    std::vector<std::uint32_t> lower;  ///< fiber entry -> index on level s
    std::vector<std::uint32_t> upper;  ///< fiber entry -> index on level s + 1
    Scatter up;
    Scatter down;
  };

  /// Unnormalized staged DFT; a round trip multiplies by M^N.
  void transform(std::vector<cplx>& a, std::vector<cplx>& b, bool forward) const;

  Grid grid_;
  int particles_;
  std::vector<std::shared_ptr<const MultisetIndex>> indices_;  ///< sizes 0..N
  std::shared_ptr<const MultisetIndex> top_;
  std::vector<std::size_t> level_size_;
  std::vector<Pass> passes_;
  std::vector<double> interaction_;  ///< on position-sorted configurations
  std::vector<double> kinetic_;      ///< sum_l p_l^2 on momentum-sorted configurations
};

}  // namespace mf
