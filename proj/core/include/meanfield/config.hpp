#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "meanfield/grid.hpp"
#include "meanfield/potential.hpp"

namespace mf {

enum class StudyKind { hartree, nbody, convergence, cutoff, smoothing, hierarchy, opcheck };

/// CLI spelling: hartree, nbody, convergence, cutoff-study, smoothing-study,
/// hierarchy-residual, opcheck.
std::string study_name(StudyKind kind);
StudyKind parse_study(const std::string& name);

struct GridSpec {
  int dim = 1;
  int points = 32;
  double box = 16.0;
};

struct PotentialSpec {
  int sign = +1;
  double mu = 1.0;
  /// Soft-core length a in units of the grid spacing.
  double softening_spacings = 1.0;
  std::string core = "soft";  ///< "soft" or "capped"
  std::vector<double> eps{2.4, 1.2, 0.6, 0.3};
  std::vector<double> delta{0.05, 0.1, 0.2};
};

struct InitialSpec {
  std::string kind = "gaussian";  ///< "gaussian", "plane-wave" or "file"
  std::array<double, 3> center{0.0, 0.0, 0.0};
  double width = 1.0;
  std::array<double, 3> boost{0.0, 0.0, 0.0};
  std::array<int, 3> mode{0, 0, 0};
  /// Text file with one "re im" pair per grid point in flat order.
  std::string file;
};

struct ConvergenceSpec {
  std::vector<int> orders{1, 2};
  /// D2 and F are evaluated on every `pair_every`-th recorded frame and on
  /// the last one; other rows carry nan.
  int pair_every = 5;
};

struct CutoffSpec {
  int particles = 3;
  double delta = 0.1;
};

struct SmoothingSpec {
  int particles = 3;
};

struct HierarchySpec {
  int particles = 3;
  int order = 1;
  std::string quadrature = "simpson";  ///< "simpson" or "trapezoid"
  /// Optional persisted N-body trajectory; empty evolves one.
  std::string trajectory;
};

struct OpcheckSpec {
  int fuzz_pairs = 1000;
  int fuzz_min_dim = 2;
  int fuzz_max_dim = 100;
  int partial_trace_instances = 100;
  std::array<int, 2> partial_trace_dims{6, 5};
  int duality_tests = 20;
  int hardy_points = 8;
  double hardy_box = 8.0;
  std::vector<double> hardy_softenings{0.5, 1.0, 2.0, 4.0};
  double hardy_tolerance_factor = 2.0;
  int domination_points = 8;
  double domination_box = 4.0;
  double kappa = 2.0;
  std::vector<double> lambdas{1.0, 0.5, 0.25, 0.125};
};

struct ExperimentConfig {
  StudyKind study = StudyKind::convergence;
  GridSpec grid;
  PotentialSpec potential;
  InitialSpec initial;
  std::vector<int> particles{2, 3, 4, 5};
  double final_time = 0.5;
  double dt = 1e-3;
  int record_every = 10;
  std::string output_dir;  ///< empty: default_output_dir()
  std::uint64_t seed = 0;
  std::uint64_t max_entries = kDefaultMaxEntries;
  ConvergenceSpec convergence;
  CutoffSpec cutoff;
  SmoothingSpec smoothing;
  HierarchySpec hierarchy;
  OpcheckSpec opcheck;
};

/// Canonical JSON text (fixed key order, every field present).
std::string to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; unknown keys and bad values throw ConfigError.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Applies "dotted.key=value"; the value is read as JSON, falling back to a
/// plain string. Throws ConfigError for unknown keys.
void apply_override(ExperimentConfig& config, const std::string& assignment);

/// Range checks on every field; throws ConfigError.
void validate(const ExperimentConfig& config);

/// $MEANFIELD_OUTPUT_DIR, else "results".
std::string default_output_dir();
std::string resolved_output_dir(const ExperimentConfig& config);

Grid make_grid(const ExperimentConfig& config);
PotentialParams potential_params(const ExperimentConfig& config, const Grid& grid, int particles,
                                 double eps);
/// Soft-Coulomb (or capped) pair potential of the configuration.
RealField pair_potential(const ExperimentConfig& config, const Grid& grid);
WaveFn initial_state(const ExperimentConfig& config, const Grid& grid);

/// FNV-1a 64-bit digest as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace mf
