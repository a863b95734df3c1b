#include "meanfield/studies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "meanfield/density.hpp"
#include "meanfield/errors.hpp"
#include "meanfield/hartree.hpp"
#include "meanfield/hierarchy.hpp"
#include "meanfield/nbody.hpp"
#include "meanfield/oplemmas.hpp"
#include "meanfield/symmetric.hpp"

namespace mf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr const char* kTraceMetric =
    "trace-norm distance of reduced density matrices (a computable, stronger surrogate for weak-* convergence)";

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

StudyResult start(const ExperimentConfig& config, std::vector<std::string> columns, std::string metric) {
  StudyResult r;
  r.study = study_name(config.study);
  r.columns = std::move(columns);
  r.metric = std::move(metric);
  r.config_json = to_json(config);
  return r;
}

HartreeOptions hartree_options(const ExperimentConfig& c) {
  HartreeOptions o;
  o.final_time = c.final_time;
  o.dt = c.dt;
  o.record_every = c.record_every;
  return o;
}

NBodyOptions nbody_options(const ExperimentConfig& c) {
  NBodyOptions o;
  o.final_time = c.final_time;
  o.dt = c.dt;
  o.record_every = c.record_every;
  return o;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

void require_same_time(double a, double b) {
  if (std::abs(a - b) > 1e-12) throw ConfigError("N-body and Hartree record times disagree");
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t instance) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (instance + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

StudyResult run_hartree(const ExperimentConfig& config) {
  const Stopwatch clock;
  StudyResult r = start(config, {"t", "norm", "energy", "h1_norm"}, "one-body norm, energy and H^1 norm");
  const Grid grid = make_grid(config);
  const auto traj = evolve_hartree(initial_state(config, grid), pair_potential(config, grid), hartree_options(config));
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    r.add_row({traj.times[i], traj.norms[i], traj.energies[i], traj.h1_norms[i]});
  }
  r.summary.emplace_back("energy_drift", std::abs(traj.energies.back() - traj.energies.front()));
  r.summary.emplace_back("norm_drift", std::abs(traj.norms.back() - traj.norms.front()));
  r.wall_seconds = clock.seconds();
  return r;
}

StudyResult run_nbody(const ExperimentConfig& config, TrajectoryFile* trajectory) {
  const Stopwatch clock;
  StudyResult r = start(config, {"N", "t", "norm", "energy"}, "N-body norm and energy");
  const Grid grid = make_grid(config);
  const int n = config.particles.front();
  const SymmetricPropagator prop(grid, n, pair_potential(config, grid), config.max_entries);
  const auto psi0 = symmetric_product_state(initial_state(config, grid), n, config.max_entries);
  if (trajectory != nullptr) {
    *trajectory = TrajectoryFile{};
    trajectory->dim = static_cast<std::uint32_t>(grid.dim());
    trajectory->points = static_cast<std::uint32_t>(grid.points());
    trajectory->particles = static_cast<std::uint32_t>(n);
    trajectory->dt = config.dt;
    trajectory->box = grid.box();
  }
  double e0 = kNaN;
  double e_last = kNaN;
  prop.evolve(psi0, nbody_options(config), [&](double t, const SymmetricState& psi) {
    const double e = prop.energy(psi);
    if (std::isnan(e0)) e0 = e;
    e_last = e;
    r.add_row({static_cast<std::int64_t>(n), t, psi.norm(), e});
    if (trajectory != nullptr) {
      const NBodyState full = expand(psi, config.max_entries);
      trajectory->times.push_back(t);
      std::vector<std::complex<float>> frame(full.values.size());
      for (std::size_t i = 0; i < frame.size(); ++i) {
        frame[i] = {static_cast<float>(full.values[i].real()), static_cast<float>(full.values[i].imag())};
      }
      trajectory->frames.push_back(std::move(frame));
    }
  });
  r.summary.emplace_back("energy_drift", std::abs(e_last - e0));
  r.wall_seconds = clock.seconds();
  return r;
}

StudyResult run_convergence_study(const ExperimentConfig& config) {
  const Stopwatch clock;
  StudyResult r = start(config, {"N", "t", "D1", "D2", "F"}, kTraceMetric);
  const Grid grid = make_grid(config);
  const RealField v = pair_potential(config, grid);
  const WaveFn psi0 = initial_state(config, grid);
  const auto hartree = evolve_hartree(psi0, v, hartree_options(config));
  const bool want1 = std::count(config.convergence.orders.begin(), config.convergence.orders.end(), 1) > 0;
  const bool want2 = std::count(config.convergence.orders.begin(), config.convergence.orders.end(), 2) > 0;
  const std::size_t frames = hartree.times.size();

  std::vector<int> ns = config.particles;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  std::vector<double> d1_final, f_final, d2_final;
  for (int n : ns) {
    const SymmetricPropagator prop(grid, n, v, config.max_entries);
    const auto start_state = symmetric_product_state(psi0, n, config.max_entries);
    std::size_t frame = 0;
    double d1_last = kNaN, d2_last = kNaN, f_last = kNaN;
    prop.evolve(start_state, nbody_options(config), [&](double t, const SymmetricState& psi) {
      if (frame >= frames) throw ConfigError("N-body and Hartree record counts disagree");
      require_same_time(t, hartree.times[frame]);
      const auto one = ReducedDensityMatrix::projector(hartree.states[frame]);
      double d1 = kNaN, d2 = kNaN, f = kNaN;
      const bool pair_frame = frame % static_cast<std::size_t>(config.convergence.pair_every) == 0 ||
                              frame + 1 == frames;
      ReducedDensityMatrix g1{grid, 1, {}};
      if (want1 || (want2 && pair_frame && n >= 2)) g1 = reduce(psi, 1);
      if (want1) d1 = trace_distance(g1, one);
      if (want2 && pair_frame && n >= 2) {
        const auto g2 = reduce(psi, 2);
        d2 = trace_distance(g2, tensor_power(one, 2));
        f = trace_distance(g2, tensor_product(g1, g1));
      }
      r.add_row({static_cast<std::int64_t>(n), t, d1, d2, f});
      d1_last = d1;
      d2_last = d2;
      f_last = f;
      ++frame;
    });
    if (frame != frames) throw ConfigError("N-body and Hartree record counts disagree");
    const std::string tag = "_N" + std::to_string(n);
    r.summary.emplace_back("D1_final" + tag, d1_last);
    r.summary.emplace_back("D2_final" + tag, d2_last);
    r.summary.emplace_back("F_final" + tag, f_last);
    d1_final.push_back(d1_last);
    d2_final.push_back(d2_last);
    f_final.push_back(f_last);
  }
  r.summary.emplace_back("D1_final_strictly_decreasing", strictly_decreasing(d1_final) ? 1.0 : 0.0);
  r.summary.emplace_back("D2_final_strictly_decreasing", strictly_decreasing(d2_final) ? 1.0 : 0.0);
  r.summary.emplace_back("F_final_strictly_decreasing", strictly_decreasing(f_final) ? 1.0 : 0.0);
  r.summary.emplace_back("D1_final_last_over_first", d1_final.back() / d1_final.front());
  r.summary.emplace_back("F_final_last_over_first", f_final.back() / f_final.front());
  r.wall_seconds = clock.seconds();
  return r;
}

StudyResult run_cutoff_study(const ExperimentConfig& config) {
  const Stopwatch clock;
  StudyResult r = start(config, {"eps", "t", "D", "W2"}, "squared N-body state distance, cutoff versus full pair potential");
  const Grid grid = make_grid(config);
  const int n = config.cutoff.particles;
  const RealField v = pair_potential(config, grid);
  const WaveFn smooth = smooth_initial(initial_state(config, grid), config.cutoff.delta / n);
  const auto psi0 = symmetric_product_state(smooth, n, config.max_entries, false);

  std::vector<SymmetricState> reference;
  SymmetricPropagator(grid, n, v, config.max_entries)
      .evolve(psi0, nbody_options(config), [&](double, const SymmetricState& psi) { reference.push_back(psi); });

  std::vector<double> eps = config.potential.eps;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  std::vector<double> final_d;
  bool monotone_t = true;
  for (double e : eps) {
    const PotentialSplit split = build_potential_split(grid, potential_params(config, grid, n, e));
    const SymmetricPropagator prop(grid, n, split.far, config.max_entries);
    std::size_t frame = 0;
    double prev = -1.0;
    prop.evolve(psi0, nbody_options(config), [&](double t, const SymmetricState& psi) {
      const double d = std::pow(state_distance(psi, reference.at(frame)), 2);
      const double w = std::pow(remainder_interaction_norm(psi, split.near), 2);
      r.add_row({e, t, d, w});
      if (d < prev) monotone_t = false;
      prev = d;
      ++frame;
    });
    final_d.push_back(prev);
  }
  r.summary.emplace_back("D_nondecreasing_in_t", monotone_t ? 1.0 : 0.0);
  r.summary.emplace_back("D_final_decreasing_in_eps", strictly_decreasing(final_d) ? 1.0 : 0.0);
  for (std::size_t i = 1; i < final_d.size(); ++i) {
    r.summary.emplace_back("halving_ratio_" + std::to_string(i), final_d[i - 1] / final_d[i]);
  }
  r.wall_seconds = clock.seconds();
  return r;
}

StudyResult run_smoothing_study(const ExperimentConfig& config) {
  const Stopwatch clock;
  StudyResult r = start(config, {"delta", "t", "distance"}, "N-body state distance, smoothed versus raw product data");
  const Grid grid = make_grid(config);
  const int n = config.smoothing.particles;
  const SymmetricPropagator prop(grid, n, pair_potential(config, grid), config.max_entries);
  const WaveFn psi0 = initial_state(config, grid);
  const auto raw0 = symmetric_product_state(psi0, n, config.max_entries);
  std::vector<SymmetricState> raw;
  prop.evolve(raw0, nbody_options(config), [&](double, const SymmetricState& psi) { raw.push_back(psi); });

  std::vector<double> deltas = config.potential.delta;
  std::sort(deltas.begin(), deltas.end());
  double t_variation = 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0, bound_ratio = 0.0;
  const double h2 = h2_norm(psi0);
  for (double delta : deltas) {
    const auto smooth0 = symmetric_product_state(smooth_initial(psi0, delta / n), n, config.max_entries, false);
    std::size_t frame = 0;
    double d0 = 0.0;
    prop.evolve(smooth0, nbody_options(config), [&](double t, const SymmetricState& psi) {
      const double d = state_distance(psi, raw.at(frame));
      if (frame == 0) d0 = d;
      t_variation = std::max(t_variation, std::abs(d - d0));
      r.add_row({delta, t, d});
      ++frame;
    });
    if (delta > 0.0) {
      lo = std::min(lo, d0 / delta);
      hi = std::max(hi, d0 / delta);
      bound_ratio = std::max(bound_ratio, d0 / (delta * h2));
    }
  }
  r.summary.emplace_back("max_time_variation", t_variation);
  r.summary.emplace_back("linearity_spread", hi > 0.0 ? hi / lo - 1.0 : 0.0);
  r.summary.emplace_back("max_distance_over_delta_h2", bound_ratio);
  r.wall_seconds = clock.seconds();
  return r;
}

StudyResult run_hierarchy_study(const ExperimentConfig& config) {
  const Stopwatch clock;
  StudyResult r = start(config, {"hierarchy", "k", "t", "residual"}, "trace norm of the integrated hierarchy defect");
  const Grid grid = make_grid(config);
  const RealField v = pair_potential(config, grid);
  const int n = config.hierarchy.particles;
  const int k = config.hierarchy.order;
  const Quadrature rule = config.hierarchy.quadrature == "simpson" ? Quadrature::simpson : Quadrature::trapezoid;

  std::vector<NBodyFrame> frames;
  if (!config.hierarchy.trajectory.empty()) {
    const TrajectoryFile file = load_trajectory(config.hierarchy.trajectory);
    if (file.dim != static_cast<std::uint32_t>(grid.dim()) || file.points != static_cast<std::uint32_t>(grid.points()) ||
        file.particles != static_cast<std::uint32_t>(n) || std::abs(file.box - grid.box()) > 1e-12) {
      throw ConfigError("persisted trajectory does not match the configured grid and particle count");
    }
    for (std::size_t i = 0; i < file.frames.size(); ++i) {
      NBodyState psi(grid, n, config.max_entries);
      for (std::size_t j = 0; j < psi.values.size(); ++j) psi.values[j] = cplx(file.frames[i][j]);
      frames.push_back({file.times[i], std::move(psi)});
    }
  } else {
    const NBodyHamiltonian ham(grid, n, v, config.max_entries);
    frames = evolve_nbody(product_state(initial_state(config, grid), n, config.max_entries), ham, nbody_options(config));
  }
  const auto finite = finite_hierarchy_residual(hierarchy_input_from_states(frames, k, v), n, v, rule);
  for (std::size_t i = 0; i < finite.times.size(); ++i) {
    r.add_row({std::string("finite"), static_cast<std::int64_t>(k), finite.times[i], finite.residuals[i]});
  }
  const auto traj = evolve_hartree(initial_state(config, grid), v, hartree_options(config));
  const auto infinite = infinite_hierarchy_residual(hierarchy_input_from_hartree(traj, k, v), rule);
  for (std::size_t i = 0; i < infinite.times.size(); ++i) {
    r.add_row({std::string("infinite"), static_cast<std::int64_t>(k), infinite.times[i], infinite.residuals[i]});
  }
  r.summary.emplace_back("finite_max_residual", finite.max_residual());
  r.summary.emplace_back("infinite_max_residual", infinite.max_residual());
  r.summary.emplace_back("finite_quadrature_estimate", finite.quadrature_estimate);
  r.summary.emplace_back("infinite_quadrature_estimate", infinite.quadrature_estimate);
  r.summary.emplace_back("node_spacing", finite.node_spacing);
  r.wall_seconds = clock.seconds();
  return r;
}

StudyResult run_opcheck(const ExperimentConfig& config) {
  const Stopwatch clock;
  StudyResult r = start(config, {"lemma", "instance", "seed", "measured", "bound", "ratio", "pass"},
                        "discrete-torus analogues of operator inequalities and trace identities");
  const auto& o = config.opcheck;
  const auto add = [&](const InequalityReport& rep) {
    r.add_row({rep.lemma, rep.instance, static_cast<std::int64_t>(rep.seed), rep.measured, rep.bound, rep.ratio,
               static_cast<std::int64_t>(rep.pass ? 1 : 0)});
  };

  bool cycle_ok = true, subadd_ok = true;
  double max_subadd = 0.0;
  for (int i = 0; i < o.fuzz_pairs; ++i) {
    const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(i));
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dims(o.fuzz_min_dim, o.fuzz_max_dim);
    const int dim = dims(rng);
    const auto a = random_psd(dim, rng);
    const auto b = random_psd(dim, rng);
    auto cyc = check_root_cycle(a, b);
    auto sub = check_sqrt_subadd(a, b);
    cyc.seed = sub.seed = seed;
    cycle_ok = cycle_ok && cyc.pass;
    subadd_ok = subadd_ok && sub.pass;
    max_subadd = std::max(max_subadd, sub.ratio);
    add(cyc);
    add(sub);
  }

  bool partial_ok = true;
  double partial_worst = 0.0;
  for (int i = 0; i < o.partial_trace_instances; ++i) {
    const std::uint64_t seed = derive_seed(config.seed ^ 0x70617274ULL, static_cast<std::uint64_t>(i));
    const auto rep = check_partial_trace_calculus(seed, o.partial_trace_dims[0], o.partial_trace_dims[1], o.duality_tests);
    partial_ok = partial_ok && rep.pass;
    partial_worst = std::max(partial_worst, rep.measured);
    add(rep);
  }

  const Grid hardy_grid = Grid::make(3, o.hardy_points, o.hardy_box);
  std::vector<double> softenings = o.hardy_softenings;
  std::sort(softenings.begin(), softenings.end());
  bool hardy_ok = true, hardy_monotone = true;
  double prev = -std::numeric_limits<double>::infinity();
  for (double a : softenings) {
    HardyOptions h;
    h.softening = a;
    h.seed = config.seed;
    h.tolerance_factor = o.hardy_tolerance_factor;
    const auto rep = check_hardy(hardy_grid, h);
    hardy_ok = hardy_ok && rep.pass;
    if (rep.measured < prev - 1e-9 * std::max(1.0, std::abs(prev))) hardy_monotone = false;
    prev = rep.measured;
    add(rep);
  }
  bool inflated_fails = true;
  for (double a : softenings) {
    HardyOptions h;
    h.softening = a;
    h.seed = config.seed;
    h.coefficient = 4.0;
    h.tolerance_factor = o.hardy_tolerance_factor;
    const auto rep = check_hardy(hardy_grid, h);
    inflated_fails = inflated_fails && !rep.pass;
    add(rep);
  }

  const Grid dom_grid = Grid::make(3, o.domination_points, o.domination_box);
  const auto sweep = l1_domination_sweep(dom_grid, o.kappa, o.lambdas);
  for (const auto& rep : sweep.rows) add(rep);

  r.summary.emplace_back("root_cycle_all_pass", cycle_ok ? 1.0 : 0.0);
  r.summary.emplace_back("sqrt_subadd_all_pass", subadd_ok ? 1.0 : 0.0);
  r.summary.emplace_back("sqrt_subadd_max_ratio", max_subadd);
  r.summary.emplace_back("partial_trace_all_pass", partial_ok ? 1.0 : 0.0);
  r.summary.emplace_back("partial_trace_worst_defect", partial_worst);
  r.summary.emplace_back("hardy_quarter_all_pass", hardy_ok ? 1.0 : 0.0);
  r.summary.emplace_back("hardy_monotone_in_softening", hardy_monotone ? 1.0 : 0.0);
  r.summary.emplace_back("hardy_inflated_all_fail", inflated_fails ? 1.0 : 0.0);
  r.summary.emplace_back("domination_spread", sweep.spread);
  r.summary.emplace_back("domination_pass", sweep.pass ? 1.0 : 0.0);
  r.wall_seconds = clock.seconds();
  return r;
}

StudyResult run_study(const ExperimentConfig& config) {
  switch (config.study) {
    case StudyKind::hartree: return run_hartree(config);
    case StudyKind::nbody: return run_nbody(config);
    case StudyKind::convergence: return run_convergence_study(config);
    case StudyKind::cutoff: return run_cutoff_study(config);
    case StudyKind::smoothing: return run_smoothing_study(config);
    case StudyKind::hierarchy: return run_hierarchy_study(config);
    case StudyKind::opcheck: return run_opcheck(config);
  }
  throw ConfigError("unknown study kind");
}

}  // namespace mf
