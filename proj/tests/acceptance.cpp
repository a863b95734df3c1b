// Acceptance driver: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "meanfield/config.hpp"
#include "meanfield/density.hpp"
#include "meanfield/hartree.hpp"
#include "meanfield/nbody.hpp"
#include "meanfield/parallel.hpp"
#include "meanfield/persist.hpp"
#include "meanfield/studies.hpp"
#include "meanfield/symmetric.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace mf;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  /// Records one named condition; the criterion passes only if all do.
  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!ok) detail << "[failed: " << what << "] ";
  }
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<void(Outcome&, const fs::path&)> run;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double max_abs_drift(const std::vector<double>& values) {
  double worst = 0.0;
  for (double x : values) worst = std::max(worst, std::abs(x - values.front()));
  return worst;
}

double ratio_error(double ratio) { return std::abs(ratio - 4.0) / 4.0; }

// 1. Norm conservation over 1000 steps and second-order energy drift.
void conservation(Outcome& out, const fs::path& dir) {
  ExperimentConfig c;
  c.final_time = 1.0;
  c.dt = 1e-3;
  c.particles = {3};
  auto drifts = [&](StudyKind kind, double dt) {
    ExperimentConfig run = c;
    run.study = kind;
    run.dt = dt;
    const StudyResult r = run_study(run);
    if (dt == c.dt) persist_study(r, dir.string(), study_name(kind));
    return std::pair{max_abs_drift(r.column("norm")), max_abs_drift(r.column("energy"))};
  };
  for (StudyKind kind : {StudyKind::hartree, StudyKind::nbody}) {
    const auto [norm_coarse, energy_coarse] = drifts(kind, c.dt);
    const auto [norm_fine, energy_fine] = drifts(kind, 0.5 * c.dt);
    const double ratio = energy_coarse / energy_fine;
    out.detail << study_name(kind) << ": norm drift " << norm_coarse << ", energy drift " << energy_coarse
               << " halving ratio " << ratio << "; ";
    out.require(norm_coarse <= 1e-10 && norm_fine <= 1e-10, study_name(kind) + " norm");
    out.require(ratio_error(ratio) <= 0.3, study_name(kind) + " energy ratio");
  }
}

// 2. D_k = 0 without interaction and at t = 0. The t = 0 frame is the product
// state for any potential; with V = 0 both flows are exact for any dt.
void factorization(Outcome& out, const fs::path&) {
  const ExperimentConfig c;
  const Grid g = make_grid(c);
  const WaveFn psi0 = initial_state(c, g);
  const RealField zero = constant_field(g, 0.0);
  HartreeOptions h;
  h.final_time = c.final_time;
  h.dt = 0.05;
  h.record_every = 5;
  const auto free = evolve_hartree(psi0, zero, h);
  NBodyOptions o;
  o.final_time = h.final_time;
  o.dt = h.dt;
  o.record_every = h.record_every;
  double worst = 0.0;
  for (int n = 2; n <= 5; ++n) {
    const SymmetricPropagator prop(g, n, zero, c.max_entries);
    std::size_t frame = 0;
    prop.evolve(symmetric_product_state(psi0, n, c.max_entries), o, [&](double t, const SymmetricState& psi) {
      const auto proj = ReducedDensityMatrix::projector(free.states.at(frame));
      if (std::abs(free.times.at(frame) - t) > 1e-12) throw std::runtime_error("frame times disagree");
      ++frame;
      for (int k = 1; k <= 2; ++k) worst = std::max(worst, trace_distance(reduce(psi, k), tensor_power(proj, k)));
    });
  }
  out.detail << "max D_k over N = 2..5, k = 1, 2: " << worst;
  out.require(worst <= 1e-9, "D_k");
}

// Reference values of the default convergence run, frozen after the first
// validated run.
const std::map<std::string, double> kFrozenConvergence = {
    {"D1_final_N2", 0.09779093407131981},
    {"D1_final_N3", 0.06654429176498465},
    {"D1_final_N4", 0.050460288454187624},
    {"D1_final_N5", 0.04064497104700218},
    {"F_final_N2", 0.18194581675652186},
    {"F_final_N3", 0.11765833530792222},
    {"F_final_N4", 0.08986708087730716},
    {"F_final_N5", 0.07294607984242966},
};

// 3. Mean-field convergence trend on the default configuration.
void convergence(Outcome& out, const fs::path& dir) {
  const ExperimentConfig c;
  const StudyResult r = run_convergence_study(c);
  persist_study(r, dir.string(), "convergence");
  std::vector<double> d1, f;
  for (int n : c.particles) {
    d1.push_back(r.summary_value("D1_final_N" + std::to_string(n)));
    f.push_back(r.summary_value("F_final_N" + std::to_string(n)));
  }
  out.detail.precision(17);
  out.detail << "D1(0.5) =";
  for (double x : d1) out.detail << ' ' << x;
  out.detail << "; F(0.5) =";
  for (double x : f) out.detail << ' ' << x;
  out.detail << "; ";
  out.detail.precision(6);
  auto strictly_decreasing = [](const std::vector<double>& v) {
    return std::adjacent_find(v.begin(), v.end(), std::less_equal<>()) == v.end();
  };
  out.require(strictly_decreasing(d1), "D1 strictly decreasing");
  out.require(d1.back() < 0.6 * d1.front(), "D1(5) < 0.6 D1(2)");
  out.require(strictly_decreasing(f), "F strictly decreasing");
  out.require(f.back() < 0.6 * f.front(), "F(5) < 0.6 F(2)");
  double worst = 0.0;
  for (const auto& [name, value] : kFrozenConvergence) worst = std::max(worst, std::abs(r.summary_value(name) - value));
  out.detail << "max deviation from frozen values " << worst;
  out.require(worst <= 1e-8, "frozen values");
}

// 4. Finite and infinite hierarchy residuals.
void hierarchy(Outcome& out, const fs::path& dir) {
  ExperimentConfig c;
  c.study = StudyKind::hierarchy;
  const StudyResult coarse = run_hierarchy_study(c);
  persist_study(coarse, dir.string(), "hierarchy");
  c.dt *= 0.5;
  const StudyResult fine = run_hierarchy_study(c);
  for (const std::string which : {"finite", "infinite"}) {
    const double a = coarse.summary_value(which + "_max_residual");
    const double b = fine.summary_value(which + "_max_residual");
    out.detail << which << ": " << a << " -> " << b << " ratio " << a / b << "; ";
    out.require(a < 1e-4 && b < 1e-4, which + " residual");
    out.require(ratio_error(a / b) <= 0.3, which + " halving ratio");
  }
}

// 5. Cutoff monotonicity and smoothing linearity.
void cutoff_and_smoothing(Outcome& out, const fs::path& dir) {
  ExperimentConfig c;
  c.study = StudyKind::cutoff;
  const StudyResult cut = run_cutoff_study(c);
  persist_study(cut, dir.string(), "cutoff");
  const auto eps = cut.column("eps");
  const auto t = cut.column("t");
  const auto d = cut.column("D");
  std::map<double, std::map<double, double>> by_time;  // t -> eps -> D
  bool in_t = true;
  for (std::size_t i = 0; i < d.size(); ++i) {
    by_time[t[i]][eps[i]] = d[i];
    if (i > 0 && eps[i] == eps[i - 1] && d[i] < d[i - 1]) in_t = false;
  }
  bool in_eps = true;
  for (const auto& [time, row] : by_time) {
    if (time == 0.0) continue;
    double prev = -1.0;
    for (const auto& [e, value] : row) {  // ascending eps
      if (!(value > prev)) in_eps = false;
      prev = value;
    }
  }
  out.detail << "cutoff: " << c.potential.eps.size() << " eps values, final D ratios";
  for (int i = 1; i < static_cast<int>(c.potential.eps.size()); ++i) {
    out.detail << ' ' << cut.summary_value("halving_ratio_" + std::to_string(i));
  }
  out.detail << "; ";
  out.require(c.potential.eps.size() >= 4, "three halvings");
  out.require(in_t, "D nondecreasing in t");
  out.require(in_eps, "D monotone in eps");

  c.study = StudyKind::smoothing;
  const StudyResult sm = run_smoothing_study(c);
  persist_study(sm, dir.string(), "smoothing");
  const double variation = sm.summary_value("max_time_variation");
  const double spread = sm.summary_value("linearity_spread");
  out.detail << "smoothing: time variation " << variation << ", linearity spread " << spread;
  out.require(variation <= 1e-9, "t-independence");
  out.require(spread <= 0.15, "linearity in delta");
}

std::size_t count_lemma(const StudyResult& r, const std::string& lemma) {
  const std::size_t col = r.column_index("lemma");
  return static_cast<std::size_t>(std::count_if(r.rows.begin(), r.rows.end(), [&](const auto& row) {
    return std::get<std::string>(row[col]) == lemma;
  }));
}

const StudyResult& opcheck_result(const fs::path& dir) {
  static const StudyResult r = [&] {
    ExperimentConfig c;
    c.study = StudyKind::opcheck;
    StudyResult result = run_opcheck(c);
    persist_study(result, dir.string(), "opcheck");
    return result;
  }();
  return r;
}

// 6. Trace calculus on fuzzed instances.
void trace_calculus(Outcome& out, const fs::path& dir) {
  const ExperimentConfig c;
  const StudyResult& r = opcheck_result(dir);
  const std::size_t pairs = count_lemma(r, "root-cycle");
  const std::size_t instances = count_lemma(r, "partial-trace");
  out.detail << pairs << " PSD pairs, " << instances << " bipartite instances with " << c.opcheck.duality_tests
             << " duality tests each; max sqrt ratio " << r.summary_value("sqrt_subadd_max_ratio")
             << ", worst partial-trace defect " << r.summary_value("partial_trace_worst_defect");
  out.require(pairs == 1000 && count_lemma(r, "sqrt-subadditivity") == 1000, "1000 pairs");
  out.require(instances == 100 && c.opcheck.duality_tests == 20, "100 instances x 20 tests");
  out.require(r.summary_value("root_cycle_all_pass") == 1.0, "root cycle");
  out.require(r.summary_value("sqrt_subadd_all_pass") == 1.0, "sqrt subadditivity");
  out.require(r.summary_value("partial_trace_all_pass") == 1.0, "partial trace calculus");
}

// 7. Domination sweep and Hardy checks.
void operator_inequalities(Outcome& out, const fs::path& dir) {
  const StudyResult& r = opcheck_result(dir);
  const double spread = r.summary_value("domination_spread");
  out.detail << "shares the opcheck run of criterion 6; domination spread " << spread << "; Hardy quarter pass " << r.summary_value("hardy_quarter_all_pass")
             << ", monotone " << r.summary_value("hardy_monotone_in_softening") << ", inflated fails "
             << r.summary_value("hardy_inflated_all_fail");
  out.require(spread < 3.0, "domination spread");
  out.require(r.summary_value("hardy_monotone_in_softening") == 1.0, "Hardy monotone");
  out.require(r.summary_value("hardy_inflated_all_fail") == 1.0, "inflated constant fails");
}

Eigen::VectorXcd to_vector(const NBodyState& s) {
  return Eigen::Map<const Eigen::VectorXcd>(s.values.data(), static_cast<Eigen::Index>(s.values.size()));
}

// 8. Library paths against independent dense oracles.
void oracle_equivalences(Outcome& out, const fs::path&) {
  const Grid g = Grid::make(1, 16, 8.0);
  const RealField v = coulomb_potential(g, +1, 1.0, g.spacing(), CoreMode::soft);
  const WaveFn a = WaveFn::gaussian(g, {-1.0, 0, 0}, 0.8, {0.5, 0, 0});
  const WaveFn b = WaveFn::gaussian(g, {1.0, 0, 0}, 0.8, {-0.5, 0, 0});
  NBodyState psi0(g, 2);
  const std::size_t m = g.size();
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < m; ++y) psi0.values[x * m + y] = a.values[x] * b.values[y] + b.values[x] * a.values[y];
  }
  psi0.normalize();
  const double t = 0.4;
  const Eigen::VectorXcd evolved = oracle::expm_hermitian(oracle::dense_two_body_hamiltonian(g, v, 2), t) * to_vector(psi0);
  NBodyState exact(g, 2);
  std::copy(evolved.data(), evolved.data() + evolved.size(), exact.values.begin());
  const NBodyHamiltonian ham(g, 2, v);
  auto error = [&](double dt) {
    NBodyState s = psi0;
    for (int i = 0; i < step_count(t, dt); ++i) s = nbody_step(s, dt, ham);
    return state_distance(s, exact);
  };
  const double e1 = error(0.02);
  const double e2 = error(0.01);
  out.detail << "two-body errors " << e1 << ", " << e2 << " ratio " << e1 / e2 << "; ";
  out.require(ratio_error(e1 / e2) <= 0.3, "two-body O(dt^2)");

  std::mt19937_64 rng(2024);
  const Grid small = Grid::make(1, 8, 4.0);
  double reduce_gap = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const NBodyState psi = oracle::random_symmetric_three(small, rng);
    const oracle::Dense brute = oracle::reduce_three_to_one(psi);
    reduce_gap = std::max(reduce_gap, (reduce(psi, 1).matrix - brute).cwiseAbs().maxCoeff());
    reduce_gap = std::max(reduce_gap, (reduce(compress(psi), 1).matrix - brute).cwiseAbs().maxCoeff());
  }
  out.detail << "reduce gap " << reduce_gap << "; ";
  out.require(reduce_gap <= 1e-12, "reduce");

  double norm_gap = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const oracle::Dense x = Eigen::MatrixXcd::Random(50, 50);
    const oracle::Dense herm = 0.5 * (x + x.adjoint());
    norm_gap = std::max(norm_gap, std::abs(trace_norm(x) - oracle::trace_norm_via_gram(x)));
    norm_gap = std::max(norm_gap, std::abs(trace_norm(herm) - oracle::trace_norm_via_gram(herm)));
  }
  out.detail << "trace norm gap " << norm_gap;
  out.require(norm_gap <= 1e-9, "trace norm");
}

ExperimentConfig determinism_config() {
  ExperimentConfig c;
  c.grid.points = 16;
  c.grid.box = 8.0;
  c.particles = {2, 3, 4};
  c.final_time = 0.1;
  c.seed = 17;
  return c;
}

// 9. Byte-identical CSV across runs and thread-count independence.
void determinism(Outcome& out, const fs::path& dir) {
  const ExperimentConfig c = determinism_config();
  ExperimentConfig ops = c;
  ops.study = StudyKind::opcheck;
  ops.opcheck.fuzz_pairs = 50;
  ops.opcheck.partial_trace_instances = 10;
  ops.opcheck.hardy_points = 4;
  ops.opcheck.hardy_box = 4.0;
  ops.opcheck.domination_points = 4;
  for (const ExperimentConfig& cfg : {c, ops}) {
    const std::string stem = study_name(cfg.study);
    const auto first = persist_study(run_study(cfg), (dir / "run_a").string(), stem);
    const auto second = persist_study(run_study(cfg), (dir / "run_b").string(), stem);
    const bool same = slurp(first) == slurp(second);
    out.detail << stem << " CSV identical: " << (same ? "yes" : "no") << "; ";
    out.require(same, stem + " byte identity");
  }

  const int many = std::max(2, max_thread_count());
  set_thread_count(1);
  const StudyResult serial = run_convergence_study(c);
  set_thread_count(many);
  const StudyResult parallel = run_convergence_study(c);
  set_thread_count(0);
  double worst = 0.0;
  for (const std::string col : {"D1", "D2", "F"}) {
    const auto x = serial.column(col);
    const auto y = parallel.column(col);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (std::isnan(x[i]) && std::isnan(y[i])) continue;
      worst = std::max(worst, std::isnan(x[i]) != std::isnan(y[i]) ? 1.0 : std::abs(x[i] - y[i]));
    }
  }
  out.detail << "threads 1 vs " << many << ": max difference " << worst;
  out.require(worst <= 1e-12, "thread agreement");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria for the mean-field lab"};
  std::string out_dir = (fs::temp_directory_path() / "meanfield_acceptance").string();
  std::vector<int> only;
  app.add_option("--out", out_dir, "Directory for persisted study outputs");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "conservation", 60.0, conservation},
      {2, "exact factorization", 60.0, factorization},
      {3, "mean-field convergence trend", 600.0, convergence},
      {4, "hierarchy residuals", 600.0, hierarchy},
      {5, "cutoff and smoothing", 600.0, cutoff_and_smoothing},
      {6, "trace calculus", 120.0, trace_calculus},
      {7, "operator inequalities", 300.0, operator_inequalities},
      {8, "oracle equivalences", 300.0, oracle_equivalences},
      {9, "determinism", 300.0, determinism},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    const fs::path dir = fs::path(out_dir) / ("criterion_" + std::to_string(c.id));
    fs::create_directories(dir);
    Outcome outcome;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(outcome, dir);
    } catch (const std::exception& e) {
      outcome.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    outcome.require(seconds < c.budget_seconds, "runtime budget " + std::to_string(c.budget_seconds) + " s");
    failures += outcome.pass ? 0 : 1;
    std::printf("%s %d %s (%.1f s): %s\n", outcome.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), seconds,
                outcome.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
