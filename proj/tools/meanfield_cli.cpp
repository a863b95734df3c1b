// Command-line driver: one subcommand per study, results written as CSV plus
// a JSON sidecar under the output directory.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "meanfield/config.hpp"
#include "meanfield/errors.hpp"
#include "meanfield/parallel.hpp"
#include "meanfield/persist.hpp"
#include "meanfield/studies.hpp"

namespace {

struct Globals {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
  std::vector<std::string> overrides;
  bool dump_config = false;
};

int run(mf::StudyKind kind, const Globals& g) {
  mf::ExperimentConfig config = g.config_path.empty() ? mf::ExperimentConfig{} : mf::load_config(g.config_path);
  config.study = kind;
  for (const auto& o : g.overrides) mf::apply_override(config, o);
  if (g.seed_given) config.seed = g.seed;
  if (!g.out_dir.empty()) config.output_dir = g.out_dir;
  mf::validate(config);
  if (g.dump_config) {
    std::cout << mf::to_json(config);
    return 0;
  }
  mf::set_thread_count(g.threads);

  const std::string dir = mf::resolved_output_dir(config);
  const std::string stem = mf::study_name(kind);
  mf::StudyResult result;
  if (kind == mf::StudyKind::nbody) {
    mf::TrajectoryFile traj;
    result = mf::run_nbody(config, &traj);
    const auto path = (std::filesystem::path(dir) / "nbody_trajectory.bbgk").string();
    std::filesystem::create_directories(dir);
    mf::save_trajectory(traj, path);
    std::cout << "trajectory: " << path << "\n";
  } else {
    result = mf::run_study(config);
  }
  const std::string csv = mf::persist_study(result, dir, stem);
  std::cout << "rows: " << result.rows.size() << "\n";
  for (const auto& [k, v] : result.summary) std::cout << k << " = " << v << "\n";
  std::cout << "csv: " << csv << "\n";
  std::printf("wall: %.2f s\n", result.wall_seconds);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field limit laboratory: N-body, Hartree and hierarchy studies"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON configuration file");
  app.add_option("--out", g.out_dir, "Output directory (default $MEANFIELD_OUTPUT_DIR or ./results)");
  app.add_option_function<std::uint64_t>(
      "--seed", [&](const std::uint64_t& s) {
        g.seed = s;
        g.seed_given = true;
      }, "RNG seed");
  app.add_option("--threads", g.threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  app.add_option("--override", g.overrides, "Dotted key=value configuration override (repeatable)");
  app.add_flag("--dump-config", g.dump_config, "Print the resolved configuration and exit");

  const std::vector<std::pair<mf::StudyKind, const char*>> commands{
      {mf::StudyKind::hartree, "Evolve the Hartree equation"},
      {mf::StudyKind::nbody, "Evolve the N-body state and persist its trajectory"},
      {mf::StudyKind::convergence, "Reduced density matrices against Hartree products over N"},
      {mf::StudyKind::cutoff, "Cutoff Hamiltonian against the full one over eps"},
      {mf::StudyKind::smoothing, "Smoothed against raw product data over delta"},
      {mf::StudyKind::hierarchy, "Finite and infinite hierarchy residuals"},
      {mf::StudyKind::opcheck, "Operator inequalities and trace identities"},
  };
  mf::StudyKind chosen = mf::StudyKind::convergence;
  for (const auto& [kind, help] : commands) {
    auto* sub = app.add_subcommand(mf::study_name(kind), help)->fallthrough();
    sub->callback([&chosen, k = kind] { chosen = k; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return run(chosen, g);
  } catch (const mf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const mf::MemoryGuardError& e) {
    std::cerr << "memory guard: " << e.what() << "\n";
    return 3;
  } catch (const mf::InstabilityError& e) {
    std::cerr << "numerical instability: " << e.what() << "\n";
    return 4;
  } catch (const mf::PersistenceError& e) {
    std::cerr << "persistence error: " << e.what() << "\n";
    return 5;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "persistence error: " << e.what() << "\n";
    return 5;
  }
}
