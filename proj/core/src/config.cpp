#include "meanfield/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "meanfield/errors.hpp"

namespace mf {

namespace {

using json = nlohmann::ordered_json;

constexpr std::array<std::pair<StudyKind, const char*>, 7> kStudyNames{{
    {StudyKind::hartree, "hartree"},
    {StudyKind::nbody, "nbody"},
    {StudyKind::convergence, "convergence"},
    {StudyKind::cutoff, "cutoff-study"},
    {StudyKind::smoothing, "smoothing-study"},
    {StudyKind::hierarchy, "hierarchy-residual"},
    {StudyKind::opcheck, "opcheck"},
}};

// Reads the keys of one JSON object into fields, rejecting unknown keys.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(where("") + " must be an object");
  }

  template <class T>
  ObjectReader& field(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return *this;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
    return *this;
  }

  template <class F>
  ObjectReader& object(const char* key, F&& read) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it != j_.end()) read(*it, where(key));
    return *this;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown configuration key " + where(it.key()));
    }
  }

 private:
  std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "configuration" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json to_object(const ExperimentConfig& c) {
  json j;
  j["study"] = study_name(c.study);
  j["grid"] = {{"dim", c.grid.dim}, {"points", c.grid.points}, {"box", c.grid.box}};
  j["potential"] = {{"sign", c.potential.sign},
                    {"mu", c.potential.mu},
                    {"softening_spacings", c.potential.softening_spacings},
                    {"core", c.potential.core},
                    {"eps", c.potential.eps},
                    {"delta", c.potential.delta}};
  j["initial"] = {{"kind", c.initial.kind},   {"center", c.initial.center}, {"width", c.initial.width},
                  {"boost", c.initial.boost}, {"mode", c.initial.mode},     {"file", c.initial.file}};
  j["particles"] = c.particles;
  j["final_time"] = c.final_time;
  j["dt"] = c.dt;
  j["record_every"] = c.record_every;
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  j["max_entries"] = c.max_entries;
  j["convergence"] = {{"orders", c.convergence.orders}, {"pair_every", c.convergence.pair_every}};
  j["cutoff"] = {{"particles", c.cutoff.particles}, {"delta", c.cutoff.delta}};
  j["smoothing"] = {{"particles", c.smoothing.particles}};
  j["hierarchy"] = {{"particles", c.hierarchy.particles},
                    {"order", c.hierarchy.order},
                    {"quadrature", c.hierarchy.quadrature},
                    {"trajectory", c.hierarchy.trajectory}};
  const auto& o = c.opcheck;
  j["opcheck"] = {{"fuzz_pairs", o.fuzz_pairs},
                  {"fuzz_min_dim", o.fuzz_min_dim},
                  {"fuzz_max_dim", o.fuzz_max_dim},
                  {"partial_trace_instances", o.partial_trace_instances},
                  {"partial_trace_dims", o.partial_trace_dims},
                  {"duality_tests", o.duality_tests},
                  {"hardy_points", o.hardy_points},
                  {"hardy_box", o.hardy_box},
                  {"hardy_softenings", o.hardy_softenings},
                  {"hardy_tolerance_factor", o.hardy_tolerance_factor},
                  {"domination_points", o.domination_points},
                  {"domination_box", o.domination_box},
                  {"kappa", o.kappa},
                  {"lambdas", o.lambdas}};
  return j;
}

ExperimentConfig from_object(const json& j) {
  ExperimentConfig c;
  std::string study = study_name(c.study);
  ObjectReader(j, "")
      .field("study", study)
      .object("grid",
              [&](const json& g, const std::string& p) {
                ObjectReader(g, p).field("dim", c.grid.dim).field("points", c.grid.points).field("box", c.grid.box).finish();
              })
      .object("potential",
              [&](const json& g, const std::string& p) {
                ObjectReader(g, p)
                    .field("sign", c.potential.sign)
                    .field("mu", c.potential.mu)
                    .field("softening_spacings", c.potential.softening_spacings)
                    .field("core", c.potential.core)
                    .field("eps", c.potential.eps)
                    .field("delta", c.potential.delta)
                    .finish();
              })
      .object("initial",
              [&](const json& g, const std::string& p) {
                ObjectReader(g, p)
                    .field("kind", c.initial.kind)
                    .field("center", c.initial.center)
                    .field("width", c.initial.width)
                    .field("boost", c.initial.boost)
                    .field("mode", c.initial.mode)
                    .field("file", c.initial.file)
                    .finish();
              })
      .field("particles", c.particles)
      .field("final_time", c.final_time)
      .field("dt", c.dt)
      .field("record_every", c.record_every)
      .field("output_dir", c.output_dir)
      .field("seed", c.seed)
      .field("max_entries", c.max_entries)
      .object("convergence",
              [&](const json& g, const std::string& p) {
                ObjectReader(g, p).field("orders", c.convergence.orders).field("pair_every", c.convergence.pair_every).finish();
              })
      .object("cutoff",
              [&](const json& g, const std::string& p) {
                ObjectReader(g, p).field("particles", c.cutoff.particles).field("delta", c.cutoff.delta).finish();
              })
      .object("smoothing",
              [&](const json& g, const std::string& p) {
                ObjectReader(g, p).field("particles", c.smoothing.particles).finish();
              })
      .object("hierarchy",
              [&](const json& g, const std::string& p) {
                ObjectReader(g, p)
                    .field("particles", c.hierarchy.particles)
                    .field("order", c.hierarchy.order)
                    .field("quadrature", c.hierarchy.quadrature)
                    .field("trajectory", c.hierarchy.trajectory)
                    .finish();
              })
      .object("opcheck",
              [&](const json& g, const std::string& p) {
                auto& o = c.opcheck;
                ObjectReader(g, p)
                    .field("fuzz_pairs", o.fuzz_pairs)
                    .field("fuzz_min_dim", o.fuzz_min_dim)
                    .field("fuzz_max_dim", o.fuzz_max_dim)
                    .field("partial_trace_instances", o.partial_trace_instances)
                    .field("partial_trace_dims", o.partial_trace_dims)
                    .field("duality_tests", o.duality_tests)
                    .field("hardy_points", o.hardy_points)
                    .field("hardy_box", o.hardy_box)
                    .field("hardy_softenings", o.hardy_softenings)
                    .field("hardy_tolerance_factor", o.hardy_tolerance_factor)
                    .field("domination_points", o.domination_points)
                    .field("domination_box", o.domination_box)
                    .field("kappa", o.kappa)
                    .field("lambdas", o.lambdas)
                    .finish();
              })
      .finish();
  c.study = parse_study(study);
  return c;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

std::string study_name(StudyKind kind) {
  for (const auto& [k, name] : kStudyNames) {
    if (k == kind) return name;
  }
  throw ConfigError("unknown study kind");
}

StudyKind parse_study(const std::string& name) {
  for (const auto& [k, n] : kStudyNames) {
    if (name == n) return k;
  }
  throw ConfigError("unknown study '" + name + "'");
}

std::string to_json(const ExperimentConfig& config) { return to_object(config).dump(2) + "\n"; }

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  ExperimentConfig c = from_object(j);
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos && eq > 0, "override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json j = to_object(config);
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    require(node->is_object() && node->contains(part), "unknown override key " + key);
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  // Keep string fields as strings even when the text parses as a number.
  if (node->is_string() && !value.is_string()) value = text;
  *node = value;
  ExperimentConfig updated = from_object(j);
  validate(updated);
  config = std::move(updated);
}

void validate(const ExperimentConfig& c) {
  require(c.grid.dim == 1 || c.grid.dim == 3, "grid.dim must be 1 or 3");
  require(c.grid.points >= 4 && (c.grid.points & (c.grid.points - 1)) == 0,
          "grid.points must be a power of two >= 4");
  require(c.grid.box > 0.0, "grid.box must be positive");
  require(c.potential.sign == 1 || c.potential.sign == -1, "potential.sign must be +1 or -1");
  require(c.potential.mu >= 0.0, "potential.mu must be non-negative");
  require(c.potential.softening_spacings >= 0.0, "potential.softening_spacings must be non-negative");
  require(c.potential.core == "soft" || c.potential.core == "capped", "potential.core must be soft or capped");
  for (double e : c.potential.eps) require(e > 0.0, "potential.eps entries must be positive");
  for (double d : c.potential.delta) require(d >= 0.0, "potential.delta entries must be non-negative");
  require(c.initial.kind == "gaussian" || c.initial.kind == "plane-wave" || c.initial.kind == "file",
          "initial.kind must be gaussian, plane-wave or file");
  require(c.initial.width > 0.0, "initial.width must be positive");
  require(c.initial.kind != "file" || !c.initial.file.empty(), "initial.file is required for kind file");
  require(!c.particles.empty(), "particles must not be empty");
  for (int n : c.particles) require(n >= 1, "particle counts must be >= 1");
  require(c.final_time >= 0.0, "final_time must be non-negative");
  require(c.dt > 0.0, "dt must be positive");
  require(c.record_every >= 1, "record_every must be >= 1");
  require(c.max_entries >= 1, "max_entries must be positive");
  for (int k : c.convergence.orders) require(k == 1 || k == 2, "convergence.orders entries must be 1 or 2");
  require(c.convergence.pair_every >= 1, "convergence.pair_every must be >= 1");
  require(c.cutoff.particles >= 2, "cutoff.particles must be >= 2");
  require(c.cutoff.delta >= 0.0, "cutoff.delta must be non-negative");
  require(c.smoothing.particles >= 1, "smoothing.particles must be >= 1");
  require(c.hierarchy.particles >= 2, "hierarchy.particles must be >= 2");
  require(c.hierarchy.order == 1 || c.hierarchy.order == 2, "hierarchy.order must be 1 or 2");
  require(c.hierarchy.order < c.hierarchy.particles, "hierarchy.order must be below hierarchy.particles");
  require(c.hierarchy.quadrature == "simpson" || c.hierarchy.quadrature == "trapezoid",
          "hierarchy.quadrature must be simpson or trapezoid");
  const auto& o = c.opcheck;
  require(o.fuzz_pairs >= 0 && o.partial_trace_instances >= 0 && o.duality_tests >= 0,
          "opcheck counts must be non-negative");
  require(o.fuzz_min_dim >= 1 && o.fuzz_max_dim >= o.fuzz_min_dim && o.fuzz_max_dim <= 200,
          "opcheck fuzz dimensions must satisfy 1 <= min <= max <= 200");
  require(o.partial_trace_dims[0] >= 1 && o.partial_trace_dims[1] >= 1 &&
              o.partial_trace_dims[0] * o.partial_trace_dims[1] <= 4096,
          "opcheck.partial_trace_dims must be positive with product <= 4096");
  require(o.hardy_box > 0.0 && o.domination_box > 0.0, "opcheck boxes must be positive");
  for (double a : o.hardy_softenings) require(a > 0.0, "opcheck.hardy_softenings must be positive");
  require(o.kappa >= 0.0 && o.kappa < 3.0, "opcheck.kappa must lie in [0, 3)");
  for (double l : o.lambdas) require(l > 0.0, "opcheck.lambdas must be positive");
}

std::string default_output_dir() {
  const char* env = std::getenv("MEANFIELD_OUTPUT_DIR");
  return env != nullptr && *env != '\0' ? std::string(env) : std::string("results");
}

std::string resolved_output_dir(const ExperimentConfig& config) {
  return config.output_dir.empty() ? default_output_dir() : config.output_dir;
}

Grid make_grid(const ExperimentConfig& config) {
  return Grid::make(config.grid.dim, config.grid.points, config.grid.box);
}

PotentialParams potential_params(const ExperimentConfig& config, const Grid& grid, int particles, double eps) {
  PotentialParams p;
  p.sign = config.potential.sign;
  p.mu = config.potential.mu;
  p.eps = eps;
  p.particles = particles;
  p.softening = config.potential.softening_spacings * grid.spacing();
  p.core = config.potential.core == "capped" ? CoreMode::capped : CoreMode::soft;
  return p;
}

RealField pair_potential(const ExperimentConfig& config, const Grid& grid) {
  const PotentialParams p = potential_params(config, grid, 1, 1.0);
  return coulomb_potential(grid, p.sign, p.mu, p.softening, p.core);
}

WaveFn initial_state(const ExperimentConfig& config, const Grid& grid) {
  const auto& s = config.initial;
  if (s.kind == "gaussian") return WaveFn::gaussian(grid, s.center, s.width, s.boost);
  if (s.kind == "plane-wave") return WaveFn::plane_wave(grid, s.mode);
  std::ifstream in(s.file);
  if (!in) throw ConfigError("cannot read initial state file " + s.file);
  std::vector<cplx> values;
  double re = 0.0;
  double im = 0.0;
  while (in >> re >> im) values.emplace_back(re, im);
  if (values.size() != grid.size()) {
    throw ConfigError("initial state file has " + std::to_string(values.size()) + " values, grid needs " +
                      std::to_string(grid.size()));
  }
  WaveFn psi(grid, std::move(values));
  if (!psi.all_finite() || psi.norm() == 0.0) throw ConfigError("initial state file holds an invalid state");
  psi.normalize();
  return psi;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace mf
