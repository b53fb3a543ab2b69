#pragma once

// Config-driven scenario runner: JSON schema -> construction -> propagation
// -> metrics -> CSV/JSON artifacts. The compute stages are separated from the
// file writing so tests and the acceptance harness can run them in-process.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nonspread/analysis.hpp"
#include "nonspread/calculus.hpp"
#include "nonspread/constructor.hpp"
#include "nonspread/core.hpp"
#include "nonspread/errors.hpp"
#include "nonspread/propagator.hpp"
#include "nonspread/specs.hpp"

namespace nonspread {

using json = nlohmann::ordered_json;

struct TimeBlock {
  double t_final = 1.0;
  double dt = 1e-3;
  int snapshot_stride = 1;
};

struct Thresholds {
  double nonspreading_linf = 1e-3;
  double flux = 1e-3;
  double phase = 1e-2;
  double energy = 1e-5;
  double consistency = kConsistencyTol;
};

struct References {
  std::optional<double> E_n;
  std::optional<double> E_cl;
};

struct ShapeRequest {
  enum class Kind { eigenstate, airy, gaussian };
  Kind kind = Kind::eigenstate;
  int eigen_index = 0;
  double sigma0 = 1.0;
};

struct MotionRequest {
  bool from_constraint = false;
  double B = 0.0;   // constraint parameter when from_constraint
  double v0 = 0.0;  // initial velocity when from_constraint
  MotionSpec motion = MotionRest{};
};

struct ScenarioConfig {
  std::string name = "scenario";
  UnitSystem units;
  Grid grid;
  PotentialSpec potential;
  MotionRequest motion;
  ShapeRequest shape;
  TimeBlock time;
  AnalysisWindow window;
  References references;
  Thresholds thresholds;
};

// ----------------------------------------------------------- JSON parsing

namespace cfgdetail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& ctx) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) ok = true;
    if (!ok)
      throw InvalidConfig("config: unknown key '" + item.key() + "' in " + ctx);
  }
}

inline const json& member(const json& j, const char* key, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end())
    throw InvalidConfig("config: missing key '" + std::string(key) + "' in " + ctx);
  return *it;
}

inline double num(const json& j, const std::string& ctx) {
  if (!j.is_number())
    throw InvalidConfig("config: " + ctx + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v))
    throw InvalidConfig("config: " + ctx + " must be finite");
  return v;
}

inline double num_field(const json& j, const char* key, const std::string& ctx) {
  return num(member(j, key, ctx), ctx + "." + key);
}

inline double num_or(const json& j, const char* key, double fallback,
                     const std::string& ctx) {
  auto it = j.find(key);
  return it == j.end() ? fallback : num(*it, ctx + "." + key);
}

inline int int_field(const json& j, const char* key, const std::string& ctx) {
  const json& v = member(j, key, ctx);
  if (!v.is_number_integer())
    throw InvalidConfig("config: " + ctx + "." + key + " must be an integer");
  return v.get<int>();
}

inline int int_or(const json& j, const char* key, int fallback,
                  const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer())
    throw InvalidConfig("config: " + ctx + "." + key + " must be an integer");
  return it->get<int>();
}

inline std::string str_field(const json& j, const char* key,
                             const std::string& ctx) {
  const json& v = member(j, key, ctx);
  if (!v.is_string())
    throw InvalidConfig("config: " + ctx + "." + key + " must be a string");
  return v.get<std::string>();
}

inline ForceSpec parse_force(const json& j, const std::string& ctx) {
  if (!j.is_object()) throw InvalidConfig("config: " + ctx + " must be an object");
  const std::string type = str_field(j, "type", ctx);
  if (type == "constant") {
    check_keys(j, {"type", "F0"}, ctx);
    return ForceConstant{num_field(j, "F0", ctx)};
  }
  if (type == "sinusoid") {
    check_keys(j, {"type", "F0", "nu", "phase"}, ctx);
    return ForceSinusoid{num_field(j, "F0", ctx), num_field(j, "nu", ctx),
                         num_or(j, "phase", 0.0, ctx)};
  }
  if (type == "tabulated") {
    check_keys(j, {"type", "t0", "dt", "values"}, ctx);
    const json& vals = member(j, "values", ctx);
    if (!vals.is_array())
      throw InvalidConfig("config: " + ctx + ".values must be an array");
    real_array values;
    for (const auto& v : vals) values.push_back(num(v, ctx + ".values[]"));
    return make_force_tabulated(num_field(j, "t0", ctx), num_field(j, "dt", ctx),
                                std::move(values));
  }
  throw InvalidConfig("config: unknown force type '" + type + "' in " + ctx);
}

inline MotionSpec parse_motion_spec(const json& j, const UnitSystem& units,
                                    const std::string& ctx) {
  if (!j.is_object()) throw InvalidConfig("config: " + ctx + " must be an object");
  const std::string type = str_field(j, "type", ctx);
  if (type == "rest") {
    check_keys(j, {"type"}, ctx);
    return MotionRest{};
  }
  if (type == "polynomial") {
    check_keys(j, {"type", "coeffs"}, ctx);
    const json& cj = member(j, "coeffs", ctx);
    if (!cj.is_array())
      throw InvalidConfig("config: " + ctx + ".coeffs must be an array");
    real_array coeffs;
    for (const auto& c : cj) coeffs.push_back(num(c, ctx + ".coeffs[]"));
    return make_motion_polynomial(std::move(coeffs));
  }
  if (type == "sinusoid") {
    check_keys(j, {"type", "x0", "omega", "phase"}, ctx);
    return MotionSinusoid{num_field(j, "x0", ctx), num_field(j, "omega", ctx),
                          num_or(j, "phase", 0.0, ctx)};
  }
  if (type == "constant_accel") {
    check_keys(j, {"type", "B"}, ctx);
    return make_motion_constant_accel(num_field(j, "B", ctx), units.mass);
  }
  throw InvalidConfig("config: unknown motion type '" + type + "' in " + ctx);
}

inline PotentialSpec parse_potential(const json& j, const UnitSystem& units,
                                     const std::string& ctx) {
  if (!j.is_object()) throw InvalidConfig("config: " + ctx + " must be an object");
  const std::string type = str_field(j, "type", ctx);
  PotentialSpec pot;
  pot.absorber_gamma = num_or(j, "absorber_gamma", 0.0, ctx);
  if (pot.absorber_gamma < 0.0)
    throw InvalidConfig("config: " + ctx + ".absorber_gamma must be >= 0");
  if (type == "free") {
    check_keys(j, {"type", "absorber_gamma"}, ctx);
    pot.real = FreeSpace{};
  } else if (type == "uniform_force") {
    check_keys(j, {"type", "absorber_gamma", "force"}, ctx);
    pot.real = UniformForce{parse_force(member(j, "force", ctx), ctx + ".force")};
  } else if (type == "harmonic") {
    check_keys(j, {"type", "absorber_gamma", "omega0", "omega_ramp"}, ctx);
    Harmonic h;
    h.omega0 = num_field(j, "omega0", ctx);
    h.omega_ramp = num_or(j, "omega_ramp", 0.0, ctx);
    if (!(h.omega0 > 0.0))
      throw InvalidConfig("config: " + ctx + ".omega0 must be > 0");
    pot.real = h;
  } else if (type == "power_law") {
    check_keys(j, {"type", "absorber_gamma", "lambda", "n"}, ctx);
    pot.real = make_power_law(num_field(j, "lambda", ctx), int_field(j, "n", ctx));
  } else if (type == "moving_harmonic_driven") {
    check_keys(j, {"type", "absorber_gamma", "omega", "motion", "offset_amplitude"},
               ctx);
    MovingHarmonicDriven p;
    p.omega = num_field(j, "omega", ctx);
    p.motion = parse_motion_spec(member(j, "motion", ctx), units, ctx + ".motion");
    p.offset_amplitude = num_or(j, "offset_amplitude", 0.0, ctx);
    pot.real = std::move(p);
  } else if (type == "moving_quartic_driven") {
    check_keys(j, {"type", "absorber_gamma", "lambda", "motion"}, ctx);
    MovingQuarticDriven p;
    p.lambda = num_field(j, "lambda", ctx);
    p.motion = parse_motion_spec(member(j, "motion", ctx), units, ctx + ".motion");
    pot.real = std::move(p);
  } else {
    throw InvalidConfig("config: unknown potential type '" + type + "' in " + ctx);
  }
  return pot;
}

}  // namespace cfgdetail

inline ScenarioConfig parse_scenario(const json& j, std::string name) {
  using namespace cfgdetail;
  if (!j.is_object()) throw InvalidConfig("config: top level must be an object");
  check_keys(j,
             {"units", "grid", "potential", "motion", "shape", "time", "window",
              "references", "thresholds"},
             "top level");

  ScenarioConfig cfg;
  cfg.name = std::move(name);

  if (auto it = j.find("units"); it != j.end()) {
    check_keys(*it, {"hbar", "mass"}, "units");
    cfg.units.hbar = num_or(*it, "hbar", 1.0, "units");
    cfg.units.mass = num_or(*it, "mass", 1.0, "units");
  }
  try {
    validate(cfg.units);
  } catch (const Error& e) {
    throw InvalidConfig(std::string("config: ") + e.what());
  }

  {
    const json& g = member(j, "grid", "top level");
    check_keys(g, {"x_min", "x_max", "n_points"}, "grid");
    try {
      cfg.grid = make_grid(num_field(g, "x_min", "grid"),
                           num_field(g, "x_max", "grid"),
                           int_field(g, "n_points", "grid"));
    } catch (const Error& e) {
      throw InvalidConfig(std::string("config: grid: ") + e.what());
    }
  }

  cfg.potential = parse_potential(member(j, "potential", "top level"), cfg.units,
                                  "potential");

  {
    const json& m = member(j, "motion", "top level");
    if (!m.is_object())
      throw InvalidConfig("config: motion must be an object");
    const std::string type = str_field(m, "type", "motion");
    if (type == "from_constraint") {
      check_keys(m, {"type", "B", "v0"}, "motion");
      cfg.motion.from_constraint = true;
      cfg.motion.B = num_or(m, "B", 0.0, "motion");
      cfg.motion.v0 = num_or(m, "v0", 0.0, "motion");
    } else {
      cfg.motion.motion = parse_motion_spec(m, cfg.units, "motion");
    }
  }

  {
    const json& s = member(j, "shape", "top level");
    if (s.is_string()) {
      if (s.get<std::string>() != "airy")
        throw InvalidConfig("config: shape string must be \"airy\"");
      cfg.shape.kind = ShapeRequest::Kind::airy;
    } else if (s.is_object() && s.contains("eigen_index")) {
      check_keys(s, {"eigen_index"}, "shape");
      cfg.shape.kind = ShapeRequest::Kind::eigenstate;
      cfg.shape.eigen_index = int_field(s, "eigen_index", "shape");
      if (cfg.shape.eigen_index < 0)
        throw InvalidConfig("config: shape.eigen_index must be >= 0");
    } else if (s.is_object() && s.contains("gaussian")) {
      check_keys(s, {"gaussian"}, "shape");
      const json& gs = member(s, "gaussian", "shape");
      check_keys(gs, {"sigma0"}, "shape.gaussian");
      cfg.shape.kind = ShapeRequest::Kind::gaussian;
      cfg.shape.sigma0 = num_field(gs, "sigma0", "shape.gaussian");
      if (!(cfg.shape.sigma0 > 0.0))
        throw InvalidConfig("config: shape.gaussian.sigma0 must be > 0");
    } else {
      throw InvalidConfig(
          "config: shape must be \"airy\", {eigen_index}, or {gaussian}");
    }
  }

  if (auto it = j.find("time"); it != j.end()) {
    check_keys(*it, {"t_final", "dt", "snapshot_stride"}, "time");
    cfg.time.t_final = num_field(*it, "t_final", "time");
    cfg.time.dt = num_field(*it, "dt", "time");
    cfg.time.snapshot_stride = int_or(*it, "snapshot_stride", 1, "time");
    if (!(cfg.time.dt > 0.0))
      throw InvalidConfig("config: time.dt must be > 0");
    if (cfg.time.t_final < 0.0)
      throw InvalidConfig("config: time.t_final must be >= 0");
    if (cfg.time.snapshot_stride < 1)
      throw InvalidConfig("config: time.snapshot_stride must be >= 1");
  }

  if (auto it = j.find("window"); it != j.end()) {
    check_keys(*it, {"fraction", "density_floor"}, "window");
    cfg.window.fraction = num_or(*it, "fraction", 0.6, "window");
    cfg.window.density_floor = num_or(*it, "density_floor", 1e-6, "window");
    if (!(cfg.window.fraction > 0.0) || cfg.window.fraction > 1.0)
      throw InvalidConfig("config: window.fraction must lie in (0, 1]");
    if (!(cfg.window.density_floor >= 0.0))
      throw InvalidConfig("config: window.density_floor must be >= 0");
  }

  if (auto it = j.find("references"); it != j.end()) {
    check_keys(*it, {"E_n", "E_cl"}, "references");
    if (it->contains("E_n"))
      cfg.references.E_n = num_field(*it, "E_n", "references");
    if (it->contains("E_cl"))
      cfg.references.E_cl = num_field(*it, "E_cl", "references");
  }

  if (auto it = j.find("thresholds"); it != j.end()) {
    check_keys(*it,
               {"nonspreading_linf", "flux", "phase", "energy", "consistency"},
               "thresholds");
    cfg.thresholds.nonspreading_linf =
        num_or(*it, "nonspreading_linf", cfg.thresholds.nonspreading_linf,
               "thresholds");
    cfg.thresholds.flux = num_or(*it, "flux", cfg.thresholds.flux, "thresholds");
    cfg.thresholds.phase =
        num_or(*it, "phase", cfg.thresholds.phase, "thresholds");
    cfg.thresholds.energy =
        num_or(*it, "energy", cfg.thresholds.energy, "thresholds");
    cfg.thresholds.consistency =
        num_or(*it, "consistency", cfg.thresholds.consistency, "thresholds");
    for (double v : {cfg.thresholds.nonspreading_linf, cfg.thresholds.flux,
                     cfg.thresholds.phase, cfg.thresholds.energy,
                     cfg.thresholds.consistency})
      if (!(v > 0.0))
        throw InvalidConfig("config: thresholds must be positive");
  }

  return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw InvalidConfig("config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const std::exception& e) {
    throw InvalidConfig("config: JSON parse error in '" + path + "': " + e.what());
  }
  return parse_scenario(j, std::filesystem::path(path).stem().string());
}

// ----------------------------------------------------------- compute stages

struct ConstructArtifacts {
  real_array times;  // full step lattice, 0..t_final
  Grid q_grid;       // co-moving grid covering x - d(t) for all lattice times
  MotionSpec motion = MotionRest{};
  ConsistencyReport consistency;
  std::optional<EffectivePotential> veff;
  std::optional<ShapeSolution> shape;
  std::optional<PhaseTrack> phase;
};

namespace rundetail {

inline PotentialSpec strip_absorber(const PotentialSpec& pot) {
  return PotentialSpec{pot.real, 0.0};
}

inline real_array step_lattice(const TimeBlock& tb) {
  PropagationPlan probe;
  probe.dt = tb.dt;
  probe.t_final = tb.t_final;
  const int n = probe.n_steps();
  real_array times(n + 1);
  for (int i = 0; i <= n; ++i) times[i] = i * tb.dt;
  return times;
}

inline Grid comoving_grid(const Grid& grid, const MotionSpec& motion,
                          const real_array& times) {
  double d_min = 0.0, d_max = 0.0;
  for (double t : times) {
    const double d = motion_eval(motion, t).d;
    d_min = std::min(d_min, d);
    d_max = std::max(d_max, d);
  }
  const double pad = 2.0 * grid.dx;
  const int n_left = static_cast<int>(std::ceil((d_max + pad) / grid.dx - 1e-12));
  const int n_right = static_cast<int>(std::ceil((-d_min + pad) / grid.dx - 1e-12));
  return make_grid(grid.x_min - n_left * grid.dx, grid.x_max + n_right * grid.dx,
                   grid.n_points + n_left + n_right);
}

inline ShapeSolution gaussian_shape(const Grid& q_grid, double sigma0) {
  ShapeSolution sol;
  sol.q_grid = q_grid;
  sol.E_eff = 0.0;
  sol.node_count = 0;
  sol.normalizable = true;
  const double amp =
      std::pow(2.0 * std::numbers::pi * sigma0 * sigma0, -0.25);
  sol.f.resize(q_grid.n_points);
  for (int i = 0; i < q_grid.n_points; ++i) {
    const double q = q_grid.x(i);
    sol.f[i] = amp * std::exp(-q * q / (4.0 * sigma0 * sigma0));
  }
  return sol;
}

}  // namespace rundetail

// Consistency check plus (when the pair is consistent, or when the caller
// wants to push ahead anyway) shape and phase construction.
inline ConstructArtifacts run_construct_stage(const ScenarioConfig& cfg,
                                              bool proceed_when_inconsistent) {
  ConstructArtifacts art;
  art.times = rundetail::step_lattice(cfg.time);
  const PotentialSpec real_pot = rundetail::strip_absorber(cfg.potential);

  art.motion = cfg.motion.from_constraint
                   ? motion_from_constraint(real_pot, cfg.motion.B, cfg.motion.v0,
                                            art.times, cfg.units)
                   : cfg.motion.motion;
  art.q_grid = rundetail::comoving_grid(cfg.grid, art.motion, art.times);

  const int n_steps = static_cast<int>(art.times.size()) - 1;
  real_array check_times(33);
  for (int i = 0; i <= 32; ++i)
    check_times[i] = cfg.time.dt * std::round(i * n_steps / 32.0);
  art.consistency =
      consistency_check(real_pot, art.motion, art.q_grid, check_times,
                        kFitDegree, cfg.thresholds.consistency);
  if (!art.consistency.consistent && !proceed_when_inconsistent) return art;

  art.veff = effective_potential(real_pot, art.motion, art.q_grid, 0.0, cfg.units);

  switch (cfg.shape.kind) {
    case ShapeRequest::Kind::eigenstate: {
      auto sols = solve_shape(*art.veff, cfg.shape.eigen_index + 1, cfg.units);
      art.shape = std::move(sols[cfg.shape.eigen_index]);
      break;
    }
    case ShapeRequest::Kind::airy: {
      auto sols = solve_shape(*art.veff, 1, cfg.units);
      if (sols[0].normalizable)
        throw InvalidConfig(
            "config: shape \"airy\" requires a linear effective potential");
      art.shape = std::move(sols[0]);
      break;
    }
    case ShapeRequest::Kind::gaussian:
      art.shape = rundetail::gaussian_shape(art.q_grid, cfg.shape.sigma0);
      break;
  }

  art.phase = build_phase(real_pot, art.motion, art.shape->E_eff, art.times,
                          cfg.units);
  return art;
}

struct VerifyArtifacts {
  ConstructArtifacts construct;
  std::vector<Snapshot> snapshots;
  InvarianceMetrics metrics;
  real_array residual_series;
  std::vector<EnergyReport> energies;  // empty when not applicable
  bool energy_applicable = false;
  std::optional<double> identity_gap;  // uniform-force constraint runs only

  bool v_consistency = false;
  bool v_nonspreading = false;
  bool v_flux = false;
  bool v_phase = false;
  bool v_energy = false;
  bool all_verdicts() const {
    return v_consistency && v_nonspreading && v_flux && v_phase && v_energy;
  }
};

inline bool potential_time_independent(const PotentialSpec& pot) {
  return std::visit(
      [](const auto& p) -> bool {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FreeSpace>) {
          return true;
        } else if constexpr (std::is_same_v<T, UniformForce>) {
          return std::holds_alternative<ForceConstant>(p.force);
        } else if constexpr (std::is_same_v<T, Harmonic>) {
          return p.omega_ramp == 0.0;
        } else if constexpr (std::is_same_v<T, PowerLaw>) {
          return true;
        } else if constexpr (std::is_same_v<T, MovingHarmonicDriven>) {
          return std::holds_alternative<MotionRest>(p.motion) &&
                 p.offset_amplitude == 0.0;
        } else {
          return std::holds_alternative<MotionRest>(p.motion);
        }
      },
      pot.real);
}

inline VerifyArtifacts run_verify_stage(const ScenarioConfig& cfg) {
  VerifyArtifacts out;
  out.construct = run_construct_stage(cfg, /*proceed_when_inconsistent=*/true);
  const ConstructArtifacts& art = out.construct;

  const WaveFunction psi0 =
      assemble_packet(*art.shape, art.motion, *art.phase, cfg.grid, 0.0);

  PropagationPlan plan;
  plan.dt = cfg.time.dt;
  plan.t_final = cfg.time.t_final;
  plan.snapshot_stride = cfg.time.snapshot_stride;
  plan.potential = cfg.potential;
  plan.units = cfg.units;
  plan.waive_dirichlet = !art.shape->normalizable;
  out.snapshots = propagate(psi0, plan);

  out.metrics = invariance_metrics(out.snapshots, *art.shape, art.motion,
                                   cfg.window, cfg.units);
  out.residual_series = schrodinger_residual_series(out.snapshots, cfg.potential,
                                                    cfg.units, cfg.window);

  out.energy_applicable = cfg.potential.is_real() && art.shape->normalizable;
  if (out.energy_applicable)
    for (const Snapshot& s : out.snapshots)
      out.energies.push_back(energy_expectation(
          s.wavefunction, cfg.potential, s.wavefunction.time, cfg.units));

  if (cfg.motion.from_constraint)
    if (const auto* uf = std::get_if<UniformForce>(&cfg.potential.real))
      out.identity_gap = uniform_force_identity_gap(uf->force, cfg.motion.B,
                                                    art.times, cfg.units);

  out.v_consistency = art.consistency.consistent;
  const auto max_of = [](const real_array& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };
  out.v_nonspreading =
      max_of(out.metrics.shape_err_Linf) <= cfg.thresholds.nonspreading_linf;
  out.v_flux = max_of(out.metrics.flux_residual) <= cfg.thresholds.flux;
  out.v_phase = max_of(out.metrics.phase_residual) <= cfg.thresholds.phase;

  if (cfg.references.E_n && cfg.references.E_cl && out.energy_applicable) {
    const double target = *cfg.references.E_n + *cfg.references.E_cl;
    double dev = 0.0;
    for (const EnergyReport& e : out.energies)
      dev = std::max(dev, std::abs(e.total - target));
    out.v_energy = dev <= cfg.thresholds.energy;
  } else if (out.energy_applicable &&
             potential_time_independent(cfg.potential)) {
    double lo = out.energies.front().total, hi = lo;
    for (const EnergyReport& e : out.energies) {
      lo = std::min(lo, e.total);
      hi = std::max(hi, e.total);
    }
    out.v_energy = (hi - lo) <= cfg.thresholds.energy;
  } else {
    out.v_energy = true;  // no meaningful reference to check against
  }
  return out;
}

// ----------------------------------------------------------- file artifacts

namespace io {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path) : path_(path), out_(path) {
    if (!out_) throw WriteFailure("cannot open '" + path.string() + "' for writing");
  }
  void comment(const std::string& key, const std::string& value) {
    out_ << "# " << key << "=" << value << "\n";
  }
  void comment(const std::string& key, double value) { comment(key, fmt(value)); }
  void header(const std::string& h) { out_ << h << "\n"; }
  void row(const std::vector<double>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (i) out_ << ',';
      out_ << fmt(vals[i]);
    }
    out_ << '\n';
  }
  void close() {
    out_.close();
    if (!out_) throw WriteFailure("failed writing '" + path_.string() + "'");
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

inline void write_consistency_csv(const std::filesystem::path& dir,
                                  const ConsistencyReport& rep) {
  CsvWriter csv(dir / "consistency.csv");
  csv.comment("tolerance", rep.tolerance_used);
  csv.comment("consistent", rep.consistent ? "1" : "0");
  csv.comment("max_samplewise_variation", rep.max_samplewise_variation);
  csv.header("power,max_variation");
  for (int p = 0; p <= rep.powers_checked; ++p)
    csv.row({static_cast<double>(p), rep.max_time_variation[p]});
  csv.close();
}

inline void write_shape_csv(const std::filesystem::path& dir,
                            const ShapeSolution& shape) {
  CsvWriter csv(dir / "shape.csv");
  csv.comment("E_eff", shape.E_eff);
  csv.comment("node_count", std::to_string(shape.node_count));
  csv.comment("normalizable", shape.normalizable ? "1" : "0");
  csv.header("q,f");
  for (int i = 0; i < shape.q_grid.n_points; ++i)
    csv.row({shape.q_grid.x(i), shape.f[i]});
  csv.close();
}

inline void write_phase_csv(const std::filesystem::path& dir,
                            const PhaseTrack& track) {
  CsvWriter csv(dir / "phase.csv");
  csv.comment("E_eff_used", track.E_eff_used);
  csv.header("t,d,d_dot,phi1,phi0");
  for (std::size_t i = 0; i < track.times.size(); ++i)
    csv.row({track.times[i], track.d[i], track.d_dot[i], track.phi1[i],
             track.phi0[i]});
  csv.close();
}

inline void write_metrics_csv(const std::filesystem::path& dir,
                              const InvarianceMetrics& m,
                              const real_array& residual_series) {
  CsvWriter csv(dir / "metrics.csv");
  csv.header(
      "t,shape_err_L2,shape_err_Linf,centroid_err,norm,flux_residual,"
      "phase_residual,residual_schrodinger");
  for (std::size_t i = 0; i < m.times.size(); ++i)
    csv.row({m.times[i], m.shape_err_L2[i], m.shape_err_Linf[i],
             m.centroid_err[i], m.norm[i], m.flux_residual[i],
             m.phase_residual[i], residual_series[i]});
  csv.close();
}

inline std::string density_filename(int step_index) {
  return "density_" + std::to_string(step_index) + ".csv";
}

inline void write_density_csv(const std::filesystem::path& dir,
                              const Snapshot& snap) {
  CsvWriter csv(dir / density_filename(snap.step_index));
  csv.comment("t", snap.wavefunction.time);
  csv.header("x,re,im,density");
  const Grid& g = snap.wavefunction.grid;
  for (int i = 0; i < g.n_points; ++i) {
    const std::complex<double> v = snap.wavefunction.values[i];
    csv.row({g.x(i), v.real(), v.imag(), std::norm(v)});
  }
  csv.close();
}

inline void write_energy_csv(const std::filesystem::path& dir,
                             const std::vector<Snapshot>& snapshots,
                             const std::vector<EnergyReport>& energies) {
  CsvWriter csv(dir / "energy.csv");
  csv.header("t,kinetic,potential,total");
  for (std::size_t i = 0; i < energies.size(); ++i)
    csv.row({snapshots[i].wavefunction.time, energies[i].kinetic,
             energies[i].potential, energies[i].total});
  csv.close();
}

inline void write_report_json(const std::filesystem::path& dir,
                              const ScenarioConfig& cfg,
                              const VerifyArtifacts& v) {
  const auto max_of = [](const real_array& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
  };
  json rep;
  rep["scenario"] = cfg.name;
  rep["verdicts"] = {{"consistency", v.v_consistency},
                     {"nonspreading", v.v_nonspreading},
                     {"flux_ok", v.v_flux},
                     {"phase_ok", v.v_phase},
                     {"energy_ok", v.v_energy}};
  rep["thresholds"] = {{"nonspreading_linf", cfg.thresholds.nonspreading_linf},
                       {"flux", cfg.thresholds.flux},
                       {"phase", cfg.thresholds.phase},
                       {"energy", cfg.thresholds.energy},
                       {"consistency", cfg.thresholds.consistency}};

  json files;
  files["consistency"] = "consistency.csv";
  files["shape"] = "shape.csv";
  files["phase"] = "phase.csv";
  files["metrics"] = "metrics.csv";
  if (!v.energies.empty()) files["energy"] = "energy.csv";
  json dens = json::array();
  for (const Snapshot& s : v.snapshots) dens.push_back(density_filename(s.step_index));
  files["density"] = std::move(dens);
  rep["files"] = std::move(files);

  json summary;
  summary["E_eff"] = v.construct.shape->E_eff;
  summary["node_count"] = v.construct.shape->node_count;
  summary["normalizable"] = v.construct.shape->normalizable;
  summary["offending_powers"] = v.construct.consistency.offending_powers;
  summary["max_samplewise_variation"] =
      v.construct.consistency.max_samplewise_variation;
  summary["max_shape_err_L2"] = max_of(v.metrics.shape_err_L2);
  summary["max_shape_err_Linf"] = max_of(v.metrics.shape_err_Linf);
  summary["max_abs_centroid_err"] = max_of(v.metrics.centroid_err);
  summary["final_norm"] = v.metrics.norm.back();
  summary["max_flux_residual"] = max_of(v.metrics.flux_residual);
  summary["max_phase_residual"] = max_of(v.metrics.phase_residual);
  summary["max_residual_schrodinger"] = max_of(v.residual_series);
  json energy;
  energy["applicable"] = v.energy_applicable;
  if (v.energy_applicable) {
    double lo = v.energies.front().total, hi = lo;
    for (const EnergyReport& e : v.energies) {
      lo = std::min(lo, e.total);
      hi = std::max(hi, e.total);
    }
    energy["total_min"] = lo;
    energy["total_max"] = hi;
    if (cfg.references.E_n) energy["E_n_reference"] = *cfg.references.E_n;
    if (cfg.references.E_cl) energy["E_cl_reference"] = *cfg.references.E_cl;
  }
  summary["energy"] = std::move(energy);
  if (v.identity_gap) summary["uniform_force_identity_gap"] = *v.identity_gap;
  rep["summary"] = std::move(summary);

  std::ofstream out(dir / "report.json");
  if (!out) throw WriteFailure("cannot open report.json for writing");
  out << rep.dump(2) << "\n";
  out.close();
  if (!out) throw WriteFailure("failed writing report.json");
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw WriteFailure("cannot create output directory '" + dir.string() + "'");
}

// Full construct command: returns the process exit code.
inline int run_construct(const ScenarioConfig& cfg, const std::string& out_dir) {
  const std::filesystem::path dir(out_dir);
  ensure_dir(dir);
  const ConstructArtifacts art =
      run_construct_stage(cfg, /*proceed_when_inconsistent=*/false);
  write_consistency_csv(dir, art.consistency);
  if (!art.consistency.consistent) return 2;
  write_shape_csv(dir, *art.shape);
  write_phase_csv(dir, *art.phase);
  return 0;
}

// Full verify command: returns the process exit code.
inline int run_verify(const ScenarioConfig& cfg, const std::string& out_dir) {
  const std::filesystem::path dir(out_dir);
  ensure_dir(dir);
  const VerifyArtifacts v = run_verify_stage(cfg);
  write_consistency_csv(dir, v.construct.consistency);
  write_shape_csv(dir, *v.construct.shape);
  write_phase_csv(dir, *v.construct.phase);
  write_metrics_csv(dir, v.metrics, v.residual_series);
  for (const Snapshot& s : v.snapshots) write_density_csv(dir, s);
  if (!v.energies.empty()) write_energy_csv(dir, v.snapshots, v.energies);
  write_report_json(dir, cfg, v);
  return v.all_verdicts() ? 0 : 2;
}

}  // namespace io

}  // namespace nonspread
