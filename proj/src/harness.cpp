#include "quench/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <json.hpp>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "quench/csv.hpp"
#include "quench/dtwa.hpp"
#include "quench/error.hpp"
#include "quench/exact.hpp"
#include "quench/free_fermion.hpp"

namespace quench {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(Engine e) {
  switch (e) {
    case Engine::exact: return "exact";
    case Engine::fermion: return "fermion";
    case Engine::rbm: return "rbm";
    case Engine::dtwa: return "dtwa";
  }
  return "?";
}

Engine engine_from_string(const std::string& s) {
  if (s == "exact") return Engine::exact;
  if (s == "fermion") return Engine::fermion;
  if (s == "rbm") return Engine::rbm;
  if (s == "dtwa") return Engine::dtwa;
  throw InvalidArgument("config field 'engine': unknown engine '" + s + "'");
}

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw InvalidArgument("config field '" + field + "': " + what);
}

std::string join_field(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& prefix) {
  if (!j.is_object()) field_error(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) field_error(join_field(prefix, key), "unknown field");
}

const json& require(const json& j, const std::string& key, const std::string& prefix) {
  if (!j.contains(key)) field_error(join_field(prefix, key), "missing");
  return j.at(key);
}

double get_number(const json& j, const std::string& key, const std::string& prefix) {
  const json& v = require(j, key, prefix);
  if (!v.is_number()) field_error(join_field(prefix, key), "expected a number");
  return v.get<double>();
}

long get_integer(const json& j, const std::string& key, const std::string& prefix) {
  const json& v = require(j, key, prefix);
  if (!v.is_number_integer()) field_error(join_field(prefix, key), "expected an integer");
  return v.get<long>();
}

std::string get_string(const json& j, const std::string& key, const std::string& prefix) {
  const json& v = require(j, key, prefix);
  if (!v.is_string()) field_error(join_field(prefix, key), "expected a string");
  return v.get<std::string>();
}

IsingParams parse_params(const json& j, const std::string& prefix) {
  check_keys(j, {"sites", "coupling", "field_x", "field_z"}, prefix);
  IsingParams p;
  p.sites = static_cast<int>(get_integer(j, "sites", prefix));
  p.coupling = j.contains("coupling") ? get_number(j, "coupling", prefix) : 1.0;
  p.field_x = get_number(j, "field_x", prefix);
  p.field_z = j.contains("field_z") ? get_number(j, "field_z", prefix) : 0.0;
  return p;
}

json params_json(const IsingParams& p) {
  return {{"sites", p.sites}, {"coupling", p.coupling}, {"field_x", p.field_x}, {"field_z", p.field_z}};
}

RbmBlock parse_rbm(const json& j) {
  const std::string pre = "rbm";
  check_keys(j,
             {"alpha", "symmetry", "step_size", "schedule", "max_iterations", "init_stddev", "dt", "diag_shift",
              "svd_cutoff", "backend", "samples", "chains"},
             pre);
  RbmBlock b;
  if (j.contains("alpha")) b.alpha = static_cast<int>(get_integer(j, "alpha", pre));
  if (j.contains("symmetry")) {
    try {
      b.symmetry = rbm_symmetry_from_string(get_string(j, "symmetry", pre));
    } catch (const InvalidArgument& e) {
      field_error("rbm.symmetry", e.what());
    }
  }
  if (j.contains("step_size")) b.step_size = get_number(j, "step_size", pre);
  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    check_keys(s, {"initial", "decay", "floor"}, "rbm.schedule");
    if (s.contains("initial")) b.schedule.initial = get_number(s, "initial", "rbm.schedule");
    if (s.contains("decay")) b.schedule.decay = get_number(s, "decay", "rbm.schedule");
    if (s.contains("floor")) b.schedule.floor = get_number(s, "floor", "rbm.schedule");
  }
  if (j.contains("max_iterations")) b.max_iterations = static_cast<int>(get_integer(j, "max_iterations", pre));
  if (j.contains("init_stddev")) b.init_stddev = get_number(j, "init_stddev", pre);
  if (j.contains("dt")) b.dt = get_number(j, "dt", pre);
  if (j.contains("diag_shift")) b.diag_shift = get_number(j, "diag_shift", pre);
  if (j.contains("svd_cutoff")) b.svd_cutoff = get_number(j, "svd_cutoff", pre);
  if (j.contains("backend")) {
    try {
      b.backend = backend_from_string(get_string(j, "backend", pre));
    } catch (const InvalidArgument& e) {
      field_error("rbm.backend", e.what());
    }
  }
  if (j.contains("samples")) b.samples = get_integer(j, "samples", pre);
  if (j.contains("chains")) b.chains = static_cast<int>(get_integer(j, "chains", pre));
  return b;
}

json rbm_json(const RbmBlock& b) {
  return {{"alpha", b.alpha},
          {"symmetry", to_string(b.symmetry)},
          {"step_size", b.step_size},
          {"schedule", {{"initial", b.schedule.initial}, {"decay", b.schedule.decay}, {"floor", b.schedule.floor}}},
          {"max_iterations", b.max_iterations},
          {"init_stddev", b.init_stddev},
          {"dt", b.dt},
          {"diag_shift", b.diag_shift},
          {"svd_cutoff", b.svd_cutoff},
          {"backend", to_string(b.backend)},
          {"samples", b.samples},
          {"chains", b.chains}};
}

DtwaBlock parse_dtwa(const json& j) {
  check_keys(j, {"trajectories", "dt"}, "dtwa");
  DtwaBlock b;
  if (j.contains("trajectories")) b.trajectories = get_integer(j, "trajectories", "dtwa");
  if (j.contains("dt")) b.dt = get_number(j, "dt", "dtwa");
  return b;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (id.empty()) field_error("id", "must be non-empty");
  if (id.find('/') != std::string::npos || id == "." || id == "..") field_error("id", "must be a plain name");
  auto wrap = [](const std::string& field, auto&& fn) {
    try {
      fn();
    } catch (const InvalidArgument& e) {
      field_error(field, e.what());
    }
  };
  wrap("initial", [&] { protocol.initial.validate(); });
  wrap("final", [&] { protocol.final.validate(); });
  if (protocol.initial.sites != protocol.final.sites) field_error("final.sites", "must equal initial.sites");
  wrap("times", [&] { protocol.validate(); });
  if (threads < 1) field_error("threads", "must be >= 1");

  if (engine != Engine::rbm && rbm) field_error("rbm", "block given but engine is " + to_string(engine));
  if (engine != Engine::dtwa && dtwa) field_error("dtwa", "block given but engine is " + to_string(engine));
  const int n = protocol.final.sites;
  switch (engine) {
    case Engine::exact:
      if (n > kMaxExactSites) field_error("final.sites", "exact engine requires N <= 14");
      break;
    case Engine::fermion:
      if (protocol.final.field_z != 0.0) field_error("final.field_z", "fermion engine requires h_z = 0");
      if (protocol.initial.field_z != 0.0) field_error("initial.field_z", "fermion engine requires h_z = 0");
      if (protocol.initial.coupling != 1.0 || protocol.final.coupling != 1.0)
        field_error("final.coupling", "fermion engine requires J = 1");
      if (n % 2 != 0) field_error("final.sites", "fermion engine requires even N");
      break;
    case Engine::rbm: {
      if (!rbm) field_error("rbm", "missing block for rbm engine");
      if (rbm->alpha < 1) field_error("rbm.alpha", "must be >= 1");
      if (rbm->max_iterations < 0) field_error("rbm.max_iterations", "must be >= 0");
      if (!(rbm->dt > 0.0)) field_error("rbm.dt", "must be positive");
      if (!(rbm->svd_cutoff > 0.0 && rbm->svd_cutoff < 1.0)) field_error("rbm.svd_cutoff", "must lie in (0, 1)");
      if (rbm->diag_shift < 0.0) field_error("rbm.diag_shift", "must be non-negative");
      if (!(rbm->init_stddev >= 0.0)) field_error("rbm.init_stddev", "must be non-negative");
      wrap("rbm.schedule", [&] { rbm->schedule.validate(); });
      if (rbm->backend == Backend::exact && n > kMaxExactSites)
        field_error("rbm.backend", "exact backend requires N <= 14");
      if (rbm->samples < 1) field_error("rbm.samples", "must be >= 1");
      if (rbm->chains < 1) field_error("rbm.chains", "must be >= 1");
      break;
    }
    case Engine::dtwa:
      if (!dtwa) field_error("dtwa", "missing block for dtwa engine");
      if (dtwa->trajectories < 1) field_error("dtwa.trajectories", "must be >= 1");
      if (!(dtwa->dt > 0.0)) field_error("dtwa.dt", "must be positive");
      break;
  }
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  return id == o.id && engine == o.engine && protocol == o.protocol && rbm == o.rbm && dtwa == o.dtwa &&
         seed == o.seed && threads == o.threads && output == o.output && notes == o.notes;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, {"id", "engine", "initial", "final", "times", "rbm", "dtwa", "seed", "threads", "output", "notes"}, "");
  ExperimentConfig c;
  c.id = get_string(j, "id", "");
  c.engine = engine_from_string(get_string(j, "engine", ""));
  c.protocol.initial = parse_params(require(j, "initial", ""), "initial");
  c.protocol.final = parse_params(require(j, "final", ""), "final");
  const json& t = require(j, "times", "");
  if (t.is_array()) {
    for (const auto& v : t) {
      if (!v.is_number()) field_error("times", "expected numbers");
      c.protocol.times.push_back(v.get<double>());
    }
  } else {
    check_keys(t, {"t_max", "steps"}, "times");
    const long steps = get_integer(t, "steps", "times");
    if (steps < 1) field_error("times.steps", "must be >= 1");
    c.protocol.times = QuenchProtocol::uniform_grid(get_number(t, "t_max", "times"), static_cast<int>(steps));
  }
  if (j.contains("rbm")) c.rbm = parse_rbm(j.at("rbm"));
  if (j.contains("dtwa")) c.dtwa = parse_dtwa(j.at("dtwa"));
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_unsigned()) field_error("seed", "expected a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (j.contains("threads")) c.threads = static_cast<int>(get_integer(j, "threads", ""));
  if (j.contains("output")) c.output = get_string(j, "output", "");
  if (j.contains("notes")) {
    const json& n = j.at("notes");
    if (!n.is_array()) field_error("notes", "expected a list of strings");
    for (const auto& s : n) {
      if (!s.is_string()) field_error("notes", "expected a list of strings");
      c.notes.push_back(s.get<std::string>());
    }
  }
  c.validate();
  return c;
}

std::string serialize_config(const ExperimentConfig& c) {
  json j = {{"id", c.id},
            {"engine", to_string(c.engine)},
            {"initial", params_json(c.protocol.initial)},
            {"final", params_json(c.protocol.final)},
            {"times", c.protocol.times},
            {"seed", c.seed},
            {"threads", c.threads}};
  if (c.rbm) j["rbm"] = rbm_json(*c.rbm);
  if (c.dtwa) j["dtwa"] = {{"trajectories", c.dtwa->trajectories}, {"dt", c.dtwa->dt}};
  if (!c.output.empty()) j["output"] = c.output;
  if (!c.notes.empty()) j["notes"] = c.notes;
  return j.dump(2) + "\n";
}

ExperimentConfig load_config(const fs::path& path) { return parse_config(read_text(path)); }

namespace {

EngineOutput run_exact(const ExperimentConfig& c) {
  EngineOutput out;
  const QuenchProtocol& p = c.protocol;
  out.correlations.max_distance = p.final.sites / 2;
  out.correlations.provenance = "exact";
  out.observable_names = {"energy", "sigma_x"};
  const bool entropy = p.final.sites % 2 == 0;
  if (entropy) out.observable_names.push_back("entropy");
  const GroundState gs = ground_state(p.initial);
  const SpectralDecomposition spec = diagonalize(p.final);
  const Propagator prop(spec, gs.state);
  for (double t : p.times) {
    const StateVector psi = prop.at(t);
    out.correlations.push(t, czz_profile(psi));
    std::vector<double> row{energy_expectation(p.final, psi), sigma_x(psi)};
    if (entropy) row.push_back(entanglement_entropy(psi));
    out.observables.push_back(row);
  }
  std::ostringstream d;
  d << "initial ground energy " << gs.energy << ", gap " << gs.gap << (gs.degenerate ? " (degenerate)" : "");
  out.diagnostics = d.str();
  return out;
}

EngineOutput run_fermion(const ExperimentConfig& c) {
  EngineOutput out;
  const QuenchProtocol& p = c.protocol;
  const int n = p.final.sites;
  out.correlations.max_distance = n / 2;
  out.correlations.provenance = "fermion";
  for (double t : p.times) {
    const MajoranaCovariance cov = covariance_after_quench(n, p.initial.field_x, p.final.field_x, t);
    std::vector<double> row;
    for (int d = 0; d <= n / 2; ++d) row.push_back(czz_analytic(cov, d));
    out.correlations.push(t, row);
  }
  return out;
}

EstimatorConfig estimator_of(const RbmBlock& b, std::uint64_t seed) {
  EstimatorConfig e;
  e.backend = b.backend;
  e.chain.samples = b.samples;
  e.chain.seed = seed;
  e.chains = b.chains;
  return e;
}

EngineOutput run_rbm(const ExperimentConfig& c) {
  EngineOutput out;
  const RbmBlock& b = *c.rbm;
  const QuenchProtocol& p = c.protocol;
  out.correlations.max_distance = p.final.sites / 2;
  out.correlations.provenance = "rbm";
  out.observable_names = {"energy_re", "energy_im", "parameter_norm"};

  GroundStateConfig g;
  g.alpha = b.alpha;
  g.symmetry = b.symmetry;
  g.schedule = b.schedule;
  g.step_size = b.step_size;
  g.max_iterations = b.max_iterations;
  g.init_stddev = b.init_stddev;
  g.seed = c.seed;
  g.estimator = estimator_of(b, c.seed);
  const GroundStateResult gs = ground_state_solve(p.initial, g);
  out.sr_log = gs.log;

  TvmcConfig t;
  t.dt = b.dt;
  t.diag_shift = b.diag_shift;
  t.svd_cutoff = b.svd_cutoff;
  t.times = p.times;
  t.estimator = estimator_of(b, c.seed + 0x5bd1e995ULL);
  const TvmcResult r = evolve_tvmc(gs.state, p.final, t);
  out.correlations = r.correlations;
  for (std::size_t k = 0; k < r.energies.size(); ++k)
    out.observables.push_back({r.energies[k].real(), r.energies[k].imag(), r.parameter_norms[k]});
  std::ostringstream d;
  d << "ground state: " << gs.diagnostics << (gs.monotone ? "" : " (smoothed energy not monotone)")
    << "; tVMC: " << r.rhs_evaluations << " right-hand-side evaluations";
  out.diagnostics = d.str();
  if (!r.ok) {
    out.ok = false;
    std::ostringstream e;
    e << "tVMC aborted at t = " << r.failure_time.value_or(0.0) << ": " << r.message;
    out.error = e.str();
  }
  return out;
}

EngineOutput run_dtwa_engine(const ExperimentConfig& c) {
  EngineOutput out;
  DtwaConfig d;
  d.trajectories = c.dtwa->trajectories;
  d.dt = c.dtwa->dt;
  d.seed = c.seed;
  d.threads = c.threads;
  const DtwaResult r = run_dtwa(c.protocol, d);
  out.correlations = r.correlations;
  out.observable_names = {"sigma_x", "sigma_x_stderr"};
  for (std::size_t k = 0; k < r.sigma_x.size(); ++k) out.observables.push_back({r.sigma_x[k], r.sigma_x_error[k]});
  std::ostringstream s;
  s << r.trajectories << " trajectories; max relative |s|^2 drift " << r.max_norm_drift
    << "; max relative energy drift " << r.max_energy_drift;
  out.diagnostics = s.str();
  return out;
}

CsvTable correlation_table(const CorrelationSeries& s) {
  CsvTable t;
  t.header.push_back("t");
  for (int d = 0; d <= s.max_distance; ++d) t.header.push_back("C" + std::to_string(d));
  if (s.errors)
    for (int d = 0; d <= s.max_distance; ++d) t.header.push_back("err_C" + std::to_string(d));
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    std::vector<std::string> row{format_double(s.times[k])};
    for (double v : s.values[k]) row.push_back(format_double(v));
    if (s.errors)
      for (double v : (*s.errors)[k]) row.push_back(format_double(v));
    t.rows.push_back(row);
  }
  return t;
}

CsvTable xi_table(const XiSeries& x) {
  CsvTable t;
  t.header = {"t", "xi", "residual_d1", "residual_d2"};
  for (std::size_t k = 0; k < x.times.size(); ++k) {
    if (x.fits[k])
      t.rows.push_back({format_double(x.times[k]), format_double(x.fits[k]->xi), format_double(x.fits[k]->residual_d1),
                        format_double(x.fits[k]->residual_d2)});
    else
      t.rows.push_back({format_double(x.times[k]), "", "", ""});
  }
  return t;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

}  // namespace

EngineOutput run_engine(const ExperimentConfig& c) {
  c.validate();
  switch (c.engine) {
    case Engine::exact: return run_exact(c);
    case Engine::fermion: return run_fermion(c);
    case Engine::rbm: return run_rbm(c);
    case Engine::dtwa: return run_dtwa_engine(c);
  }
  throw InvalidArgument("unknown engine");
}

RunResult run_experiment(const ExperimentConfig& c, const fs::path& output_root) {
  c.validate();
  RunResult res;
  res.bundle = c.output.empty() ? output_root / c.id : fs::path(c.output);
  fs::create_directories(res.bundle);
  fs::remove(res.bundle / "FAILED");
  write_text(res.bundle / "config.json", serialize_config(c));

  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  EngineOutput out;
  try {
    out = run_engine(c);
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_csv(res.bundle / "correlations.csv", correlation_table(out.correlations));
  write_csv(res.bundle / "xi.csv", xi_table(xi_series(out.correlations)));
  if (!out.observable_names.empty()) {
    CsvTable t;
    t.header = {"t"};
    t.header.insert(t.header.end(), out.observable_names.begin(), out.observable_names.end());
    for (std::size_t k = 0; k < out.observables.size(); ++k) {
      std::vector<std::string> row{format_double(out.correlations.times[k])};
      for (double v : out.observables[k]) row.push_back(format_double(v));
      t.rows.push_back(row);
    }
    write_csv(res.bundle / "observables.csv", t);
  }
  if (c.engine == Engine::rbm) {
    CsvTable t;
    t.header = {"iteration", "energy_re", "energy_im", "variance", "lambda"};
    for (const auto& e : out.sr_log)
      t.rows.push_back({std::to_string(e.iteration), format_double(e.energy.real()), format_double(e.energy.imag()),
                        format_double(e.variance), format_double(e.lambda)});
    write_csv(res.bundle / "sr_log.csv", t);
  }

  json meta = {{"tool", "quench"},
               {"version", kToolVersion},
               {"engine", to_string(c.engine)},
               {"started_utc", started},
               {"wall_clock_seconds", seconds},
               {"status", out.ok ? "ok" : "failed"},
               {"diagnostics", out.diagnostics},
               {"notes", c.notes}};
  if (!out.ok) meta["error"] = out.error;
  write_text(res.bundle / "metadata.json", meta.dump(2) + "\n");
  if (!out.ok) write_text(res.bundle / "FAILED", out.error + "\n");
  res.ok = out.ok;
  res.error = out.error;
  return res;
}

std::vector<RunResult> run_experiments(const std::vector<ExperimentConfig>& configs, const fs::path& output_root,
                                       int threads) {
  std::vector<RunResult> results(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < configs.size(); k = next++) {
      try {
        results[k] = run_experiment(configs[k], output_root);
      } catch (const std::exception& e) {
        results[k].ok = false;
        results[k].error = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(configs.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

Bundle load_bundle(const fs::path& dir) {
  Bundle b;
  b.config = load_config(dir / "config.json");
  const CsvTable t = read_csv(dir / "correlations.csv");
  const int n = b.config.protocol.final.sites;
  b.correlations.max_distance = n / 2;
  b.correlations.provenance = to_string(b.config.engine);
  const std::vector<double> times = t.numeric_column("t");
  std::vector<std::vector<double>> cols;
  for (int d = 0; d <= n / 2; ++d) cols.push_back(t.numeric_column("C" + std::to_string(d)));
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<double> row;
    for (const auto& col : cols) row.push_back(col[k]);
    b.correlations.push(times[k], row);
  }
  b.xi = xi_series(b.correlations);
  return b;
}

ComparisonReport compare(const Bundle& a, const Bundle& b, double tolerance, std::optional<double> t_max) {
  if (a.config.protocol.final.sites != b.config.protocol.final.sites)
    throw InvalidArgument("grid mismatch: bundles have different chain lengths");
  if (a.correlations.times != b.correlations.times) throw InvalidArgument("grid mismatch: time grids differ");
  if (!(tolerance >= 0.0)) throw InvalidArgument("tolerance must be non-negative");
  ComparisonReport r;
  r.tolerance = tolerance;
  const int dmax = a.correlations.max_distance;
  std::vector<std::size_t> used;
  for (std::size_t k = 0; k < a.correlations.times.size(); ++k)
    if (!t_max || a.correlations.times[k] <= *t_max + 1e-12) used.push_back(k);
  for (int d = 0; d <= dmax; ++d) {
    DistanceDeviation dev{d, 0.0, 0.0};
    for (std::size_t k : used) {
      const double diff = std::abs(a.correlations.at(k, d) - b.correlations.at(k, d));
      dev.max_abs = std::max(dev.max_abs, std::isnan(diff) ? INFINITY : diff);
      dev.mean_abs += diff;
    }
    if (!used.empty()) dev.mean_abs /= static_cast<double>(used.size());
    if (d >= 1) r.max_abs = std::max(r.max_abs, dev.max_abs);
    r.distances.push_back(dev);
  }
  const auto delta = deviation_series(a.xi, b.xi);
  for (std::size_t k : used) {
    r.times.push_back(a.correlations.times[k]);
    r.delta_xi.push_back(delta[k]);
  }
  r.pass = r.max_abs <= tolerance;
  return r;
}

void write_report(const ComparisonReport& r, const fs::path& dir) {
  fs::create_directories(dir);
  CsvTable dev;
  dev.header = {"d", "max_abs", "mean_abs"};
  for (const auto& d : r.distances)
    dev.rows.push_back({std::to_string(d.distance), format_double(d.max_abs), format_double(d.mean_abs)});
  write_csv(dir / "deviation.csv", dev);
  CsvTable xi;
  xi.header = {"t", "delta_xi"};
  for (std::size_t k = 0; k < r.times.size(); ++k)
    xi.rows.push_back({format_double(r.times[k]), r.delta_xi[k] ? format_double(*r.delta_xi[k]) : ""});
  write_csv(dir / "delta_xi.csv", xi);
  json j = {{"pass", r.pass}, {"tolerance", r.tolerance}, {"max_abs", r.max_abs}};
  write_text(dir / "report.json", j.dump(2) + "\n");
}

namespace {

std::vector<double> field_grid(double lo, double hi, double step) {
  std::vector<double> g;
  const long count = std::lround((hi - lo) / step);
  for (long k = 0; k <= count; ++k) g.push_back(lo + step * static_cast<double>(k));
  return g;
}

std::string field_tag(double h) {
  std::ostringstream s;
  s << (h < 0 ? "m" : "") << std::fixed << std::setprecision(2) << std::abs(h);
  return s.str();
}

ExperimentConfig base_config(const std::string& id, Engine engine, int n, double hx_f, double hz_f, double t_max,
                             int steps) {
  ExperimentConfig c;
  c.id = id;
  c.engine = engine;
  c.protocol.initial = IsingParams{n, 1.0, 100.0, 0.0};
  c.protocol.final = IsingParams{n, 1.0, hx_f, hz_f};
  c.protocol.times = QuenchProtocol::uniform_grid(t_max, steps);
  if (engine == Engine::dtwa) c.dtwa = DtwaBlock{};
  return c;
}

ExperimentConfig rbm_config(const std::string& id, int n, double hx_f, double hz_f, double t_max, int steps, int alpha) {
  ExperimentConfig c = base_config(id, Engine::rbm, n, hx_f, hz_f, t_max, steps);
  c.rbm = RbmBlock{};
  c.rbm->alpha = alpha;
  // exact enumeration carries no sampling noise, so the tVMC solve is barely regularized
  c.rbm->diag_shift = 1e-8;
  c.rbm->svd_cutoff = 1e-12;
  c.notes.push_back("exact backend with tVMC diag_shift 1e-8 and svd_cutoff 1e-12");
  return c;
}

void add_note(std::vector<ExperimentConfig>& cs, const std::string& note) {
  for (auto& c : cs) c.notes.push_back(note);
}

}  // namespace

std::vector<std::string> recipe_names() {
  return {"fig2a-scan", "fig2c-hx1", "fig2c-hx2", "fig3-hz2-grid", "figS2-gge", "figS4-alpha-scan"};
}

std::vector<ExperimentConfig> recipe(const std::string& name) {
  std::vector<ExperimentConfig> cs;
  if (name == "fig2a-scan") {
    for (double h : field_grid(-2.0, 2.0, 0.25)) {
      const std::string tag = "fig2a-hx" + field_tag(h);
      cs.push_back(base_config(tag + "-exact", Engine::exact, 10, h, 0.0, 1.0, 20));
      for (int a : {1, 2, 4, 8}) cs.push_back(rbm_config(tag + "-rbm-a" + std::to_string(a), 10, h, 0.0, 1.0, 20, a));
      cs.push_back(base_config(tag + "-dtwa", Engine::dtwa, 10, h, 0.0, 1.0, 20));
    }
    add_note(cs, "xi is read at t = 1; h_x,f grid step 0.25 over [-2, 2]");
    add_note(cs, "N = 10 instead of N = 42 so that the exact engine is available as a reference");
  } else if (name == "fig2c-hx1" || name == "fig2c-hx2") {
    const double h = name == "fig2c-hx1" ? 1.0 : 2.0;
    const std::string tag = name;
    cs.push_back(base_config(tag + "-exact", Engine::exact, 10, h, 0.0, 3.0, 60));
    cs.push_back(base_config(tag + "-fermion", Engine::fermion, 10, h, 0.0, 3.0, 60));
    for (int a : {1, 2, 4, 8}) cs.push_back(rbm_config(tag + "-rbm-a" + std::to_string(a), 10, h, 0.0, 3.0, 60, a));
    cs.push_back(base_config(tag + "-dtwa", Engine::dtwa, 10, h, 0.0, 3.0, 60));
    add_note(cs, "N = 10 instead of N = 42; t <= 3 with observation step 0.05");
  } else if (name == "fig3-hz2-grid") {
    for (double h : field_grid(-3.0, 3.0, 0.25)) {
      const std::string tag = "fig3-hx" + field_tag(h);
      cs.push_back(base_config(tag + "-exact", Engine::exact, 10, h, 2.0, 3.0, 60));
      cs.push_back(rbm_config(tag + "-rbm-a1", 10, h, 2.0, 3.0, 60, 1));
      cs.push_back(rbm_config(tag + "-rbm-a10", 10, h, 2.0, 3.0, 60, 10));
      cs.push_back(base_config(tag + "-dtwa", Engine::dtwa, 10, h, 2.0, 3.0, 60));
    }
    add_note(cs, "h_z,f = 2; h_x,f grid step 0.25 over [-3, 3]; t <= 3 (time horizon not tabulated in the source)");
  } else if (name == "figS2-gge") {
    for (double eps : field_grid(0.25, 3.0, 0.25)) {
      const double h = 1.0 + eps;
      cs.push_back(base_config("figS2-eps" + field_tag(eps) + "-exact", Engine::exact, 12, h, 0.0, 3.0, 60));
    }
    add_note(cs, "exact engine at N = 12 instead of tDMRG at N = 40; entropy is in observables.csv");
    add_note(cs, "epsilon = h_x,f - 1 on a grid of step 0.25 over [0.25, 3]");
  } else if (name == "figS4-alpha-scan") {
    cs.push_back(base_config("figS4-exact", Engine::exact, 12, 1.0, 0.0, 3.0, 60));
    for (int a : {1, 4, 8, 15}) cs.push_back(rbm_config("figS4-rbm-a" + std::to_string(a), 12, 1.0, 0.0, 3.0, 60, a));
    add_note(cs, "quench 100 -> 1 at N = 12");
  } else {
    std::string known;
    for (const auto& n : recipe_names()) known += " " + n;
    throw InvalidArgument("unknown recipe '" + name + "'; known:" + known);
  }
  for (auto& c : cs) c.validate();
  return cs;
}

}  // namespace quench
