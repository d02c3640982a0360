#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "quench/analysis.hpp"
#include "quench/rbm.hpp"
#include "quench/spin_model.hpp"
#include "quench/variational.hpp"

namespace quench {

inline constexpr const char* kToolVersion = "1.0.0";

enum class Engine { exact, fermion, rbm, dtwa };

std::string to_string(Engine e);
Engine engine_from_string(const std::string& s);

struct RbmBlock {
  int alpha = 1;
  RbmSymmetry symmetry = RbmSymmetry::translation;
  double step_size = 0.0;  // <= 0: automatic
  RegularizationSchedule schedule;
  int max_iterations = 2000;
  double init_stddev = 0.01;
  double dt = 1e-3;
  double diag_shift = 1e-4;
  double svd_cutoff = 1e-8;
  Backend backend = Backend::exact;
  long samples = 1000;
  int chains = 1;

  bool operator==(const RbmBlock&) const = default;
};

struct DtwaBlock {
  long trajectories = 10000;
  double dt = 0.01;

  bool operator==(const DtwaBlock&) const = default;
};

struct ExperimentConfig {
  std::string id;
  Engine engine = Engine::exact;
  QuenchProtocol protocol;
  std::optional<RbmBlock> rbm;
  std::optional<DtwaBlock> dtwa;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output;              // bundle directory; empty: <output root>/<id>
  std::vector<std::string> notes;  // recorded substitutions and grid choices

  // Throws InvalidArgument naming the offending field.
  void validate() const;
  bool operator==(const ExperimentConfig& other) const;
};

// Strict parser: unknown keys are errors. "times" is either an explicit list or
// {"t_max": T, "steps": K}.
ExperimentConfig parse_config(const std::string& json_text);
std::string serialize_config(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

// Engine output before persistence.
struct EngineOutput {
  CorrelationSeries correlations;
  // Per observation time; columns depend on the engine.
  std::vector<std::string> observable_names;
  std::vector<std::vector<double>> observables;
  std::vector<SrLogEntry> sr_log;
  std::string diagnostics;
  bool ok = true;
  std::string error;
};

EngineOutput run_engine(const ExperimentConfig& config);

struct RunResult {
  std::filesystem::path bundle;
  bool ok = true;
  std::string error;
};

// Bundle layout: config.json, correlations.csv, xi.csv, observables.csv,
// sr_log.csv (rbm), metadata.json, and FAILED when the engine aborted.
RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& output_root);

// Runs configs on up to `threads` workers; each run writes its own bundle.
std::vector<RunResult> run_experiments(const std::vector<ExperimentConfig>& configs,
                                       const std::filesystem::path& output_root, int threads);

struct Bundle {
  ExperimentConfig config;
  CorrelationSeries correlations;
  XiSeries xi;
};

Bundle load_bundle(const std::filesystem::path& dir);

struct DistanceDeviation {
  int distance = 0;
  double max_abs = 0.0;
  double mean_abs = 0.0;
};

struct ComparisonReport {
  std::vector<DistanceDeviation> distances;
  std::vector<double> times;
  std::vector<std::optional<double>> delta_xi;
  double max_abs = 0.0;  // over d >= 1
  double tolerance = 0.0;
  bool pass = false;
};

// Compares C^zz_d over times <= t_max; grids and sizes must match.
ComparisonReport compare(const Bundle& a, const Bundle& b, double tolerance,
                         std::optional<double> t_max = std::nullopt);
void write_report(const ComparisonReport& report, const std::filesystem::path& dir);

std::vector<std::string> recipe_names();
std::vector<ExperimentConfig> recipe(const std::string& name);

}  // namespace quench
