#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "quench/csv.hpp"
#include "quench/error.hpp"
#include "quench/harness.hpp"

namespace fs = std::filesystem;
using namespace quench;

namespace {

constexpr int kOk = 0;
constexpr int kComparisonFail = 1;
constexpr int kError = 2;

fs::path default_output_root() {
  if (const char* env = std::getenv("QUENCH_OUTPUT_ROOT"); env && *env) return env;
  return "results";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quench dynamics of the transverse-field Ising chain"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;

  auto* run = app.add_subcommand("run", "Run one experiment and write its result bundle");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output root (default: $QUENCH_OUTPUT_ROOT or ./results)");
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string bundle_a, bundle_b;
  double tolerance = 1e-6;
  std::optional<double> t_max;
  auto* cmp = app.add_subcommand("compare", "Compare the correlations of two result bundles");
  cmp->add_option("bundle_a", bundle_a, "First bundle directory")->required()->check(CLI::ExistingDirectory);
  cmp->add_option("bundle_b", bundle_b, "Second bundle directory")->required()->check(CLI::ExistingDirectory);
  cmp->add_option("--tolerance", tolerance, "Pass threshold on max |C_a - C_b| over d >= 1");
  cmp->add_option("--t-max", t_max, "Only compare times <= this value");
  cmp->add_option("--out", out_dir, "Write deviation.csv, delta_xi.csv and report.json here");

  std::string recipe_name;
  bool run_recipe = false;
  auto* rec = app.add_subcommand("recipe", "Expand a named experiment into configs");
  rec->add_option("name", recipe_name, "Recipe name")->required();
  rec->add_option("--out", out_dir, "Output root (default: $QUENCH_OUTPUT_ROOT or ./results)");
  rec->add_flag("--run", run_recipe, "Also run every config");
  rec->add_option("--seed", seed, "Override the seed of every config");
  rec->add_option("--threads", threads, "Configs run concurrently")->check(CLI::PositiveNumber);

  auto* val = app.add_subcommand("validate", "Check a config file");
  val->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    if (*run) {
      ExperimentConfig c = load_config(config_path);
      if (seed) c.seed = *seed;
      if (threads) c.threads = *threads;
      const RunResult r = run_experiment(c, out_dir.empty() ? default_output_root() : fs::path(out_dir));
      std::cout << r.bundle.string() << "\n";
      if (!r.ok) {
        std::cerr << "engine failed: " << r.error << "\n";
        return kError;
      }
      return kOk;
    }
    if (*cmp) {
      const ComparisonReport r = compare(load_bundle(bundle_a), load_bundle(bundle_b), tolerance, t_max);
      if (!out_dir.empty()) write_report(r, out_dir);
      std::cout << "d,max_abs,mean_abs\n";
      for (const auto& d : r.distances)
        std::cout << d.distance << "," << format_double(d.max_abs) << "," << format_double(d.mean_abs) << "\n";
      std::cout << (r.pass ? "PASS" : "FAIL") << " max_abs=" << format_double(r.max_abs)
                << " tolerance=" << format_double(r.tolerance) << "\n";
      return r.pass ? kOk : kComparisonFail;
    }
    if (*rec) {
      std::vector<ExperimentConfig> cs = recipe(recipe_name);
      if (seed)
        for (auto& c : cs) c.seed = *seed;
      const fs::path root = out_dir.empty() ? default_output_root() : fs::path(out_dir);
      const fs::path cfg_dir = root / recipe_name / "configs";
      fs::create_directories(cfg_dir);
      for (const auto& c : cs) write_text(cfg_dir / (c.id + ".json"), serialize_config(c));
      std::cout << cs.size() << " configs written to " << cfg_dir.string() << "\n";
      if (!run_recipe) return kOk;
      const auto results = run_experiments(cs, root / recipe_name, threads.value_or(1));
      int failed = 0;
      for (std::size_t k = 0; k < results.size(); ++k) {
        if (!results[k].ok) {
          ++failed;
          std::cerr << cs[k].id << ": " << results[k].error << "\n";
        }
      }
      std::cout << results.size() - static_cast<std::size_t>(failed) << " of " << results.size() << " runs succeeded\n";
      return failed ? kError : kOk;
    }
    if (*val) {
      const ExperimentConfig c = load_config(config_path);
      std::cout << "ok: " << c.id << " (" << to_string(c.engine) << ", N = " << c.protocol.final.sites << ")\n";
      return kOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
