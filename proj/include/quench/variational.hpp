#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "quench/analysis.hpp"
#include "quench/rbm.hpp"
#include "quench/sampler.hpp"
#include "quench/spin_model.hpp"

namespace quench {

enum class Backend { exact, sampled };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);

struct EstimatorConfig {
  Backend backend = Backend::exact;
  ChainConfig chain;
  int chains = 1;
};

// Weighted configurations with their local energies and log-derivatives.
// Exact enumeration of a translation-invariant RBM runs over shift orbits.
struct Ensemble {
  int sites = 0;
  std::vector<std::uint64_t> configs;
  Eigen::VectorXd weights;   // sum to 1
  Eigen::VectorXcd local_energies;
  Eigen::MatrixXcd derivatives;  // rows = configs
  Eigen::VectorXd sigma_x;       // per config: site average of Re(c_{flip_i v}/c_v)
  bool exact = false;
  long samples = 0;
};

Ensemble build_ensemble(const Rbm& rbm, const IsingParams& params, const EstimatorConfig& config);

struct SrEstimates {
  Eigen::MatrixXcd S;
  Eigen::VectorXcd F;
  cplx energy{0.0, 0.0};
  double variance = 0.0;
  long samples = 0;
  bool exact = false;
};

SrEstimates estimates_from_ensemble(const Ensemble& ensemble);
SrEstimates estimate_S_F(const Rbm& rbm, const IsingParams& params, const EstimatorConfig& config);

// Observables of an ensemble: translation-averaged C^zz_d for d = 0..N/2 and <s^x>.
std::vector<double> ensemble_czz(const Ensemble& ensemble);
double ensemble_sigma_x(const Ensemble& ensemble);

// lambda(p) = max(lambda_0 * decay^p, floor)
struct RegularizationSchedule {
  double initial = 100.0;
  double decay = 0.9;
  double floor = 1e-4;

  double at(int iteration) const;
  void validate() const;
  bool operator==(const RegularizationSchedule&) const = default;
};

struct SrStep {
  ParameterVector delta;
  double residual = 0.0;
};

// Solves (S + lambda diag(S)) delta = F; parameters with S_kk = 0 are frozen.
SrStep solve_regularized(const SrEstimates& estimates, double lambda);
// W <- W - gamma * delta
SrStep sr_step(Rbm& state, const SrEstimates& estimates, double step_size, double lambda);

struct SrLogEntry {
  int iteration = 0;
  cplx energy;
  double variance = 0.0;
  double lambda = 0.0;
};

struct GroundStateConfig {
  int alpha = 1;
  RbmSymmetry symmetry = RbmSymmetry::translation;
  RegularizationSchedule schedule;
  // <= 0 selects auto_step_size(params)
  double step_size = 0.0;
  int max_iterations = 2000;
  double init_stddev = 0.01;
  std::uint64_t seed = 1;
  double tolerance = 1e-8;
  int window = 50;
  EstimatorConfig estimator;
};

struct GroundStateResult {
  Rbm state;
  std::vector<SrLogEntry> log;
  bool converged = false;
  // smoothed (20-iteration) energy non-increasing after iteration 50
  bool monotone = true;
  std::string diagnostics;

  cplx energy() const { return log.empty() ? cplx{} : log.back().energy; }
};

// min(0.05, 0.2 / (|J| + |h_x| + |h_z|)); larger steps are unstable at strong fields.
double auto_step_size(const IsingParams& params);

GroundStateResult ground_state_solve(const IsingParams& params, const GroundStateConfig& config);

struct TvmcConfig {
  double dt = 1e-3;
  double diag_shift = 1e-4;
  double svd_cutoff = 1e-8;
  std::vector<double> times;
  EstimatorConfig estimator;
  double drift_bound = 1e-3;   // |<H>(t) - <H>(0)| / N allowed
  double blowup_limit = 1e3;   // max |W_k|
  bool keep_snapshots = false;

  void validate() const;
};

// dW/dt = -i pinv(S + shift diag S) F
ParameterVector tvmc_rhs(const SrEstimates& estimates, const TvmcConfig& config);
ParameterVector tvmc_rhs(const Rbm& state, const IsingParams& final_params, const TvmcConfig& config);

struct TvmcResult {
  CorrelationSeries correlations;
  std::vector<cplx> energies;
  std::vector<double> parameter_norms;
  std::vector<ParameterVector> snapshots;
  Rbm final_state;
  bool ok = true;
  std::optional<double> failure_time;
  std::string message;
  long rhs_evaluations = 0;
};

// Classical fixed-step RK4 of tvmc_rhs with step <= dt, landing on each
// observation time.
TvmcResult evolve_tvmc(const Rbm& initial, const IsingParams& final_params, const TvmcConfig& config);

}  // namespace quench
