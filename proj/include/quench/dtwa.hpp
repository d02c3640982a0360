#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "quench/analysis.hpp"
#include "quench/error.hpp"
#include "quench/spin_model.hpp"

namespace quench {

// Sampling from a Wigner function with a negative weight.
class NegativeWignerError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Phase-point operator of the discrete 2x2 phase space at (a1, a2):
//   A = 1/2 [(-1)^a1 sx + (-1)^(a1+a2) sy + (-1)^a2 sz + 1]
// The second phase space used for sampling has the sy term negated.
struct PhasePointOperator {
  int a1 = 0;
  int a2 = 0;
  bool mirrored = false;

  Eigen::Matrix2cd matrix() const;
  // Classical spin assigned to the point.
  Eigen::Vector3d spin() const;
  static std::array<PhasePointOperator, 4> all(bool mirrored = false);
};

// W_alpha = 1/2 Tr(rho A_alpha) in the order of PhasePointOperator::all().
std::array<double, 4> wigner_weights(const Eigen::Matrix2cd& rho, bool mirrored = false);
// Throws NegativeWignerError if any weight is below -1e-12.
void require_sampleable(const std::array<double, 4>& weights);

// Pure single-site state polarized along the unit vector n.
Eigen::Matrix2cd polarized_density(const Eigen::Vector3d& n);

// Columns are the classical spins s_i.
using ClassicalSpinState = Eigen::Matrix3Xd;

// Counter-based generator: the stream of trajectory r depends only on (seed, r).
class TrajectoryRng {
 public:
  TrajectoryRng(std::uint64_t seed, std::uint64_t trajectory);
  std::uint64_t next();
  double uniform();

 private:
  std::uint64_t state_;
};

// Draws one phase space per site (both with probability 1/2), then a point from
// the site's Wigner function.
ClassicalSpinState sample_initial(const Eigen::Matrix2cd& rho, int sites, TrajectoryRng& rng);
ClassicalSpinState sample_initial_x_polarized(int sites, std::uint64_t seed);

// ds_i/dt = {s_i, H} with {s^a_i, s^b_j} = 2 delta_ij eps_abc s^c_i.
ClassicalSpinState classical_eom(const IsingParams& params, const ClassicalSpinState& s);
double classical_energy(const IsingParams& params, const ClassicalSpinState& s);
// One fixed RK4 step.
void rk4_step(const IsingParams& params, ClassicalSpinState& s, double dt);

struct DtwaConfig {
  long trajectories = 10000;
  double dt = 0.01;
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const;
};

struct DtwaResult {
  CorrelationSeries correlations;   // with standard errors; d = 0 is the identity
  std::vector<double> sigma_x;
  std::vector<double> sigma_x_error;
  double max_norm_drift = 0.0;      // max |(|s_i|^2 - 3)| / 3 over trajectories and times
  double max_energy_drift = 0.0;    // max |H(t) - H(0)| / max(|H(0)|, 1)
  long trajectories = 0;
};

// Trajectories are reduced in fixed blocks in index order, so the result does not
// depend on the thread count. The initial product state is polarized along the
// initial field (h_x, 0, h_z), approximating its ground state at large field.
DtwaResult run_dtwa(const QuenchProtocol& protocol, const DtwaConfig& config);

}  // namespace quench
