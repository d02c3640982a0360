#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "quench/spin_model.hpp"

namespace quench {

// Overflow-safe log(cosh z) and tanh z for complex arguments.
cplx log_cosh(cplx z);
cplx safe_tanh(cplx z);

// Unconstrained RBM parameters: N visible biases, M hidden biases, N x M weights.
struct RbmState {
  Eigen::VectorXcd a;
  Eigen::VectorXcd b;
  Eigen::MatrixXcd W;

  int visible() const { return static_cast<int>(a.size()); }
  int hidden() const { return static_cast<int>(b.size()); }
  void validate() const;
};

// alpha filters of length N shared by all cyclic shifts: hidden unit f*N + s
// carries bias b_f and weights W(i, f*N + s) = filter_f[(i - s) mod N].
struct TranslationInvariantRbm {
  cplx a{0.0, 0.0};
  Eigen::VectorXcd b;        // alpha
  Eigen::MatrixXcd filters;  // alpha x N

  int sites() const { return static_cast<int>(filters.cols()); }
  int alpha() const { return static_cast<int>(filters.rows()); }
  RbmState expand() const;
};

enum class RbmSymmetry { none, translation };

std::string to_string(RbmSymmetry s);
RbmSymmetry rbm_symmetry_from_string(const std::string& s);

// Flat complex parameter vector.
//   none:        (a_0..a_{N-1}, b_0..b_{M-1}, W_{0,0}, W_{0,1}, .., W_{N-1,M-1})
//   translation: (a, b_0..b_{alpha-1}, filter_0[0..N-1], .., filter_{alpha-1}[0..N-1])
using ParameterVector = Eigen::VectorXcd;

class Rbm {
 public:
  Rbm() = default;
  explicit Rbm(const RbmState& state);
  explicit Rbm(const TranslationInvariantRbm& state);
  // Real and imaginary parts drawn independently from N(0, stddev^2).
  static Rbm random(int sites, int alpha, RbmSymmetry symmetry, double stddev, std::uint64_t seed);
  static Rbm zeros(int sites, int alpha, RbmSymmetry symmetry);

  int sites() const { return sites_; }
  int hidden() const { return full_.hidden(); }
  int alpha() const { return hidden() / sites_; }
  RbmSymmetry symmetry() const { return symmetry_; }
  Eigen::Index parameter_count() const { return params_.size(); }
  static Eigen::Index parameter_count(int sites, int alpha, RbmSymmetry symmetry);

  const ParameterVector& parameters() const { return params_; }
  void set_parameters(const ParameterVector& p);
  // Full (a, b, W); for the symmetric ansatz this is the expansion.
  const RbmState& expanded() const { return full_; }

  Eigen::VectorXcd thetas(const SpinConfig& v) const;
  cplx log_amplitude(const SpinConfig& v) const;
  cplx log_amplitude(const SpinConfig& v, const Eigen::VectorXcd& thetas) const;
  // O_k(v) = d log c_v / d W_k in the parameter order above.
  Eigen::VectorXcd derivatives(const SpinConfig& v, const Eigen::VectorXcd& thetas) const;
  Eigen::VectorXcd derivatives(const SpinConfig& v) const { return derivatives(v, thetas(v)); }

 private:
  void expand();

  int sites_ = 0;
  RbmSymmetry symmetry_ = RbmSymmetry::none;
  ParameterVector params_;
  RbmState full_;
};

// Cached effective angles theta_j(v) = b_j + sum_i v_i W_ij of one chain.
class LookupTable {
 public:
  LookupTable(const Rbm& rbm, SpinConfig v);

  const SpinConfig& config() const { return v_; }
  const Eigen::VectorXcd& thetas() const { return thetas_; }

  cplx log_ratio_flip(int site) const;
  // c_{flip_i(v)} / c_v in O(M).
  cplx ratio_flip(int site) const { return std::exp(log_ratio_flip(site)); }
  void flip(int site);
  // Recompute the angles from scratch, discarding accumulated rounding.
  void refresh() { thetas_ = rbm_->thetas(v_); }
  // max |theta_cached - theta_recomputed|
  double coherence_error() const;

 private:
  const Rbm* rbm_;
  SpinConfig v_;
  Eigen::VectorXcd thetas_;
};

cplx amplitude_ratio_flip(const LookupTable& table, int site);

// E_loc(v) = <v|H|psi> / c_v
cplx local_energy(const IsingParams& params, const LookupTable& table);
cplx local_energy(const Rbm& rbm, const IsingParams& params, const SpinConfig& v);

// Log-amplitudes of every basis state (index convention of SpinConfig) plus the
// log of sum_v |c_v|^2.
struct ExactDistribution {
  int sites = 0;
  std::vector<cplx> log_amplitudes;
  double log_norm = 0.0;

  double probability(std::uint64_t index) const;
  std::vector<double> probabilities() const;
};

ExactDistribution enumerate_exact(const Rbm& rbm);

// Versioned JSON snapshot; doubles are written in shortest round-trip form.
std::string rbm_to_json(const Rbm& rbm);
Rbm rbm_from_json(const std::string& text);
void save_rbm(const Rbm& rbm, const std::filesystem::path& path);
Rbm load_rbm(const std::filesystem::path& path);

}  // namespace quench
