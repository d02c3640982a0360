#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "quench/spin_model.hpp"

namespace quench {

// Largest chain handled by the dense oracle (2^14 amplitudes).
inline constexpr int kMaxExactSites = 14;

struct StateVector {
  int sites = 0;
  Eigen::VectorXcd amplitudes;

  double norm() const { return amplitudes.norm(); }
  static StateVector basis_state(int sites, std::uint64_t index);
  static StateVector product_x_up(int sites);
};

// Eigenpairs of a real symmetric Hamiltonian, eigenvalues ascending.
struct SpectralDecomposition {
  IsingParams params;
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;

  double reconstruction_error() const;
  double orthonormality_error() const;
};

struct GroundState {
  double energy = 0.0;
  StateVector state;
  double gap = 0.0;
  bool degenerate = false;
};

void check_exact_size(int sites);

Eigen::MatrixXd build_hamiltonian(const IsingParams& params);
Eigen::VectorXcd apply_hamiltonian(const IsingParams& params, const Eigen::VectorXcd& psi);
double energy_expectation(const IsingParams& params, const StateVector& psi);

// Full dense diagonalization. The Hamiltonian is first split into the
// eigenspaces of the site reflection (and of the global spin flip prod_i s^x_i
// when h_z = 0); every block is diagonalized densely and the eigenvectors are
// returned in the full 2^N basis.
SpectralDecomposition diagonalize(const IsingParams& params);

GroundState ground_state(const SpectralDecomposition& spectrum);
GroundState ground_state(const IsingParams& params);

// Unitary evolution exp(-i H t) psi0 from precomputed eigenpairs.
class Propagator {
 public:
  // Borrows `spectrum`, which must outlive the propagator.
  Propagator(const SpectralDecomposition& spectrum, const StateVector& psi0);
  Propagator(std::shared_ptr<const SpectralDecomposition> spectrum, const StateVector& psi0);
  // Takes ownership of a temporary spectrum.
  Propagator(SpectralDecomposition&& spectrum, const StateVector& psi0);
  StateVector at(double t) const;
  const SpectralDecomposition& spectrum() const { return *spectrum_; }

 private:
  std::shared_ptr<const SpectralDecomposition> spectrum_;
  Eigen::VectorXcd overlaps_;
};

StateVector evolve(const SpectralDecomposition& spectrum, const StateVector& psi0, double t);
StateVector evolve(const StateVector& psi0, const IsingParams& final_params, double t);

// Translation-averaged <s^z_i s^z_{i+d}>.
double czz(const StateVector& psi, int distance);
// C^zz_d for d = 0..N/2.
std::vector<double> czz_profile(const StateVector& psi);
// Site-averaged <s^x_i>.
double sigma_x(const StateVector& psi);
// Half-chain von Neumann entropy with natural log; N must be even.
double entanglement_entropy(const StateVector& psi);

}  // namespace quench
