#pragma once

#include <Eigen/Dense>
#include <vector>

namespace quench {

// Solution of the integrable chain (h_z = 0, J = 1) through the Jordan-Wigner
// mapping. Spin axes are relabelled internally (s^z <-> s^x) so that the
// transverse field couples to fermion occupation; observables are quoted in the
// original axes.

// Antiperiodic momenta k = +-(2n-1)pi/N, n = 1..N/2: the even-parity sector.
struct MomentumGrid {
  int sites = 0;
  std::vector<double> momenta;

  static MomentumGrid antiperiodic(int sites);
};

// Quasiparticle energy 2 sqrt(1 + h^2 - 2 h cos k).
double dispersion(double field, double k);

// Angle with tan(theta) = sin k / (h - cos k), continuous on (0, pi) and odd in k.
// Throws DomainError at gapless points.
double bogoliubov_angle(double field, double k);

// Gamma_pq = <-i m_p m_q> (p != q) for Majoranas ordered
// m_{2i} = A_i, m_{2i+1} = B_i, where A_i = (prod_{j<i} s^x_j) s^z_i and
// B_i = -(prod_{j<i} s^x_j) s^y_i.
struct MajoranaCovariance {
  int sites = 0;
  Eigen::MatrixXd gamma;

  double antisymmetry_error() const { return (gamma + gamma.transpose()).cwiseAbs().maxCoeff(); }
  double max_singular_value() const;
};

// Covariance at time t after a sudden quench h_i -> h_f from the ground state
// of h_i, assembled mode by mode and Fourier transformed to real space.
MajoranaCovariance covariance_after_quench(int sites, double field_initial, double field_final, double t);

// <s^z_0 s^z_d> as the Pfaffian over the Majoranas B_0, A_1, ..., B_{d-1}, A_d.
double czz_analytic(const MajoranaCovariance& cov, int distance);

// Pfaffian by skew-symmetric Gaussian elimination with partial pivoting.
double pfaffian(Eigen::MatrixXd a);

}  // namespace quench
