// Independent reference computations used only by the tests.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "quench/exact.hpp"
#include "quench/rbm.hpp"

namespace oracle {

using cplx = std::complex<double>;

// Sum over all 2^M hidden configurations of exp(a.v + b.h + v.W.h).
inline cplx hidden_sum_amplitude(const quench::RbmState& s, const std::vector<int>& v) {
  const int n = s.visible();
  const int m = s.hidden();
  cplx visible = 0.0;
  for (int i = 0; i < n; ++i) visible += s.a(i) * static_cast<double>(v[static_cast<std::size_t>(i)]);
  cplx total = 0.0;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << m); ++bits) {
    cplx e = visible;
    for (int j = 0; j < m; ++j) {
      const double h = ((bits >> j) & 1U) ? -1.0 : 1.0;
      cplx theta = s.b(j);
      for (int i = 0; i < n; ++i) theta += static_cast<double>(v[static_cast<std::size_t>(i)]) * s.W(i, j);
      e += theta * h;
    }
    total += std::exp(e);
  }
  return total;
}

// Expansion along the first row over all perfect matchings.
inline double combinatorial_pfaffian(const Eigen::MatrixXd& a) {
  const auto n = a.rows();
  if (n == 0) return 1.0;
  if (n % 2 != 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index j = 1; j < n; ++j) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 1; k < n; ++k)
      if (k != j) keep.push_back(k);
    Eigen::MatrixXd minor(n - 2, n - 2);
    for (std::size_t r = 0; r < keep.size(); ++r)
      for (std::size_t c = 0; c < keep.size(); ++c) minor(r, c) = a(keep[r], keep[c]);
    total += ((j % 2 == 1) ? 1.0 : -1.0) * a(0, j) * combinatorial_pfaffian(minor);
  }
  return total;
}

// Pauli matrices acting on site i of a 2^N vector (bit clear = spin up).
inline Eigen::VectorXcd apply_x(const Eigen::VectorXcd& psi, int i) {
  Eigen::VectorXcd out(psi.size());
  for (Eigen::Index s = 0; s < psi.size(); ++s) out(s ^ (Eigen::Index{1} << i)) = psi(s);
  return out;
}

inline Eigen::VectorXcd apply_z(const Eigen::VectorXcd& psi, int i) {
  Eigen::VectorXcd out = psi;
  for (Eigen::Index s = 0; s < psi.size(); ++s)
    if ((s >> i) & 1) out(s) = -psi(s);
  return out;
}

inline Eigen::VectorXcd apply_y(const Eigen::VectorXcd& psi, int i) {
  // s^y = i s^x s^z
  return cplx(0.0, 1.0) * apply_x(apply_z(psi, i), i);
}

// Majorana m_{2i} = A_i = (prod_{j<i} x_j) z_i, m_{2i+1} = B_i = -(prod_{j<i} x_j) y_i.
inline Eigen::VectorXcd apply_majorana(const Eigen::VectorXcd& psi, int p) {
  const int i = p / 2;
  Eigen::VectorXcd out = (p % 2 == 0) ? apply_z(psi, i) : Eigen::VectorXcd(-apply_y(psi, i));
  for (int j = 0; j < i; ++j) out = apply_x(out, j);
  return out;
}

// Gamma_pq = <psi| -i m_p m_q |psi> from the many-body state.
inline Eigen::MatrixXd majorana_covariance(const quench::StateVector& psi) {
  const int n = psi.sites;
  std::vector<Eigen::VectorXcd> mq;
  for (int p = 0; p < 2 * n; ++p) mq.push_back(apply_majorana(psi.amplitudes, p));
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int p = 0; p < 2 * n; ++p)
    for (int q = 0; q < 2 * n; ++q) {
      if (p == q) continue;
      // <psi| m_p m_q |psi> = (m_p psi)^dagger (m_q psi) since m_p is Hermitian
      g(p, q) = (cplx(0.0, -1.0) * mq[static_cast<std::size_t>(p)].dot(mq[static_cast<std::size_t>(q)])).real();
    }
  return g;
}

// Real-space route: H = (i/4) sum h_pq m_p m_q in the even-parity sector,
// Gamma(0) = ground state of h_i, Gamma(t) = e^{h_f t} Gamma(0) e^{-h_f t}.
inline Eigen::MatrixXd majorana_hamiltonian(int n, double field) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    h(2 * i, 2 * i + 1) = 2.0 * field;
    const int next = (i + 1) % n;
    const double bond = (i + 1 == n) ? -2.0 : 2.0;  // antiperiodic closure
    h(2 * i + 1, 2 * next) += bond;
  }
  return h - h.transpose().eval();
}

inline Eigen::MatrixXd real_space_covariance(int n, double field_initial, double field_final, double t) {
  const Eigen::MatrixXd hi = majorana_hamiltonian(n, field_initial);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sq(-hi * hi);
  const Eigen::MatrixXd inv_sqrt =
      sq.eigenvectors() * sq.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * sq.eigenvectors().transpose();
  const Eigen::MatrixXd g0 = hi * inv_sqrt;
  const Eigen::MatrixXd hf = majorana_hamiltonian(n, field_final);
  // i h_f is Hermitian: e^{h_f t} = U e^{-i D t} U^dagger
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(cplx(0.0, 1.0) * hf.cast<cplx>());
  const Eigen::VectorXcd phase = (cplx(0.0, -1.0) * t * eig.eigenvalues().cast<cplx>()).array().exp();
  const Eigen::MatrixXcd u = eig.eigenvectors() * phase.asDiagonal() * eig.eigenvectors().adjoint();
  return (u * g0.cast<cplx>() * u.adjoint()).real();
}

// Central difference of a scalar function.
inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracle
