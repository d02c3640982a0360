#include "quench/free_fermion.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "quench/error.hpp"

namespace quench {

MomentumGrid MomentumGrid::antiperiodic(int sites) {
  if (sites < 2 || sites % 2 != 0) throw InvalidArgument("momentum grid needs an even number of sites");
  MomentumGrid g;
  g.sites = sites;
  for (int n = 1; n <= sites / 2; ++n) {
    const double k = (2.0 * n - 1.0) * std::numbers::pi / sites;
    g.momenta.push_back(k);
    g.momenta.push_back(-k);
  }
  return g;
}

double dispersion(double h, double k) { return 2.0 * std::sqrt(std::max(0.0, 1.0 + h * h - 2.0 * h * std::cos(k))); }

double bogoliubov_angle(double h, double k) {
  if (dispersion(h, k) < 1e-12)
    throw DomainError("Bogoliubov angle undefined at gapless point h=" + std::to_string(h) + " k=" + std::to_string(k));
  return std::atan2(std::sin(k), h - std::cos(k));
}

double MajoranaCovariance::max_singular_value() const {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(gamma).singularValues()(0);
}

MajoranaCovariance covariance_after_quench(int n, double h_i, double h_f, double t) {
  const MomentumGrid grid = MomentumGrid::antiperiodic(n);
  using C = std::complex<double>;
  const C I(0.0, 1.0);

  // Mode blocks
  //   [[ i sin(2 e t) sin D,             e^{-i th_f}(cos D + i cos(2 e t) sin D) ],
  //    [ -e^{i th_f}(cos D - i cos(2 e t) sin D),  -i sin(2 e t) sin D        ]]
  // with D = th_f - th_i, e = e_k(h_f).
  struct Mode {
    double k;
    C aa, ab, ba, bb;
  };
  std::vector<Mode> modes;
  modes.reserve(grid.momenta.size());
  for (double k : grid.momenta) {
    const double th_i = bogoliubov_angle(h_i, k);
    const double th_f = bogoliubov_angle(h_f, k);
    const double delta = th_f - th_i;
    const double phase = 2.0 * dispersion(h_f, k) * t;
    const double s2 = std::sin(phase), c2 = std::cos(phase);
    const double sd = std::sin(delta), cd = std::cos(delta);
    modes.push_back({k, I * s2 * sd, std::polar(1.0, -th_f) * C(cd, c2 * sd), -std::polar(1.0, th_f) * C(cd, -c2 * sd),
                     -I * s2 * sd});
  }

  // real-space 2x2 block for separation r = j - i in (-N, N)
  const int span = 2 * n - 1;
  std::vector<Eigen::Matrix2d> blocks(static_cast<std::size_t>(span));
  for (int r = -(n - 1); r <= n - 1; ++r) {
    C aa = 0, ab = 0, ba = 0, bb = 0;
    for (const Mode& m : modes) {
      const C f = std::polar(1.0, m.k * r);
      aa += f * m.aa;
      ab += f * m.ab;
      ba += f * m.ba;
      bb += f * m.bb;
    }
    Eigen::Matrix2d b;
    b << aa.real(), ab.real(), ba.real(), bb.real();
    blocks[static_cast<std::size_t>(r + n - 1)] = b / n;
  }

  MajoranaCovariance cov;
  cov.sites = n;
  cov.gamma.setZero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cov.gamma.block<2, 2>(2 * i, 2 * j) = blocks[static_cast<std::size_t>(j - i + n - 1)];
  cov.gamma.diagonal().setZero();
  // exact antisymmetry; the mode sums agree to rounding
  cov.gamma = 0.5 * (cov.gamma - cov.gamma.transpose()).eval();
  return cov;
}

double czz_analytic(const MajoranaCovariance& cov, int d) {
  if (d == 0) return 1.0;
  if (d < 0 || d > cov.sites / 2) throw InvalidArgument("distance must lie in [0, N/2]");
  return pfaffian(cov.gamma.block(1, 1, 2 * d, 2 * d));
}

double pfaffian(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw InvalidArgument("pfaffian needs a square matrix");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a + a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw InvalidArgument("pfaffian needs an antisymmetric matrix");
  if (n % 2 != 0) return 0.0;
  if (n == 0) return 1.0;

  double pf = 1.0;
  for (Eigen::Index k = 0; k + 1 < n; k += 2) {
    Eigen::Index pivot;
    a.col(k).tail(n - k - 1).cwiseAbs().maxCoeff(&pivot);
    pivot += k + 1;
    if (pivot != k + 1) {
      a.row(k + 1).swap(a.row(pivot));
      a.col(k + 1).swap(a.col(pivot));
      pf = -pf;
    }
    if (a(k + 1, k) == 0.0) return 0.0;
    pf *= a(k, k + 1);
    if (k + 2 < n) {
      const Eigen::Index m = n - k - 2;
      const Eigen::VectorXd tau = a.row(k).tail(m).transpose() / a(k, k + 1);
      const Eigen::VectorXd col = a.col(k + 1).tail(m);
      a.bottomRightCorner(m, m) += tau * col.transpose() - col * tau.transpose();
    }
  }
  return pf;
}

}  // namespace quench
