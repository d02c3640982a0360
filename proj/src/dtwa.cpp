#include "quench/dtwa.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace quench {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr long kBlock = 64;

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Eigen::Matrix2cd PhasePointOperator::matrix() const {
  Eigen::Matrix2cd sx, sy, sz;
  sx << 0, 1, 1, 0;
  sy << 0, -kI, kI, 0;
  sz << 1, 0, 0, -1;
  const Eigen::Vector3d r = spin();
  return 0.5 * (r.x() * sx + r.y() * sy + r.z() * sz + Eigen::Matrix2cd::Identity());
}

Eigen::Vector3d PhasePointOperator::spin() const {
  const double x = a1 ? -1.0 : 1.0;
  const double z = a2 ? -1.0 : 1.0;
  const double y = (mirrored ? -1.0 : 1.0) * x * z;
  return {x, y, z};
}

std::array<PhasePointOperator, 4> PhasePointOperator::all(bool mirrored) {
  return {PhasePointOperator{0, 0, mirrored}, PhasePointOperator{0, 1, mirrored}, PhasePointOperator{1, 0, mirrored},
          PhasePointOperator{1, 1, mirrored}};
}

std::array<double, 4> wigner_weights(const Eigen::Matrix2cd& rho, bool mirrored) {
  if ((rho - rho.adjoint()).norm() > 1e-12) throw InvalidArgument("density matrix is not Hermitian");
  if (std::abs(rho.trace() - 1.0) > 1e-12) throw InvalidArgument("density matrix must have unit trace");
  std::array<double, 4> w{};
  const auto points = PhasePointOperator::all(mirrored);
  for (std::size_t k = 0; k < 4; ++k) w[k] = 0.5 * (rho * points[k].matrix()).trace().real();
  return w;
}

void require_sampleable(const std::array<double, 4>& weights) {
  for (double w : weights)
    if (w < -1e-12) throw NegativeWignerError("Wigner function has negative weight " + std::to_string(w));
}

Eigen::Matrix2cd polarized_density(const Eigen::Vector3d& n) {
  const double len = n.norm();
  if (!(len > 0.0)) throw DomainError("polarization direction must be non-zero");
  const Eigen::Vector3d u = n / len;
  Eigen::Matrix2cd rho;
  rho << 0.5 * (1.0 + u.z()), 0.5 * cplx(u.x(), -u.y()), 0.5 * cplx(u.x(), u.y()), 0.5 * (1.0 - u.z());
  return rho;
}

TrajectoryRng::TrajectoryRng(std::uint64_t seed, std::uint64_t trajectory) {
  std::uint64_t s = seed;
  const std::uint64_t a = splitmix64(s);
  std::uint64_t t = trajectory ^ a;
  state_ = splitmix64(t) ^ (a << 1);
}

std::uint64_t TrajectoryRng::next() { return splitmix64(state_); }

double TrajectoryRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

ClassicalSpinState sample_initial(const Eigen::Matrix2cd& rho, int sites, TrajectoryRng& rng) {
  if (sites < 1) throw InvalidArgument("site count must be positive");
  std::array<std::array<double, 4>, 2> weights{wigner_weights(rho, false), wigner_weights(rho, true)};
  require_sampleable(weights[0]);
  require_sampleable(weights[1]);
  ClassicalSpinState s(3, sites);
  for (int i = 0; i < sites; ++i) {
    const bool mirrored = (rng.next() >> 63) != 0;
    const auto& w = weights[mirrored ? 1 : 0];
    const double u = rng.uniform();
    std::size_t k = 0;
    double acc = std::max(w[0], 0.0);
    while (k < 3 && u >= acc) acc += std::max(w[++k], 0.0);
    s.col(i) = PhasePointOperator::all(mirrored)[k].spin();
  }
  return s;
}

ClassicalSpinState sample_initial_x_polarized(int sites, std::uint64_t seed) {
  TrajectoryRng rng(seed, 0);
  return sample_initial(polarized_density(Eigen::Vector3d::UnitX()), sites, rng);
}

ClassicalSpinState classical_eom(const IsingParams& p, const ClassicalSpinState& s) {
  const auto n = s.cols();
  ClassicalSpinState ds(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double zl = s(2, (i + n - 1) % n);
    const double zr = s(2, (i + 1) % n);
    // gradient of H with respect to s_i
    const double gx = -p.field_x;
    const double gz = -p.coupling * (zl + zr) - p.field_z;
    // ds/dt = 2 grad(H) x s
    ds(0, i) = 2.0 * (-gz * s(1, i));
    ds(1, i) = 2.0 * (gz * s(0, i) - gx * s(2, i));
    ds(2, i) = 2.0 * (gx * s(1, i));
  }
  return ds;
}

double classical_energy(const IsingParams& p, const ClassicalSpinState& s) {
  const auto n = s.cols();
  double e = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    e += -p.coupling * s(2, i) * s(2, (i + 1) % n) - p.field_x * s(0, i) - p.field_z * s(2, i);
  return e;
}

void rk4_step(const IsingParams& p, ClassicalSpinState& s, double dt) {
  const ClassicalSpinState k1 = classical_eom(p, s);
  const ClassicalSpinState k2 = classical_eom(p, s + 0.5 * dt * k1);
  const ClassicalSpinState k3 = classical_eom(p, s + 0.5 * dt * k2);
  const ClassicalSpinState k4 = classical_eom(p, s + dt * k3);
  s += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void DtwaConfig::validate() const {
  if (trajectories < 1) throw InvalidArgument("trajectory count must be >= 1");
  if (!(dt > 0.0)) throw InvalidArgument("dTWA step must be positive");
  if (threads < 1) throw InvalidArgument("thread count must be >= 1");
}

namespace {

struct BlockSums {
  std::vector<double> c1, c2;  // [t * (dmax+1) + d]
  std::vector<double> x1, x2;  // [t]
  double norm_drift = 0.0;
  double energy_drift = 0.0;
};

}  // namespace

DtwaResult run_dtwa(const QuenchProtocol& protocol, const DtwaConfig& cfg) {
  protocol.validate();
  cfg.validate();
  const IsingParams& fp = protocol.final;
  const int n = fp.sites;
  const int dmax = n / 2;
  const auto nd = static_cast<std::size_t>(dmax + 1);
  const std::vector<double>& times = protocol.times;
  const std::size_t nt = times.size();
  const Eigen::Matrix2cd rho =
      polarized_density(Eigen::Vector3d(protocol.initial.field_x, 0.0, protocol.initial.field_z));
  require_sampleable(wigner_weights(rho, false));
  require_sampleable(wigner_weights(rho, true));

  const long blocks = (cfg.trajectories + kBlock - 1) / kBlock;
  std::vector<BlockSums> sums(static_cast<std::size_t>(blocks));

  auto run_block = [&](long b) {
    BlockSums& out = sums[static_cast<std::size_t>(b)];
    out.c1.assign(nt * nd, 0.0);
    out.c2.assign(nt * nd, 0.0);
    out.x1.assign(nt, 0.0);
    out.x2.assign(nt, 0.0);
    const long end = std::min(cfg.trajectories, (b + 1) * kBlock);
    for (long r = b * kBlock; r < end; ++r) {
      TrajectoryRng rng(cfg.seed, static_cast<std::uint64_t>(r));
      ClassicalSpinState s = sample_initial(rho, n, rng);
      const double e0 = classical_energy(fp, s);
      const double escale = std::max(std::abs(e0), 1.0);
      double t = 0.0;
      for (std::size_t k = 0; k < nt; ++k) {
        const double target = times[k];
        const auto steps = static_cast<long>(std::ceil((target - t) / cfg.dt - 1e-9));
        const double h = steps > 0 ? (target - t) / static_cast<double>(steps) : 0.0;
        for (long q = 0; q < steps; ++q) rk4_step(fp, s, h);
        t = target;
        for (int d = 0; d <= dmax; ++d) {
          double c = 1.0;
          if (d > 0) {
            c = 0.0;
            for (int i = 0; i < n; ++i) c += s(2, i) * s(2, (i + d) % n);
            c /= n;
          }
          out.c1[k * nd + static_cast<std::size_t>(d)] += c;
          out.c2[k * nd + static_cast<std::size_t>(d)] += c * c;
        }
        const double mx = s.row(0).mean();
        out.x1[k] += mx;
        out.x2[k] += mx * mx;
        for (int i = 0; i < n; ++i)
          out.norm_drift = std::max(out.norm_drift, std::abs(s.col(i).squaredNorm() - 3.0) / 3.0);
        out.energy_drift = std::max(out.energy_drift, std::abs(classical_energy(fp, s) - e0) / escale);
      }
    }
  };

  const int workers = static_cast<int>(std::min<long>(cfg.threads, blocks));
  if (workers <= 1) {
    for (long b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (long b = next++; b < blocks; b = next++) run_block(b);
      });
    for (auto& th : pool) th.join();
  }

  BlockSums total;
  total.c1.assign(nt * nd, 0.0);
  total.c2.assign(nt * nd, 0.0);
  total.x1.assign(nt, 0.0);
  total.x2.assign(nt, 0.0);
  for (const BlockSums& b : sums) {
    for (std::size_t k = 0; k < nt * nd; ++k) {
      total.c1[k] += b.c1[k];
      total.c2[k] += b.c2[k];
    }
    for (std::size_t k = 0; k < nt; ++k) {
      total.x1[k] += b.x1[k];
      total.x2[k] += b.x2[k];
    }
    total.norm_drift = std::max(total.norm_drift, b.norm_drift);
    total.energy_drift = std::max(total.energy_drift, b.energy_drift);
  }

  const auto r = static_cast<double>(cfg.trajectories);
  auto stderr_of = [r](double s1, double s2) {
    if (r < 2.0) return 0.0;
    const double mean = s1 / r;
    const double var = std::max(s2 / r - mean * mean, 0.0) * r / (r - 1.0);
    return std::sqrt(var / r);
  };

  DtwaResult res;
  res.trajectories = cfg.trajectories;
  res.correlations.max_distance = dmax;
  res.correlations.provenance = "dtwa";
  res.max_norm_drift = total.norm_drift;
  res.max_energy_drift = total.energy_drift;
  for (std::size_t k = 0; k < nt; ++k) {
    std::vector<double> row(nd), err(nd);
    for (std::size_t d = 0; d < nd; ++d) {
      row[d] = total.c1[k * nd + d] / r;
      err[d] = d == 0 ? 0.0 : stderr_of(total.c1[k * nd + d], total.c2[k * nd + d]);
    }
    res.correlations.push(times[k], row, err);
    res.sigma_x.push_back(total.x1[k] / r);
    res.sigma_x_error.push_back(stderr_of(total.x1[k], total.x2[k]));
  }
  return res;
}

}  // namespace quench
