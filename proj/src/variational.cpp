#include "quench/variational.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <sstream>

#include "quench/error.hpp"
#include "quench/exact.hpp"

namespace quench {

std::string to_string(Backend b) { return b == Backend::exact ? "exact" : "sampled"; }

Backend backend_from_string(const std::string& s) {
  if (s == "exact") return Backend::exact;
  if (s == "sampled") return Backend::sampled;
  throw InvalidArgument("unknown estimator backend '" + s + "'");
}

namespace {

Ensemble exact_ensemble(const Rbm& rbm, const IsingParams& p) {
  const int n = rbm.sites();
  check_exact_size(n);
  const std::uint64_t dim = std::uint64_t{1} << n;
  const bool symmetric = rbm.symmetry() == RbmSymmetry::translation;

  Ensemble e;
  e.sites = n;
  e.exact = true;
  std::vector<double> multiplicity;
  const TranslationOrbits* orbits = symmetric ? &translation_orbits(n) : nullptr;
  if (symmetric) {
    e.configs = orbits->representatives();
    multiplicity.assign(orbits->orbit_sizes().begin(), orbits->orbit_sizes().end());
  } else {
    e.configs.resize(dim);
    for (std::uint64_t v = 0; v < dim; ++v) e.configs[v] = v;
    multiplicity.assign(dim, 1.0);
  }
  const auto count = static_cast<Eigen::Index>(e.configs.size());
  e.samples = static_cast<long>(dim);

  const RbmState& s = rbm.expanded();
  Eigen::MatrixXd spins(count, n);
  for (Eigen::Index k = 0; k < count; ++k)
    for (int i = 0; i < n; ++i) spins(k, i) = spin_of_bit(e.configs[static_cast<std::size_t>(k)], i);
  Eigen::MatrixXcd thetas = spins.cast<cplx>() * s.W;
  thetas.rowwise() += s.b.transpose();

  Eigen::VectorXcd log_c(count);
  const Eigen::VectorXcd bias_term = spins.cast<cplx>() * s.a;
  for (Eigen::Index k = 0; k < count; ++k) {
    cplx acc = bias_term(k);
    for (Eigen::Index j = 0; j < thetas.cols(); ++j) acc += std::numbers::ln2 + log_cosh(thetas(k, j));
    log_c(k) = acc;
  }
  auto log_c_of = [&](std::uint64_t v) -> cplx {
    return symmetric ? log_c(static_cast<Eigen::Index>(orbits->orbit_of(v))) : log_c(static_cast<Eigen::Index>(v));
  };

  const double max_re = log_c.real().maxCoeff();
  e.weights.resize(count);
  for (Eigen::Index k = 0; k < count; ++k)
    e.weights(k) = multiplicity[static_cast<std::size_t>(k)] * std::exp(2.0 * (log_c(k).real() - max_re));
  e.weights /= e.weights.sum();

  e.local_energies.resize(count);
  e.sigma_x.resize(count);
  e.derivatives.resize(count, rbm.parameter_count());
  for (Eigen::Index k = 0; k < count; ++k) {
    const std::uint64_t v = e.configs[static_cast<std::size_t>(k)];
    cplx flips = 0.0;
    for (int i = 0; i < n; ++i) flips += std::exp(log_c_of(v ^ (std::uint64_t{1} << i)) - log_c(k));
    e.local_energies(k) = diagonal_energy(p, v) - p.field_x * flips;
    e.sigma_x(k) = flips.real() / n;
    e.derivatives.row(k) = rbm.derivatives(SpinConfig::from_index(v, n), thetas.row(k).transpose()).transpose();
  }
  return e;
}

Ensemble sampled_ensemble(const Rbm& rbm, const IsingParams& p, const EstimatorConfig& cfg) {
  const int n = rbm.sites();
  Ensemble e;
  e.sites = n;
  const long total = cfg.chain.samples * std::max(1, cfg.chains);
  e.configs.reserve(static_cast<std::size_t>(total));
  e.local_energies.resize(total);
  e.sigma_x.resize(total);
  e.derivatives.resize(total, rbm.parameter_count());
  Eigen::Index row = 0;
  for (int c = 0; c < std::max(1, cfg.chains); ++c) {
    ChainConfig chain = cfg.chain;
    chain.seed = cfg.chain.seed * 1000003ULL + static_cast<std::uint64_t>(c);
    run_metropolis(rbm, chain, [&](const LookupTable& t) {
      const SpinConfig& v = t.config();
      cplx flips = 0.0;
      for (int i = 0; i < n; ++i) flips += t.ratio_flip(i);
      e.configs.push_back(v.index());
      e.local_energies(row) = diagonal_energy(p, v) - p.field_x * flips;
      e.sigma_x(row) = flips.real() / n;
      e.derivatives.row(row) = rbm.derivatives(v, t.thetas()).transpose();
      ++row;
    });
  }
  e.weights = Eigen::VectorXd::Constant(total, 1.0 / static_cast<double>(total));
  e.samples = total;
  return e;
}

}  // namespace

Ensemble build_ensemble(const Rbm& rbm, const IsingParams& params, const EstimatorConfig& cfg) {
  if (params.sites != rbm.sites()) throw InvalidArgument("RBM and Hamiltonian sizes differ");
  return cfg.backend == Backend::exact ? exact_ensemble(rbm, params) : sampled_ensemble(rbm, params, cfg);
}

SrEstimates estimates_from_ensemble(const Ensemble& e) {
  SrEstimates est;
  est.exact = e.exact;
  est.samples = e.samples;
  const Eigen::VectorXd sw = e.weights.cwiseSqrt();
  est.energy = (e.weights.cast<cplx>().array() * e.local_energies.array()).sum();
  const Eigen::VectorXcd mean_o = e.derivatives.transpose() * e.weights.cast<cplx>();
  Eigen::MatrixXcd centered = e.derivatives.rowwise() - mean_o.transpose();
  centered = sw.cast<cplx>().asDiagonal() * centered;
  const Eigen::VectorXcd de = sw.cast<cplx>().cwiseProduct(e.local_energies - Eigen::VectorXcd::Constant(e.local_energies.size(), est.energy));
  est.variance = de.squaredNorm();
  const Eigen::Index np = centered.cols();
  est.S = Eigen::MatrixXcd::Zero(np, np);
  est.S.selfadjointView<Eigen::Lower>().rankUpdate(centered.adjoint());
  est.S = est.S.selfadjointView<Eigen::Lower>();
  est.F = centered.adjoint() * de;
  return est;
}

SrEstimates estimate_S_F(const Rbm& rbm, const IsingParams& params, const EstimatorConfig& cfg) {
  return estimates_from_ensemble(build_ensemble(rbm, params, cfg));
}

std::vector<double> ensemble_czz(const Ensemble& e) {
  const int n = e.sites;
  std::vector<double> out(static_cast<std::size_t>(n / 2 + 1), 0.0);
  for (std::size_t k = 0; k < e.configs.size(); ++k) {
    const std::uint64_t v = e.configs[k];
    const double w = e.weights(static_cast<Eigen::Index>(k));
    for (int d = 0; d <= n / 2; ++d) {
      int corr = 0;
      for (int i = 0; i < n; ++i) corr += spin_of_bit(v, i) * spin_of_bit(v, (i + d) % n);
      out[static_cast<std::size_t>(d)] += w * corr / n;
    }
  }
  return out;
}

double ensemble_sigma_x(const Ensemble& e) { return e.weights.dot(e.sigma_x); }

double RegularizationSchedule::at(int p) const { return std::max(initial * std::pow(decay, p), floor); }

void RegularizationSchedule::validate() const {
  if (!(initial > 0.0) || !(floor > 0.0)) throw InvalidArgument("regularization must be positive");
  if (!(decay > 0.0 && decay <= 1.0)) throw InvalidArgument("regularization decay must lie in (0, 1]");
}

SrStep solve_regularized(const SrEstimates& est, double lambda) {
  const Eigen::Index np = est.F.size();
  SrStep out{ParameterVector::Zero(np), 0.0};
  const double fnorm = est.F.norm();
  if (fnorm == 0.0) return out;

  const Eigen::VectorXd diag = est.S.diagonal().real();
  const double dmax = diag.maxCoeff();
  std::vector<Eigen::Index> active;
  for (Eigen::Index k = 0; k < np; ++k)
    if (diag(k) > 1e-300 && diag(k) > 1e-30 * dmax) active.push_back(k);
  const auto na = static_cast<Eigen::Index>(active.size());
  if (na == 0) throw NumericalError("regularized SR system is singular: covariance matrix vanishes");

  // Jacobi-scaled system D^{-1/2}(S + lambda D)D^{-1/2} y = D^{-1/2} F
  Eigen::MatrixXcd a(na, na);
  Eigen::VectorXcd rhs(na);
  Eigen::VectorXd scale(na);
  for (Eigen::Index r = 0; r < na; ++r) scale(r) = 1.0 / std::sqrt(diag(active[static_cast<std::size_t>(r)]));
  for (Eigen::Index r = 0; r < na; ++r) {
    const Eigen::Index kr = active[static_cast<std::size_t>(r)];
    rhs(r) = est.F(kr) * scale(r);
    for (Eigen::Index c = 0; c < na; ++c) a(r, c) = est.S(kr, active[static_cast<std::size_t>(c)]) * scale(r) * scale(c);
    a(r, r) += lambda;
  }
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw NumericalError("regularized SR system is singular");
  Eigen::VectorXcd y = ldlt.solve(rhs);
  // one step of iterative refinement
  y += ldlt.solve(rhs - a * y);
  for (Eigen::Index r = 0; r < na; ++r) out.delta(active[static_cast<std::size_t>(r)]) = y(r) * scale(r);

  Eigen::VectorXcd reg = est.S * out.delta;
  reg += lambda * diag.cast<cplx>().cwiseProduct(out.delta);
  out.residual = (reg - est.F).norm() / fnorm;
  if (!std::isfinite(out.residual) || out.residual > 1e-8)
    throw NumericalError("regularized SR solve failed, relative residual " + std::to_string(out.residual));
  return out;
}

SrStep sr_step(Rbm& state, const SrEstimates& est, double step_size, double lambda) {
  SrStep step = solve_regularized(est, lambda);
  state.set_parameters(state.parameters() - step_size * step.delta);
  return step;
}

double auto_step_size(const IsingParams& p) {
  return std::min(0.05, 0.2 / (std::abs(p.coupling) + std::abs(p.field_x) + std::abs(p.field_z)));
}

GroundStateResult ground_state_solve(const IsingParams& params, const GroundStateConfig& cfg) {
  params.validate();
  cfg.schedule.validate();
  if (cfg.alpha < 1) throw InvalidArgument("alpha must be >= 1");
  if (std::isnan(cfg.step_size)) throw InvalidArgument("SR step size must be a number");
  const double gamma = cfg.step_size > 0.0 ? cfg.step_size : auto_step_size(params);

  GroundStateResult res;
  res.state = Rbm::random(params.sites, cfg.alpha, cfg.symmetry, cfg.init_stddev, cfg.seed);
  std::deque<double> changes;
  double change_sum = 0.0;
  EstimatorConfig est_cfg = cfg.estimator;

  for (int p = 0;; ++p) {
    est_cfg.chain.seed = cfg.estimator.chain.seed + static_cast<std::uint64_t>(p);
    const SrEstimates est = estimate_S_F(res.state, params, est_cfg);
    const double lambda = cfg.schedule.at(p);
    res.log.push_back({p, est.energy, est.variance, lambda});
    if (p > 0) {
      const cplx prev = res.log[res.log.size() - 2].energy;
      const double change = std::abs(est.energy - prev) / std::max(std::abs(est.energy), 1e-300);
      changes.push_back(change);
      change_sum += change;
      if (static_cast<int>(changes.size()) > cfg.window) {
        change_sum -= changes.front();
        changes.pop_front();
      }
      if (static_cast<int>(changes.size()) == cfg.window && change_sum / cfg.window < cfg.tolerance) {
        res.converged = true;
        break;
      }
    }
    if (p >= cfg.max_iterations) break;
    sr_step(res.state, est, gamma, lambda);
  }

  constexpr int smooth = 20;
  std::vector<double> smoothed;
  for (std::size_t k = smooth; k <= res.log.size(); ++k) {
    double acc = 0.0;
    for (std::size_t q = k - smooth; q < k; ++q) acc += res.log[q].energy.real();
    smoothed.push_back(acc / smooth);
  }
  for (std::size_t k = 51; k < smoothed.size(); ++k)
    if (smoothed[k] > smoothed[k - 1] + 1e-10 * std::abs(smoothed[k - 1])) res.monotone = false;

  std::ostringstream msg;
  msg << (res.converged ? "converged" : "not converged") << " after " << res.log.size() - 1 << " iterations; E = "
      << res.energy().real() << ", variance = " << res.log.back().variance;
  res.diagnostics = msg.str();
  return res;
}

void TvmcConfig::validate() const {
  if (!(dt > 0.0)) throw InvalidArgument("tVMC step must be positive");
  if (!(svd_cutoff > 0.0 && svd_cutoff < 1.0)) throw InvalidArgument("SVD cutoff must lie in (0, 1)");
  if (diag_shift < 0.0) throw InvalidArgument("diagonal shift must be non-negative");
  if (times.empty() || times.front() != 0.0) throw InvalidArgument("observation grid must start at 0");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw InvalidArgument("observation grid must be strictly increasing");
}

ParameterVector tvmc_rhs(const SrEstimates& est, const TvmcConfig& cfg) {
  Eigen::MatrixXcd s = est.S;
  s.diagonal() += cfg.diag_shift * est.S.diagonal().real().cast<cplx>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(s);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of S failed");
  const Eigen::VectorXd ev = eig.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  Eigen::VectorXcd proj = eig.eigenvectors().adjoint() * est.F;
  int kept = 0;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (top > 0.0 && std::abs(ev(k)) > cfg.svd_cutoff * top) {
      proj(k) /= ev(k);
      ++kept;
    } else {
      proj(k) = 0.0;
    }
  }
  if (kept == 0) {
    if (est.F.norm() == 0.0) return ParameterVector::Zero(est.F.size());
    throw NumericalError("pseudo-inverse of S has rank 0");
  }
  return cplx(0.0, -1.0) * (eig.eigenvectors() * proj);
}

ParameterVector tvmc_rhs(const Rbm& state, const IsingParams& final_params, const TvmcConfig& cfg) {
  return tvmc_rhs(estimate_S_F(state, final_params, cfg.estimator), cfg);
}

TvmcResult evolve_tvmc(const Rbm& initial, const IsingParams& fp, const TvmcConfig& cfg) {
  cfg.validate();
  fp.validate();
  TvmcResult res;
  res.final_state = initial;
  res.correlations.max_distance = fp.sites / 2;
  res.correlations.provenance = "rbm";
  Rbm& rbm = res.final_state;
  const int n = fp.sites;

  EstimatorConfig est_cfg = cfg.estimator;
  auto ensemble_at = [&](const Rbm& r) {
    est_cfg.chain.seed = cfg.estimator.chain.seed + static_cast<std::uint64_t>(res.rhs_evaluations);
    return build_ensemble(r, fp, est_cfg);
  };
  auto rhs = [&](const ParameterVector& w) {
    Rbm r = rbm;
    r.set_parameters(w);
    const ParameterVector out = tvmc_rhs(estimates_from_ensemble(ensemble_at(r)), cfg);
    ++res.rhs_evaluations;
    return out;
  };

  double e0 = 0.0;
  double t = 0.0;
  try {
    for (std::size_t obs = 0; obs < cfg.times.size(); ++obs) {
      const double target = cfg.times[obs];
      const auto steps = static_cast<long>(std::ceil((target - t) / cfg.dt - 1e-9));
      const double h = steps > 0 ? (target - t) / static_cast<double>(steps) : 0.0;
      for (long s = 0; s < steps; ++s) {
        const ParameterVector w = rbm.parameters();
        const ParameterVector k1 = rhs(w);
        const ParameterVector k2 = rhs(w + 0.5 * h * k1);
        const ParameterVector k3 = rhs(w + 0.5 * h * k2);
        const ParameterVector k4 = rhs(w + h * k3);
        const ParameterVector next = w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = (s + 1 == steps) ? target : t + h;
        if (!next.allFinite() || next.cwiseAbs().maxCoeff() > cfg.blowup_limit) {
          res.ok = false;
          res.failure_time = t;
          res.message = "parameter blow-up (|W_k| > " + std::to_string(cfg.blowup_limit) + ")";
          return res;
        }
        rbm.set_parameters(next);
      }
      t = target;
      const Ensemble ens = ensemble_at(rbm);
      const cplx energy = (ens.weights.cast<cplx>().array() * ens.local_energies.array()).sum();
      if (obs == 0) e0 = energy.real();
      res.correlations.push(t, ensemble_czz(ens));
      res.energies.push_back(energy);
      res.parameter_norms.push_back(rbm.parameters().norm());
      if (cfg.keep_snapshots) res.snapshots.push_back(rbm.parameters());
      const double drift = std::abs(energy.real() - e0) / n;
      if (drift > 10.0 * cfg.drift_bound) {
        res.ok = false;
        res.failure_time = t;
        res.message = "energy drift " + std::to_string(drift) + " per site exceeds guard";
        return res;
      }
    }
  } catch (const NumericalError& ex) {
    res.ok = false;
    res.failure_time = t;
    res.message = ex.what();
  }
  return res;
}

}  // namespace quench
