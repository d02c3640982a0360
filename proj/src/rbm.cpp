#include "quench/rbm.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "quench/error.hpp"
#include "quench/exact.hpp"

namespace quench {

cplx log_cosh(cplx z) {
  // log cosh z = |z| branch + log(1 + e^{-2|z|}) - log 2, with z -> -z when Re z < 0
  if (z.real() < 0.0) z = -z;
  return z + std::log(1.0 + std::exp(-2.0 * z)) - std::numbers::ln2;
}

cplx safe_tanh(cplx z) {
  if (z.real() >= 0.0) {
    const cplx e = std::exp(-2.0 * z);
    return (1.0 - e) / (1.0 + e);
  }
  const cplx e = std::exp(2.0 * z);
  return (e - 1.0) / (e + 1.0);
}

void RbmState::validate() const {
  if (W.rows() != a.size() || W.cols() != b.size()) throw InvalidArgument("RBM shape mismatch");
  if (!a.allFinite() || !b.allFinite() || !W.allFinite()) throw NumericalError("RBM parameters are not finite");
}

RbmState TranslationInvariantRbm::expand() const {
  const int n = sites(), alpha_ = alpha();
  RbmState s;
  s.a = Eigen::VectorXcd::Constant(n, a);
  s.b.resize(alpha_ * n);
  s.W.resize(n, alpha_ * n);
  for (int f = 0; f < alpha_; ++f)
    for (int sh = 0; sh < n; ++sh) {
      s.b(f * n + sh) = b(f);
      for (int i = 0; i < n; ++i) s.W(i, f * n + sh) = filters(f, ((i - sh) % n + n) % n);
    }
  return s;
}

std::string to_string(RbmSymmetry s) { return s == RbmSymmetry::translation ? "translation" : "none"; }

RbmSymmetry rbm_symmetry_from_string(const std::string& s) {
  if (s == "translation") return RbmSymmetry::translation;
  if (s == "none") return RbmSymmetry::none;
  throw InvalidArgument("unknown RBM symmetry '" + s + "'");
}

Rbm::Rbm(const RbmState& state) : sites_(state.visible()), symmetry_(RbmSymmetry::none) {
  state.validate();
  const int n = state.visible(), m = state.hidden();
  params_.resize(n + m + n * m);
  params_.head(n) = state.a;
  params_.segment(n, m) = state.b;
  for (int i = 0; i < n; ++i) params_.segment(n + m + i * m, m) = state.W.row(i).transpose();
  full_ = state;
}

Rbm::Rbm(const TranslationInvariantRbm& state) : sites_(state.sites()), symmetry_(RbmSymmetry::translation) {
  const int n = state.sites(), alpha_ = state.alpha();
  if (state.b.size() != alpha_) throw InvalidArgument("hidden bias count must equal alpha");
  params_.resize(1 + alpha_ + alpha_ * n);
  params_(0) = state.a;
  params_.segment(1, alpha_) = state.b;
  for (int f = 0; f < alpha_; ++f) params_.segment(1 + alpha_ + f * n, n) = state.filters.row(f).transpose();
  expand();
}

Eigen::Index Rbm::parameter_count(int sites, int alpha, RbmSymmetry symmetry) {
  const Eigen::Index m = static_cast<Eigen::Index>(alpha) * sites;
  return symmetry == RbmSymmetry::translation ? 1 + alpha + m : sites + m + sites * m;
}

Rbm Rbm::zeros(int sites, int alpha, RbmSymmetry symmetry) {
  if (sites < 2) throw InvalidArgument("RBM needs at least 2 visible units");
  if (alpha < 1) throw InvalidArgument("alpha must be >= 1");
  const int m = alpha * sites;
  if (symmetry == RbmSymmetry::translation) {
    TranslationInvariantRbm t;
    t.b = Eigen::VectorXcd::Zero(alpha);
    t.filters = Eigen::MatrixXcd::Zero(alpha, sites);
    return Rbm(t);
  }
  RbmState s{Eigen::VectorXcd::Zero(sites), Eigen::VectorXcd::Zero(m), Eigen::MatrixXcd::Zero(sites, m)};
  return Rbm(s);
}

Rbm Rbm::random(int sites, int alpha, RbmSymmetry symmetry, double stddev, std::uint64_t seed) {
  Rbm r = zeros(sites, alpha, symmetry);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  ParameterVector p(r.parameter_count());
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    p(k) = cplx(re, im);
  }
  r.set_parameters(p);
  return r;
}

void Rbm::set_parameters(const ParameterVector& p) {
  if (p.size() != params_.size()) throw InvalidArgument("parameter vector has wrong length");
  if (!p.allFinite()) throw NumericalError("RBM parameters are not finite");
  params_ = p;
  expand();
}

void Rbm::expand() {
  const int n = sites_;
  if (symmetry_ == RbmSymmetry::translation) {
    const auto alpha_ = static_cast<int>((params_.size() - 1) / (n + 1));
    TranslationInvariantRbm t;
    t.a = params_(0);
    t.b = params_.segment(1, alpha_);
    t.filters.resize(alpha_, n);
    for (int f = 0; f < alpha_; ++f) t.filters.row(f) = params_.segment(1 + alpha_ + f * n, n).transpose();
    full_ = t.expand();
    return;
  }
  const auto m = static_cast<int>((params_.size() - n) / (n + 1));
  full_.a = params_.head(n);
  full_.b = params_.segment(n, m);
  full_.W.resize(n, m);
  for (int i = 0; i < n; ++i) full_.W.row(i) = params_.segment(n + m + i * m, m).transpose();
}

Eigen::VectorXcd Rbm::thetas(const SpinConfig& v) const {
  Eigen::VectorXcd t = full_.b;
  for (int i = 0; i < sites_; ++i) t += static_cast<double>(v[i]) * full_.W.row(i).transpose();
  return t;
}

cplx Rbm::log_amplitude(const SpinConfig& v) const { return log_amplitude(v, thetas(v)); }

cplx Rbm::log_amplitude(const SpinConfig& v, const Eigen::VectorXcd& t) const {
  cplx acc = 0.0;
  for (int i = 0; i < sites_; ++i) acc += full_.a(i) * static_cast<double>(v[i]);
  for (Eigen::Index j = 0; j < t.size(); ++j) acc += std::numbers::ln2 + log_cosh(t(j));
  return acc;
}

Eigen::VectorXcd Rbm::derivatives(const SpinConfig& v, const Eigen::VectorXcd& t) const {
  const int n = sites_;
  const int m = hidden();
  Eigen::VectorXcd th(m);
  for (int j = 0; j < m; ++j) th(j) = safe_tanh(t(j));
  Eigen::VectorXcd o(params_.size());
  if (symmetry_ == RbmSymmetry::translation) {
    const int alpha_ = m / n;
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += v[i];
    o(0) = total;
    for (int f = 0; f < alpha_; ++f) {
      o(1 + f) = th.segment(f * n, n).sum();
      for (int k = 0; k < n; ++k) {
        cplx acc = 0.0;
        for (int s = 0; s < n; ++s) acc += static_cast<double>(v[(k + s) % n]) * th(f * n + s);
        o(1 + alpha_ + f * n + k) = acc;
      }
    }
    return o;
  }
  for (int i = 0; i < n; ++i) o(i) = static_cast<double>(v[i]);
  o.segment(n, m) = th;
  for (int i = 0; i < n; ++i) o.segment(n + m + i * m, m) = static_cast<double>(v[i]) * th;
  return o;
}

LookupTable::LookupTable(const Rbm& rbm, SpinConfig v) : rbm_(&rbm), v_(std::move(v)), thetas_(rbm.thetas(v_)) {
  if (v_.size() != rbm.sites()) throw InvalidArgument("configuration length differs from RBM size");
}

cplx LookupTable::log_ratio_flip(int i) const {
#ifndef NDEBUG
  if (coherence_error() > 1e-10) throw NumericalError("stale RBM lookup table");
#endif
  const RbmState& s = rbm_->expanded();
  const double vi = v_[i];
  cplx acc = -2.0 * s.a(i) * vi;
  for (Eigen::Index j = 0; j < thetas_.size(); ++j)
    acc += log_cosh(thetas_(j) - 2.0 * vi * s.W(i, j)) - log_cosh(thetas_(j));
  return acc;
}

void LookupTable::flip(int i) {
  thetas_ -= 2.0 * static_cast<double>(v_[i]) * rbm_->expanded().W.row(i).transpose();
  v_.flip(i);
}

double LookupTable::coherence_error() const { return (thetas_ - rbm_->thetas(v_)).cwiseAbs().maxCoeff(); }

cplx amplitude_ratio_flip(const LookupTable& table, int site) { return table.ratio_flip(site); }

cplx local_energy(const IsingParams& p, const LookupTable& table) {
  cplx e = diagonal_energy(p, table.config());
  if (p.field_x != 0.0)
    for (int i = 0; i < p.sites; ++i) e += -p.field_x * table.ratio_flip(i);
  return e;
}

cplx local_energy(const Rbm& rbm, const IsingParams& p, const SpinConfig& v) {
  return local_energy(p, LookupTable(rbm, v));
}

double ExactDistribution::probability(std::uint64_t index) const {
  return std::exp(2.0 * log_amplitudes[index].real() - log_norm);
}

std::vector<double> ExactDistribution::probabilities() const {
  std::vector<double> p(log_amplitudes.size());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = probability(k);
  return p;
}

ExactDistribution enumerate_exact(const Rbm& rbm) {
  check_exact_size(rbm.sites());
  const int n = rbm.sites();
  const std::uint64_t dim = std::uint64_t{1} << n;
  ExactDistribution d;
  d.sites = n;
  d.log_amplitudes.resize(dim);
  double max_re = -std::numeric_limits<double>::infinity();
  for (std::uint64_t v = 0; v < dim; ++v) {
    d.log_amplitudes[v] = rbm.log_amplitude(SpinConfig::from_index(v, n));
    max_re = std::max(max_re, d.log_amplitudes[v].real());
  }
  double acc = 0.0;
  for (const cplx& l : d.log_amplitudes) acc += std::exp(2.0 * (l.real() - max_re));
  d.log_norm = 2.0 * max_re + std::log(acc);
  return d;
}

namespace {

nlohmann::json complex_array(const Eigen::VectorXcd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back({{"re", v(k).real()}, {"im", v(k).imag()}});
  return out;
}

}  // namespace

std::string rbm_to_json(const Rbm& rbm) {
  nlohmann::json j;
  j["format"] = "quench-rbm";
  j["version"] = 1;
  j["sites"] = rbm.sites();
  j["hidden"] = rbm.hidden();
  j["alpha"] = rbm.alpha();
  j["symmetry"] = to_string(rbm.symmetry());
  j["parameters"] = complex_array(rbm.parameters());
  return j.dump(1);
}

namespace {

Rbm parse_snapshot(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.value("format", "") != "quench-rbm") throw InvalidArgument("not an RBM snapshot");
  if (j.at("version").get<int>() != 1) throw InvalidArgument("unsupported RBM snapshot version");
  const int n = j.at("sites").get<int>();
  const int m = j.at("hidden").get<int>();
  const RbmSymmetry sym = rbm_symmetry_from_string(j.at("symmetry").get<std::string>());
  if (n < 2 || m < 1) throw InvalidArgument("snapshot has invalid layer sizes");
  Rbm r;
  if (sym == RbmSymmetry::translation) {
    if (m % n != 0) throw InvalidArgument("symmetric snapshot needs hidden = alpha * sites");
    r = Rbm::zeros(n, m / n, sym);
  } else {
    r = Rbm(RbmState{Eigen::VectorXcd::Zero(n), Eigen::VectorXcd::Zero(m), Eigen::MatrixXcd::Zero(n, m)});
  }
  const auto& arr = j.at("parameters");
  if (static_cast<Eigen::Index>(arr.size()) != r.parameter_count())
    throw InvalidArgument("snapshot parameter count mismatch");
  ParameterVector p(r.parameter_count());
  for (Eigen::Index k = 0; k < p.size(); ++k)
    p(k) = cplx(arr[static_cast<std::size_t>(k)].at("re").get<double>(), arr[static_cast<std::size_t>(k)].at("im").get<double>());
  r.set_parameters(p);
  return r;
}

}  // namespace

Rbm rbm_from_json(const std::string& text) {
  try {
    return parse_snapshot(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed RBM snapshot: ") + e.what());
  }
}

void save_rbm(const Rbm& rbm, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << rbm_to_json(rbm) << '\n';
}

Rbm load_rbm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return rbm_from_json(ss.str());
}

}  // namespace quench
