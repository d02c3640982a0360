#include "quench/exact.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "quench/error.hpp"

namespace quench {
namespace {

std::uint64_t dimension(int sites) { return std::uint64_t{1} << sites; }

// Abelian group generated by the site reflection i -> -i mod N and, when
// h_z = 0, the global spin flip. Both commute with H, so H is block diagonal
// in the symmetry-adapted basis |r, chi> = |orbit|^{-1/2} sum_s chi(g_s) |s>.
class SymmetryBlocks {
 public:
  explicit SymmetryBlocks(const IsingParams& p) : sites_(p.sites), with_flip_(p.field_z == 0.0) {
    const std::uint64_t dim = dimension(sites_);
    const int elements = with_flip_ ? 4 : 2;
    rep_.assign(dim, 0);
    element_.assign(dim, 0);
    orbit_size_.assign(dim, 0);
    for (std::uint64_t v = 0; v < dim; ++v) {
      std::uint64_t best = v;
      for (int g = 1; g < elements; ++g) best = std::min(best, act(g, v));
      rep_[v] = best;
    }
    for (std::uint64_t v = 0; v < dim; ++v) {
      for (int g = 0; g < elements; ++g)
        if (act(g, rep_[v]) == v) {
          element_[v] = static_cast<std::uint8_t>(g);
          break;
        }
      ++orbit_size_[rep_[v]];
    }
    for (std::uint64_t v = 0; v < dim; ++v)
      if (rep_[v] == v) representatives_.push_back(v);
    characters_ = with_flip_ ? 4 : 2;
  }

  int character_count() const { return characters_; }

  // chi(g) for character c; bit 0 of c is the reflection sign, bit 1 the flip sign.
  static int chi(int c, int g) {
    int s = 1;
    if ((g & 1) && (c & 1)) s = -s;
    if ((g & 2) && (c & 2)) s = -s;
    return s;
  }

  // Representatives compatible with character c (chi trivial on the stabilizer).
  std::vector<std::uint64_t> sector(int c) const {
    std::vector<std::uint64_t> out;
    const int elements = with_flip_ ? 4 : 2;
    for (std::uint64_t r : representatives_) {
      bool ok = true;
      for (int g = 1; g < elements && ok; ++g)
        if (act(g, r) == r && chi(c, g) != 1) ok = false;
      if (ok) out.push_back(r);
    }
    return out;
  }

  std::uint64_t rep(std::uint64_t v) const { return rep_[v]; }
  int element(std::uint64_t v) const { return element_[v]; }
  double orbit(std::uint64_t r) const { return orbit_size_[r]; }

 private:
  std::uint64_t reflect(std::uint64_t v) const {
    std::uint64_t out = 0;
    for (int i = 0; i < sites_; ++i)
      if ((v >> i) & 1U) out |= std::uint64_t{1} << ((sites_ - i) % sites_);
    return out;
  }
  std::uint64_t act(int g, std::uint64_t v) const {
    if (g & 1) v = reflect(v);
    if (g & 2) v ^= dimension(sites_) - 1;
    return v;
  }

  int sites_;
  bool with_flip_;
  int characters_ = 1;
  std::vector<std::uint64_t> rep_;
  std::vector<std::uint8_t> element_;
  std::vector<int> orbit_size_;
  std::vector<std::uint64_t> representatives_;
};

SpectralDecomposition diagonalize_by_symmetry(const IsingParams& p) {
  const SymmetryBlocks sym(p);
  const auto dim = static_cast<Eigen::Index>(dimension(p.sites));

  struct Block {
    int character;
    std::vector<std::uint64_t> reps;
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;
  };
  std::vector<Block> blocks;
  for (int c = 0; c < sym.character_count(); ++c) {
    Block b{c, sym.sector(c), {}, {}};
    const auto n = static_cast<Eigen::Index>(b.reps.size());
    if (n == 0) continue;
    std::vector<Eigen::Index> position(static_cast<std::size_t>(dim), -1);
    for (Eigen::Index k = 0; k < n; ++k) position[b.reps[static_cast<std::size_t>(k)]] = k;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const std::uint64_t r = b.reps[static_cast<std::size_t>(k)];
      h(k, k) += diagonal_energy(p, r);
      for (int i = 0; i < p.sites; ++i) {
        const std::uint64_t s = r ^ (std::uint64_t{1} << i);
        const Eigen::Index row = position[sym.rep(s)];
        if (row < 0) continue;
        h(row, k) += -p.field_x * SymmetryBlocks::chi(c, sym.element(s)) * std::sqrt(sym.orbit(r) / sym.orbit(sym.rep(s)));
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
    b.energies = solver.eigenvalues();
    b.vectors = solver.eigenvectors();
    blocks.push_back(std::move(b));
  }

  // merge block spectra in ascending order
  std::vector<std::pair<double, std::pair<std::size_t, Eigen::Index>>> order;
  order.reserve(static_cast<std::size_t>(dim));
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (Eigen::Index k = 0; k < blocks[b].energies.size(); ++k) order.push_back({blocks[b].energies(k), {b, k}});
  std::stable_sort(order.begin(), order.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

  // position of each representative inside its block, per block
  std::vector<std::vector<Eigen::Index>> slot(blocks.size(), std::vector<Eigen::Index>(static_cast<std::size_t>(dim), -1));
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (std::size_t k = 0; k < blocks[b].reps.size(); ++k) slot[b][blocks[b].reps[k]] = static_cast<Eigen::Index>(k);

  SpectralDecomposition s;
  s.params = p;
  s.energies.resize(dim);
  s.vectors.setZero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const auto [b, k] = order[static_cast<std::size_t>(col)].second;
    const Block& blk = blocks[b];
    s.energies(col) = order[static_cast<std::size_t>(col)].first;
    for (std::uint64_t v = 0; v < static_cast<std::uint64_t>(dim); ++v) {
      const std::uint64_t r = sym.rep(v);
      const Eigen::Index pos = slot[b][r];
      if (pos < 0) continue;
      s.vectors(static_cast<Eigen::Index>(v), col) =
          SymmetryBlocks::chi(blk.character, sym.element(v)) * blk.vectors(pos, k) / std::sqrt(sym.orbit(r));
    }
  }
  return s;
}

}  // namespace

StateVector StateVector::basis_state(int sites, std::uint64_t index) {
  StateVector s{sites, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dimension(sites)))};
  s.amplitudes(static_cast<Eigen::Index>(index)) = 1.0;
  return s;
}

StateVector StateVector::product_x_up(int sites) {
  const auto dim = static_cast<Eigen::Index>(dimension(sites));
  return {sites, Eigen::VectorXcd::Constant(dim, cplx(1.0 / std::sqrt(static_cast<double>(dim)), 0.0))};
}

double SpectralDecomposition::reconstruction_error() const {
  const Eigen::MatrixXd h = build_hamiltonian(params);
  const Eigen::MatrixXd r = vectors * energies.asDiagonal() * vectors.transpose();
  return (h - r).cwiseAbs().maxCoeff();
}

double SpectralDecomposition::orthonormality_error() const {
  const Eigen::MatrixXd g = vectors.transpose() * vectors;
  return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

void check_exact_size(int sites) {
  if (sites > kMaxExactSites)
    throw SizeLimitError("dense oracle supports at most " + std::to_string(kMaxExactSites) + " sites, got " +
                         std::to_string(sites));
}

Eigen::MatrixXd build_hamiltonian(const IsingParams& p) {
  p.validate();
  check_exact_size(p.sites);
  const auto dim = static_cast<Eigen::Index>(dimension(p.sites));
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (std::uint64_t v = 0; v < dimension(p.sites); ++v) {
    const auto c = static_cast<Eigen::Index>(v);
    h(c, c) = diagonal_energy(p, v);
    for (int i = 0; i < p.sites; ++i) h(static_cast<Eigen::Index>(v ^ (std::uint64_t{1} << i)), c) += -p.field_x;
  }
  return h;
}

Eigen::VectorXcd apply_hamiltonian(const IsingParams& p, const Eigen::VectorXcd& psi) {
  Eigen::VectorXcd out(psi.size());
  for (std::uint64_t v = 0; v < static_cast<std::uint64_t>(psi.size()); ++v) {
    cplx acc = diagonal_energy(p, v) * psi(static_cast<Eigen::Index>(v));
    for (int i = 0; i < p.sites; ++i) acc += -p.field_x * psi(static_cast<Eigen::Index>(v ^ (std::uint64_t{1} << i)));
    out(static_cast<Eigen::Index>(v)) = acc;
  }
  return out;
}

double energy_expectation(const IsingParams& p, const StateVector& psi) {
  return psi.amplitudes.dot(apply_hamiltonian(p, psi.amplitudes)).real() / psi.amplitudes.squaredNorm();
}

SpectralDecomposition diagonalize(const IsingParams& p) {
  p.validate();
  check_exact_size(p.sites);
  return diagonalize_by_symmetry(p);
}

GroundState ground_state(const SpectralDecomposition& s) {
  GroundState g;
  g.energy = s.energies(0);
  g.state.sites = s.params.sites;
  g.state.amplitudes = s.vectors.col(0).cast<cplx>();
  g.gap = s.energies.size() > 1 ? s.energies(1) - s.energies(0) : 0.0;
  g.degenerate = g.gap < 1e-12;
  return g;
}

GroundState ground_state(const IsingParams& p) { return ground_state(diagonalize(p)); }

Propagator::Propagator(const SpectralDecomposition& spectrum, const StateVector& psi0)
    : Propagator(std::shared_ptr<const SpectralDecomposition>(&spectrum, [](const SpectralDecomposition*) {}), psi0) {}

Propagator::Propagator(SpectralDecomposition&& spectrum, const StateVector& psi0)
    : Propagator(std::make_shared<const SpectralDecomposition>(std::move(spectrum)), psi0) {}

Propagator::Propagator(std::shared_ptr<const SpectralDecomposition> spectrum, const StateVector& psi0)
    : spectrum_(std::move(spectrum)) {
  if (psi0.sites != spectrum_->params.sites) throw InvalidArgument("state and Hamiltonian sizes differ");
  const Eigen::MatrixXd& v = spectrum_->vectors;
  const Eigen::VectorXd re = v.transpose() * psi0.amplitudes.real();
  const Eigen::VectorXd im = v.transpose() * psi0.amplitudes.imag();
  overlaps_ = re.cast<cplx>() + cplx(0.0, 1.0) * im.cast<cplx>();
}

StateVector Propagator::at(double t) const {
  const Eigen::VectorXd& e = spectrum_->energies;
  Eigen::VectorXcd c(overlaps_.size());
  for (Eigen::Index n = 0; n < c.size(); ++n) c(n) = std::polar(1.0, -e(n) * t) * overlaps_(n);
  const Eigen::VectorXd re = spectrum_->vectors * c.real();
  const Eigen::VectorXd im = spectrum_->vectors * c.imag();
  return {spectrum_->params.sites, re.cast<cplx>() + cplx(0.0, 1.0) * im.cast<cplx>()};
}

StateVector evolve(const SpectralDecomposition& spectrum, const StateVector& psi0, double t) {
  return Propagator(spectrum, psi0).at(t);
}

StateVector evolve(const StateVector& psi0, const IsingParams& final_params, double t) {
  const SpectralDecomposition s = diagonalize(final_params);
  return evolve(s, psi0, t);
}

double czz(const StateVector& psi, int d) {
  const int n = psi.sites;
  double acc = 0.0;
  for (std::uint64_t v = 0; v < dimension(n); ++v) {
    const double w = std::norm(psi.amplitudes(static_cast<Eigen::Index>(v)));
    if (w == 0.0) continue;
    int corr = 0;
    for (int i = 0; i < n; ++i) corr += spin_of_bit(v, i) * spin_of_bit(v, (i + d) % n);
    acc += w * corr;
  }
  return acc / (n * psi.amplitudes.squaredNorm());
}

std::vector<double> czz_profile(const StateVector& psi) {
  const int n = psi.sites;
  std::vector<double> out(static_cast<std::size_t>(n / 2 + 1), 0.0);
  for (std::uint64_t v = 0; v < dimension(n); ++v) {
    const double w = std::norm(psi.amplitudes(static_cast<Eigen::Index>(v)));
    for (int d = 0; d <= n / 2; ++d) {
      int corr = 0;
      for (int i = 0; i < n; ++i) corr += spin_of_bit(v, i) * spin_of_bit(v, (i + d) % n);
      out[static_cast<std::size_t>(d)] += w * corr;
    }
  }
  const double norm = n * psi.amplitudes.squaredNorm();
  for (double& x : out) x /= norm;
  return out;
}

double sigma_x(const StateVector& psi) {
  const int n = psi.sites;
  double acc = 0.0;
  for (std::uint64_t v = 0; v < dimension(n); ++v)
    for (int i = 0; i < n; ++i)
      acc += std::real(std::conj(psi.amplitudes(static_cast<Eigen::Index>(v))) *
                       psi.amplitudes(static_cast<Eigen::Index>(v ^ (std::uint64_t{1} << i))));
  return acc / (n * psi.amplitudes.squaredNorm());
}

double entanglement_entropy(const StateVector& psi) {
  if (psi.sites % 2 != 0) throw InvalidArgument("half-chain entropy needs an even number of sites");
  const auto side = static_cast<Eigen::Index>(dimension(psi.sites / 2));
  const Eigen::Map<const Eigen::MatrixXcd> m(psi.amplitudes.data(), side, side);
  const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXcd>(m).singularValues();
  const double norm = sv.squaredNorm();
  double s = 0.0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    const double p = sv(k) * sv(k) / norm;
    if (p > 1e-300) s -= p * std::log(p);
  }
  return std::max(s, 0.0);
}

}  // namespace quench
