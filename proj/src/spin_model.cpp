#include "quench/spin_model.hpp"

#include <cmath>
#include <string>

#include "quench/error.hpp"

namespace quench {

void IsingParams::validate() const {
  if (sites < 2) throw InvalidArgument("sites must be >= 2, got " + std::to_string(sites));
  if (sites > 62) throw InvalidArgument("sites must be <= 62 for 64-bit basis indices");
  if (!std::isfinite(coupling) || !std::isfinite(field_x) || !std::isfinite(field_z))
    throw InvalidArgument("Ising couplings and fields must be finite");
}

SpinConfig::SpinConfig(std::vector<int> spins) : spins_(std::move(spins)) {
  for (int s : spins_)
    if (s != 1 && s != -1) throw InvalidArgument("spin values must be +1 or -1");
}

SpinConfig SpinConfig::all_up(int sites) { return SpinConfig(std::vector<int>(static_cast<std::size_t>(sites), 1)); }

SpinConfig SpinConfig::from_index(std::uint64_t index, int sites) {
  std::vector<int> s(static_cast<std::size_t>(sites));
  for (int i = 0; i < sites; ++i) s[static_cast<std::size_t>(i)] = spin_of_bit(index, i);
  SpinConfig c;
  c.spins_ = std::move(s);
  return c;
}

std::uint64_t SpinConfig::index() const {
  std::uint64_t idx = 0;
  for (int i = 0; i < size(); ++i)
    if (spins_[static_cast<std::size_t>(i)] < 0) idx |= std::uint64_t{1} << i;
  return idx;
}

SpinConfig SpinConfig::flipped(int i) const {
  SpinConfig c = *this;
  c.flip(i);
  return c;
}

SpinConfig SpinConfig::shifted(int shift) const {
  const int n = size();
  SpinConfig c = *this;
  for (int i = 0; i < n; ++i)
    c.spins_[static_cast<std::size_t>(i)] = spins_[static_cast<std::size_t>(((i + shift) % n + n) % n)];
  return c;
}

void QuenchProtocol::validate() const {
  initial.validate();
  final.validate();
  if (initial.sites != final.sites) throw InvalidArgument("initial and final site counts differ");
  if (times.empty() || times.front() != 0.0) throw InvalidArgument("time grid must start at 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw InvalidArgument("time grid must be strictly increasing");
  if (!(horizon() > 0.0)) throw InvalidArgument("t_max must be positive");
}

std::vector<double> QuenchProtocol::uniform_grid(double t_max, int steps) {
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) t[static_cast<std::size_t>(k)] = t_max * k / steps;
  return t;
}

double diagonal_energy(const IsingParams& p, const SpinConfig& v) {
  const int n = p.sites;
  double bonds = 0.0, mag = 0.0;
  for (int i = 0; i < n; ++i) {
    bonds += v[i] * v[(i + 1) % n];
    mag += v[i];
  }
  return -p.coupling * bonds - p.field_z * mag;
}

double diagonal_energy(const IsingParams& p, std::uint64_t index) {
  const int n = p.sites;
  double bonds = 0.0, mag = 0.0;
  for (int i = 0; i < n; ++i) {
    const int si = spin_of_bit(index, i);
    bonds += si * spin_of_bit(index, (i + 1) % n);
    mag += si;
  }
  return -p.coupling * bonds - p.field_z * mag;
}

std::vector<MatrixElement> connected_configs(const IsingParams& p, const SpinConfig& v) {
  std::vector<MatrixElement> out;
  out.reserve(static_cast<std::size_t>(p.sites) + 1);
  out.push_back({v, cplx(diagonal_energy(p, v), 0.0)});
  for (int i = 0; i < p.sites; ++i) out.push_back({v.flipped(i), cplx(-p.field_x, 0.0)});
  return out;
}

}  // namespace quench

#include <map>
#include <memory>
#include <mutex>

namespace quench {

TranslationOrbits::TranslationOrbits(int sites) : sites_(sites) {
  if (sites < 2 || sites > 24) throw InvalidArgument("translation orbits need 2 <= N <= 24");
  const std::uint64_t dim = std::uint64_t{1} << sites;
  const std::uint64_t mask = dim - 1;
  constexpr std::uint32_t unset = ~std::uint32_t{0};
  orbit_of_.assign(dim, unset);
  for (std::uint64_t v = 0; v < dim; ++v) {
    if (orbit_of_[v] != unset) continue;
    const auto id = static_cast<std::uint32_t>(reps_.size());
    reps_.push_back(v);
    int size = 0;
    std::uint64_t w = v;
    do {
      if (orbit_of_[w] == unset) {
        orbit_of_[w] = id;
        ++size;
      }
      w = ((w >> 1) | (w << (sites - 1))) & mask;
    } while (w != v);
    sizes_.push_back(size);
  }
}

const TranslationOrbits& translation_orbits(int sites) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<TranslationOrbits>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[sites];
  if (!slot) slot = std::make_unique<TranslationOrbits>(sites);
  return *slot;
}

}  // namespace quench
