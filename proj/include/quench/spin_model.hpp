#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace quench {

using cplx = std::complex<double>;

// Periodic Ising chain
//   H = -J sum_i s^z_i s^z_{i+1} - h_x sum_i s^x_i - h_z sum_i s^z_i
// For N = 2 the two bonds (0,1) and (1,0) coincide and the coupling is doubled.
struct IsingParams {
  int sites = 2;
  double coupling = 1.0;
  double field_x = 0.0;
  double field_z = 0.0;

  void validate() const;
  bool operator==(const IsingParams&) const = default;
};

// Basis convention shared by all modules: v_i = +1 <-> bit i clear,
// index = sum_i (1 - v_i)/2 * 2^i, site 0 is the least significant bit.
class SpinConfig {
 public:
  SpinConfig() = default;
  explicit SpinConfig(std::vector<int> spins);
  static SpinConfig all_up(int sites);
  static SpinConfig from_index(std::uint64_t index, int sites);

  int size() const { return static_cast<int>(spins_.size()); }
  int operator[](int i) const { return spins_[static_cast<std::size_t>(i)]; }
  std::span<const int> spins() const { return spins_; }
  std::uint64_t index() const;

  void flip(int i) { spins_[static_cast<std::size_t>(i)] *= -1; }
  SpinConfig flipped(int i) const;
  // (shifted)_i = v_{(i + shift) mod N}
  SpinConfig shifted(int shift) const;

  bool operator==(const SpinConfig&) const = default;

 private:
  std::vector<int> spins_;
};

struct QuenchProtocol {
  IsingParams initial;
  IsingParams final;
  std::vector<double> times;

  double horizon() const { return times.empty() ? 0.0 : times.back(); }
  void validate() const;
  static std::vector<double> uniform_grid(double t_max, int steps);
  bool operator==(const QuenchProtocol&) const = default;
};

struct MatrixElement {
  SpinConfig config;
  cplx value;
};

inline int spin_of_bit(std::uint64_t index, int site) { return ((index >> site) & 1U) ? -1 : 1; }

double diagonal_energy(const IsingParams& params, const SpinConfig& v);
// Same quantity straight from a basis index, used by the dense oracles.
double diagonal_energy(const IsingParams& params, std::uint64_t index);

// Diagonal element first, then one single-spin flip per site in ascending
// order. Flip elements are emitted even when h_x == 0.
std::vector<MatrixElement> connected_configs(const IsingParams& params, const SpinConfig& v);

}  // namespace quench

namespace quench {

// Cyclic-shift orbits of the 2^N basis states. Representative = smallest index.
class TranslationOrbits {
 public:
  explicit TranslationOrbits(int sites);

  int sites() const { return sites_; }
  const std::vector<std::uint64_t>& representatives() const { return reps_; }
  const std::vector<int>& orbit_sizes() const { return sizes_; }
  // Position in representatives() of the orbit containing basis index v.
  std::uint32_t orbit_of(std::uint64_t v) const { return orbit_of_[v]; }

 private:
  int sites_;
  std::vector<std::uint64_t> reps_;
  std::vector<int> sizes_;
  std::vector<std::uint32_t> orbit_of_;
};

// Shared, lazily built table (thread-safe).
const TranslationOrbits& translation_orbits(int sites);

}  // namespace quench
