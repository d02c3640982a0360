#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "quench/rbm.hpp"

namespace quench {

// Negative burn_in / thinning select the defaults 1000*N and N proposals.
struct ChainConfig {
  long samples = 1000;
  long burn_in = -1;
  long thinning = -1;
  std::uint64_t seed = 1;

  long effective_burn_in(int sites) const { return burn_in < 0 ? 1000L * sites : burn_in; }
  long effective_thinning(int sites) const { return thinning < 0 ? sites : std::max(1L, thinning); }
};

struct SampleSet {
  std::vector<SpinConfig> configs;
  double acceptance_rate = 0.0;
};

// Single-site-flip Metropolis chain on |c_v|^2. The visitor is called once per
// emitted sample with the chain's lookup table; returns the acceptance rate.
double run_metropolis(const Rbm& rbm, const ChainConfig& config, const std::function<void(const LookupTable&)>& visit);

SampleSet sample_metropolis(const Rbm& rbm, const ChainConfig& config);

}  // namespace quench
