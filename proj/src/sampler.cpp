#include "quench/sampler.hpp"

#include <cmath>
#include <random>

#include "quench/error.hpp"

namespace quench {

double run_metropolis(const Rbm& rbm, const ChainConfig& cfg, const std::function<void(const LookupTable&)>& visit) {
  if (cfg.samples < 1) throw InvalidArgument("chain needs at least one sample");
  const int n = rbm.sites();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> site(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<int> start(static_cast<std::size_t>(n));
  for (int& s : start) s = (rng() & 1U) ? 1 : -1;
  LookupTable table(rbm, SpinConfig(std::move(start)));

  long accepted = 0, proposed = 0;
  auto step = [&] {
    const int i = site(rng);
    const double p = std::exp(2.0 * table.log_ratio_flip(i).real());
    ++proposed;
    if (p >= 1.0 || unit(rng) < p) {
      table.flip(i);
      ++accepted;
    }
  };

  for (long k = 0; k < cfg.effective_burn_in(n); ++k) step();
  const long thin = cfg.effective_thinning(n);
  for (long s = 0; s < cfg.samples; ++s) {
    for (long k = 0; k < thin; ++k) step();
    table.refresh();
    visit(table);
  }
  return proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0;
}

SampleSet sample_metropolis(const Rbm& rbm, const ChainConfig& cfg) {
  SampleSet out;
  out.configs.reserve(static_cast<std::size_t>(cfg.samples));
  out.acceptance_rate = run_metropolis(rbm, cfg, [&](const LookupTable& t) { out.configs.push_back(t.config()); });
  return out;
}

}  // namespace quench
