#include <doctest.h>

#include <cmath>
#include <map>

#include "quench/sampler.hpp"

using namespace quench;

TEST_SUITE("sampler") {
  TEST_CASE("defaults scale with the chain length") {
    ChainConfig c;
    CHECK(c.effective_burn_in(8) == 8000);
    CHECK(c.effective_thinning(8) == 8);
    c.burn_in = 0;
    c.thinning = 3;
    CHECK(c.effective_burn_in(8) == 0);
    CHECK(c.effective_thinning(8) == 3);
  }

  TEST_CASE("uniform state accepts every proposal") {
    ChainConfig c;
    c.samples = 20000;
    c.seed = 3;
    // every flip is accepted, so an even thinning would pin the parity
    c.thinning = 5;
    const SampleSet s = sample_metropolis(Rbm::zeros(4, 1, RbmSymmetry::none), c);
    CHECK(s.acceptance_rate == 1.0);
    std::map<std::uint64_t, long> counts;
    for (const auto& v : s.configs) ++counts[v.index()];
    CHECK(counts.size() == 16);
    for (const auto& [k, n] : counts) CHECK(std::abs(n / 20000.0 - 1.0 / 16) < 0.01);
  }

  TEST_CASE("fixed seed reproduces the stream") {
    const Rbm rbm = Rbm::random(6, 1, RbmSymmetry::none, 0.5, 4);
    ChainConfig c;
    c.samples = 500;
    c.seed = 77;
    const SampleSet a = sample_metropolis(rbm, c);
    const SampleSet b = sample_metropolis(rbm, c);
    CHECK(a.configs == b.configs);
    c.seed = 78;
    CHECK(sample_metropolis(rbm, c).configs != a.configs);
  }

  TEST_CASE("empirical distribution approaches |c|^2") {
    const Rbm rbm = Rbm::random(6, 1, RbmSymmetry::none, 0.25, 8);
    const ExactDistribution d = enumerate_exact(rbm);
    ChainConfig c;
    c.samples = 200000;
    c.seed = 5;
    std::vector<double> hist(64, 0.0);
    const double acc = run_metropolis(rbm, c, [&](const LookupTable& t) { hist[t.config().index()] += 1.0; });
    CHECK(acc > 0.0);
    CHECK(acc < 1.0);
    double tv = 0.0;
    for (std::uint64_t k = 0; k < 64; ++k) tv += std::abs(hist[k] / c.samples - d.probability(k));
    CHECK(0.5 * tv < 0.02);
  }

  TEST_CASE("detailed balance between neighbouring configurations") {
    // Flow v -> v' measured from consecutive chain states with thinning 1.
    const Rbm rbm = Rbm::random(4, 1, RbmSymmetry::none, 0.3, 10);
    const ExactDistribution d = enumerate_exact(rbm);
    ChainConfig c;
    c.samples = 400000;
    c.thinning = 1;
    c.burn_in = 1000;
    c.seed = 12;
    std::map<std::pair<std::uint64_t, std::uint64_t>, double> flow;
    std::uint64_t prev = 0;
    bool first = true;
    run_metropolis(rbm, c, [&](const LookupTable& t) {
      const std::uint64_t cur = t.config().index();
      if (!first && cur != prev) flow[{prev, cur}] += 1.0;
      prev = cur;
      first = false;
    });
    int checked = 0;
    for (const auto& [key, n] : flow) {
      if (key.first > key.second) continue;
      const double back = flow.count({key.second, key.first}) ? flow[{key.second, key.first}] : 0.0;
      if (n + back < 2000) continue;
      // counts are Poisson-like: allow 5 standard deviations
      CHECK(std::abs(n - back) < 5.0 * std::sqrt(n + back));
      ++checked;
    }
    CHECK(checked >= 16);
    CHECK(d.probabilities().size() == 16);
  }
}
