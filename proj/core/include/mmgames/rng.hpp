#ifndef MMGAMES_RNG_HPP
#define MMGAMES_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace mmg {

// Deterministic random source. std::uniform_real_distribution is implementation
// defined, so doubles are built from the raw 64-bit stream by hand; trajectories
// are then bit-identical across platforms for a fixed seed.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen(seed) {}
  // sub-stream for trial `index` of a fan-out, independent of worker scheduling
  Rng(uint64_t seed, uint64_t index) {
    std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                      static_cast<uint32_t>(index), static_cast<uint32_t>(index >> 32)};
    gen.seed(seq);
  }

  // uniform on [0,1) with 53 random bits
  double Uniform() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  uint64_t UInt(uint64_t n) { return gen() % n; }  // small n only; bias is irrelevant here

  // index sampled from an unnormalized nonnegative weight vector
  int Choice(const double* w, int k) {
    double total = 0.0;
    for (int i = 0; i < k; i++) total += w[i];
    double r = Uniform() * total;
    for (int i = 0; i < k - 1; i++) {
      r -= w[i];
      if (r < 0.0) return i;
    }
    return k - 1;
  }

  // interior point of the (k-1)-simplex; Dirichlet(1,..,1) blended toward the
  // barycenter so every entry stays well away from the boundary
  std::vector<double> SimplexInterior(int k, double floor_weight = 0.1) {
    std::vector<double> v(k);
    double sum = 0.0;
    for (int i = 0; i < k; i++) {
      v[i] = -std::log(1.0 - Uniform());
      sum += v[i];
    }
    for (int i = 0; i < k; i++) {
      v[i] = (1.0 - floor_weight) * v[i] / sum + floor_weight / k;
    }
    return v;
  }

  std::mt19937_64 gen;
};

}  // namespace mmg

#endif
