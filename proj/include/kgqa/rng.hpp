#pragma once

// Deterministic random source.  splitmix64 steps with an explicit stream
// derivation so that (seed, ordinal) pairs yield independent, reproducible
// sequences on every platform.  std::mt19937 + std:: distributions are
// avoided on purpose: distribution output is implementation-defined and
// byte-identical artifacts across toolchains are a hard requirement here.

#include <cstdint>
#include <vector>

namespace kgqa {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Independent stream for a given (seed, stream) pair.
  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    Rng r(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ULL)));
    return r;
  }

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform integer in [0, n).  n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  // Uniform double in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }

  // Index into a weight vector; weights must be non-negative with a
  // positive sum.
  std::size_t weighted(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double roll = unit() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (roll < acc) return i;
    }
    return weights.size() - 1;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Deterministic sample of k distinct elements, preserving no input order.
  template <class T>
  std::vector<T> sample(std::vector<T> pool, std::size_t k) {
    shuffle(pool);
    if (pool.size() > k) pool.resize(k);
    return pool;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace kgqa
