#pragma once

#include <cstdint>
#include <random>

namespace cca {

/// Random stream used by every simulation routine.
///
/// Wraps std::mt19937_64, whose output sequence is fixed by the standard.
/// The derived variates are computed here rather than through the
/// <random> distributions, whose algorithms are implementation-defined, so
/// that a seed reproduces the same trajectory on every toolchain.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Exponential with the given rate (rate > 0).
  double exponential(double rate);

  bool bernoulli(double p) { return uniform() < p; }

  /// Fair coin: +1 or -1.
  int sign() { return (engine_() >> 63) != 0U ? 1 : -1; }

  /// Uniform integer in [0, n), n > 0. Unbiased (Lemire's rejection method).
  std::uint64_t below(std::uint64_t n);

  /// Number of failures before the first success, success probability p.
  std::uint64_t geometric_failures(double p);

private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of replica `index` under `master_seed`.
///
/// Counter-based: the master seed is offset by an odd multiple of the index
/// and passed through a bijective mixer, so distinct indices map to distinct
/// seeds and the value does not depend on the order replicas are run in.
constexpr std::uint64_t derive_replica_seed(std::uint64_t master_seed,
                                            std::uint64_t replica_index) {
  return mix64(master_seed + 0x9e3779b97f4a7c15ULL * (replica_index + 1));
}

} // namespace cca
