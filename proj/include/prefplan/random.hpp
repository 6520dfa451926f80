#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace prefplan {

using Seed = std::uint64_t;

/// SplitMix64 finalizer; a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent child seed from a parent seed and a list of stream
/// identifiers. Used to split one experiment seed into per-chain, per-level
/// and per-rollout streams without sharing generator state.
Seed derive_seed(Seed parent, std::initializer_list<std::uint64_t> streams) noexcept;

/// Bit pattern of a double, for keying derived seeds on real parameters.
std::uint64_t bits_of(double x) noexcept;

/// Seedable generator. The engine is std::mt19937_64, whose output sequence
/// is fixed by the standard; every distribution below is implemented here
/// rather than through <random> distributions, whose algorithms are
/// implementation-defined. Together this makes every draw bit-reproducible
/// across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(Seed seed) : engine_(seed), seed_(seed) {}

  Seed seed() const noexcept { return seed_; }

  /// Child generator on an independent stream.
  Rng split(std::uint64_t stream) const { return Rng(derive_seed(seed_, {stream})); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n); unbiased (rejection sampling).
  std::uint64_t uniform_index(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal by the Box-Muller transform (both variates are used).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Index drawn proportionally to nonnegative, not necessarily normalized,
  /// weights. At least one weight must be positive.
  std::size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
  Seed seed_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace prefplan
