#pragma once

#include <cstdint>
#include <limits>

namespace htc {

/// SplitMix64 finaliser; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t z);

/// Key of an independent stream derived from (master seed, index, tag).
std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t index, std::uint64_t tag = 0);

/// Counter-based generator: draw k of a stream is mix64(key + k * gamma). Any
/// draw depends only on (key, k), never on what other streams consumed.
/// Satisfies UniformRandomBitGenerator so it plugs into <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Stream tags so different consumers of one realization seed never overlap.
enum class StreamTag : std::uint64_t { Disorder = 1, Trajectories = 2, Realization = 3 };

}  // namespace htc
