#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>

#include "rsor/bytes.hpp"

namespace rsor {

/// Deterministic ChaCha20-based generator. Every randomized operation in the
/// library takes one of these; there is no ambient randomness.
class Rng {
 public:
  using result_type = std::uint64_t;
  using Seed = std::array<std::uint8_t, 32>;

  explicit Rng(std::uint64_t seed);
  explicit Rng(const Seed& key);

  /// Stream keyed by H(label || material); independent of any other label.
  static Rng derive(ByteView material, std::string_view label);

  void fill(std::span<std::uint8_t> out);
  Bytes bytes(std::size_t n);
  Seed seed32();

  result_type operator()();
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Uniform in [0, bound). bound must be nonzero.
  std::uint64_t uniform(std::uint64_t bound);
  bool coin() { return (operator()() & 1U) != 0; }

  /// Child stream; the parent's state is not advanced.
  Rng fork(std::string_view label) const;

 private:
  void refill();

  Seed key_{};
  std::uint64_t counter_ = 0;
  std::array<std::uint8_t, 64> block_{};
  std::size_t pos_ = 64;
};

}  // namespace rsor
