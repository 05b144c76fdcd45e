#pragma once

#include <cstdint>
#include <type_traits>
#include <vector>

#include "rsor/rng.hpp"

namespace rsor {

enum class BatchMode { serial, parallel };

/// Seed of trial i in a batch; independent of scheduling.
inline std::uint64_t trial_seed(std::uint64_t batch_seed, std::size_t i) {
  Bytes material(16);
  for (std::size_t k = 0; k < 8; ++k) {
    material[k] = static_cast<std::uint8_t>(batch_seed >> (8 * k));
    material[8 + k] = static_cast<std::uint8_t>(static_cast<std::uint64_t>(i) >> (8 * k));
  }
  return Rng::derive(material, "trial")();
}

/// Runs fn(trial_seed(seed, i)) for i in [0, count). Results are in trial
/// order and identical in both modes.
template <class F>
auto run_trials(std::size_t count, std::uint64_t seed, F&& fn, BatchMode mode = BatchMode::parallel) {
  using R = std::invoke_result_t<F&, std::uint64_t>;
  std::vector<R> out(count);
  if (mode == BatchMode::serial) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(trial_seed(seed, i));
    return out;
  }
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = fn(trial_seed(seed, static_cast<std::size_t>(i)));
  }
  return out;
}

}  // namespace rsor
