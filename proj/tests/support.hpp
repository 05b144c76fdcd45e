#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "rsor/kem.hpp"
#include "rsor/packet.hpp"

namespace testing_support {

using namespace rsor;

/// Twelve relays plus a sender "S", keyed deterministically.
struct Fixture {
  FormatParams params;
  std::map<std::string, KemKeyPair> keys;
  std::vector<std::string> relays;

  explicit Fixture(FormatParams p = default_params(), std::uint64_t seed = 1) : params(std::move(p)) {
    Rng rng(seed);
    for (int i = 1; i <= 12; ++i) {
      std::string name = "R" + std::to_string(i);
      relays.push_back(name);
      keys[name] = kem_keygen(*params.group, rng);
    }
    keys["S"] = kem_keygen(*params.group, rng);
  }

  Hop hop(const std::string& name) const { return Hop{name, keys.at(name).pk}; }
  const Scalar& sk(const std::string& name) const { return keys.at(name).sk; }

  std::vector<std::string> pick(Rng& rng, std::size_t n) const {
    std::vector<std::string> pool = relays;
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t k = rng.uniform(pool.size());
      out.push_back(pool[k]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
    }
    return out;
  }

  /// Random spec; a nonempty reply path ends at "S".
  OnionSpec spec(Rng& rng, std::size_t n, std::size_t nr) const {
    OnionSpec s;
    s.seed = rng.seed32();
    s.message = rng.bytes(1 + rng.uniform(params.max_message_len()));
    s.receiver = "rcv" + std::to_string(rng.uniform(1000));
    for (const auto& name : pick(rng, n)) s.forward.push_back(hop(name));
    if (nr > 0) {
      for (const auto& name : pick(rng, nr - 1)) s.reply.push_back(hop(name));
      s.reply.push_back(hop("S"));
    }
    return s;
  }

  const Scalar& sk_for(const OnionSpec& s, std::size_t layer) const {
    const std::size_t n = s.forward.size();
    return layer < n ? sk(s.forward[layer].name) : sk(s.reply[layer - n].name);
  }
  std::string name_for(const OnionSpec& s, std::size_t layer) const {
    const std::size_t n = s.forward.size();
    return layer < n ? s.forward[layer].name : s.reply[layer - n].name;
  }
};

}  // namespace testing_support
