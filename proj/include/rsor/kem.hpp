#pragma once

#include <span>
#include <vector>

#include "rsor/bytes.hpp"
#include "rsor/group.hpp"
#include "rsor/rng.hpp"

namespace rsor {

struct KemKeyPair {
  Scalar sk;
  GroupElement pk;
};

struct LayerSecrets {
  GroupElement alpha;
  GroupElement s;
  Scalar b;
  Bytes k_rho;
  Bytes k_mu;
  Bytes k_pi;

  friend bool operator==(const LayerSecrets&, const LayerSecrets&) = default;
};

struct KemChain {
  Scalar x;
  std::vector<LayerSecrets> layers;
};

struct Decapsulation {
  Bytes k_rho;
  Bytes k_mu;
  Bytes k_pi;
  Scalar b;
  GroupElement s;
};

KemKeyPair kem_keygen(const Group& group, Rng& rng);
KemKeyPair kem_keypair_from(const Group& group, const Scalar& sk);

/// Derives b and the three symmetric keys for one layer.
LayerSecrets kem_layer(const Group& group, const GroupElement& alpha, const GroupElement& s,
                       std::size_t kappa);

/// Sender-side chain. Throws ArgumentError on an empty key list and
/// DecodeError on an invalid key.
KemChain kem_chain_create(const Group& group, const Scalar& x,
                          std::span<const GroupElement> pubkeys, std::size_t kappa);

Decapsulation kem_decap(const Group& group, const Scalar& sk, const GroupElement& alpha,
                        std::size_t kappa);

GroupElement kem_blind(const Group& group, const GroupElement& alpha, const Scalar& b);

}  // namespace rsor
