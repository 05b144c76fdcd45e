#include "rsor/kem.hpp"

#include "rsor/oracles.hpp"

namespace rsor {

KemKeyPair kem_keygen(const Group& group, Rng& rng) {
  return kem_keypair_from(group, group.random_scalar(rng));
}

KemKeyPair kem_keypair_from(const Group& group, const Scalar& sk) {
  return KemKeyPair{sk, group.exp_g(sk)};
}

LayerSecrets kem_layer(const Group& group, const GroupElement& alpha, const GroupElement& s,
                       std::size_t kappa) {
  return LayerSecrets{alpha,
                      s,
                      ro_hb(group, alpha, s),
                      ro_hsym(OracleTag::rho, s, kappa),
                      ro_hsym(OracleTag::mu, s, kappa),
                      ro_hsym(OracleTag::pi, s, kappa)};
}

KemChain kem_chain_create(const Group& group, const Scalar& x,
                          std::span<const GroupElement> pubkeys, std::size_t kappa) {
  if (pubkeys.empty()) throw ArgumentError("empty path");
  KemChain chain{x, {}};
  chain.layers.reserve(pubkeys.size());
  Scalar e = x;
  GroupElement alpha = group.exp_g(x);
  for (std::size_t i = 0; i < pubkeys.size(); ++i) {
    GroupElement s = group.exp(pubkeys[i], e);
    chain.layers.push_back(kem_layer(group, alpha, s, kappa));
    const Scalar& b = chain.layers.back().b;
    if (i + 1 < pubkeys.size()) {
      alpha = group.exp(alpha, b);
      e = group.mul(e, b);
    }
  }
  return chain;
}

Decapsulation kem_decap(const Group& group, const Scalar& sk, const GroupElement& alpha,
                        std::size_t kappa) {
  GroupElement s = group.exp(alpha, sk);
  LayerSecrets l = kem_layer(group, alpha, s, kappa);
  return Decapsulation{std::move(l.k_rho), std::move(l.k_mu), std::move(l.k_pi), l.b,
                       std::move(l.s)};
}

GroupElement kem_blind(const Group& group, const GroupElement& alpha, const Scalar& b) {
  return group.exp(alpha, b);
}

}  // namespace rsor
