#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rsor/group.hpp"
#include "rsor/kem.hpp"
#include "rsor/rng.hpp"

namespace rsor {

struct KemSubmission {
  std::size_t j = 0;
  /// n-1 keys; the honest key is inserted at position j.
  std::vector<GroupElement> keys;
};

/// Layers below the challenge position.
struct KemAux {
  GroupElement alpha0;
  std::vector<Bytes> hstar;
  std::vector<Scalar> b;
};

struct KemChallenge {
  GroupElement alpha_j;
  Bytes key;  // 3 kappa bytes
  Scalar b_j;
  std::vector<Bytes> hstar_after;
  std::vector<Scalar> b_after;
};

struct KemDecapAnswer {
  Bytes hstar;
  Scalar b;
};

class KemGameState;

/// Oracle access handed to the adversary: decapsulation under the honest
/// key, h_* and h_b.
class KemOracles {
 public:
  explicit KemOracles(KemGameState& st) : st_(st) {}
  /// nullopt when alpha is the challenge encapsulation.
  std::optional<KemDecapAnswer> decap(const GroupElement& alpha);
  Bytes h_star(const GroupElement& z);
  Scalar h_b(const GroupElement& a, const GroupElement& z);
  const Group& group() const;
  std::size_t kappa() const;

 private:
  KemGameState& st_;
};

class KemAdversary {
 public:
  virtual ~KemAdversary() = default;
  virtual void on_public_key(const GroupElement& pk, KemOracles& o) {
    (void)pk;
    (void)o;
  }
  virtual KemSubmission submit(std::size_t n, KemOracles& o) = 0;
  /// Only called when the game runs in white-box mode.
  virtual void on_white_box(const Scalar& x_prime) { (void)x_prime; }
  virtual void on_challenge(const KemAux& aux, const KemChallenge& ch, KemOracles& o) {
    (void)aux;
    (void)ch;
    (void)o;
  }
  virtual bool guess(KemOracles& o) = 0;
};

struct KemGameConfig {
  GroupPtr group;
  std::size_t kappa = 16;
  std::size_t max_hops = 5;
  bool white_box = false;
  std::optional<int> forced_bit;
};

struct KemGameResult {
  bool rejected = false;
  bool adversary_won = false;
  int bit = 0;
  bool bad = false;
  std::string transcript;  // JSON lines
};

KemGameResult kem_game_run(KemAdversary& adversary, std::size_t n, const KemGameConfig& config,
                           Rng& challenger_rng);

/// Uniform coin flip.
std::unique_ptr<KemAdversary> make_kem_guessing_adversary(Rng rng);
/// Recomputes s_j from x' and compares h_*(s_j) to the challenge key.
std::unique_ptr<KemAdversary> make_kem_white_box_adversary(Rng rng);

}  // namespace rsor
