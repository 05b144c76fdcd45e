#include <doctest.h>

#include <set>

#include "rsor/kem.hpp"
#include "rsor/kem_game.hpp"
#include "rsor/oracles.hpp"

using namespace rsor;

namespace {

GroupElement toy(std::uint8_t v) { return GroupElement{Bytes{v}}; }

std::vector<KemKeyPair> keypairs(const Group& g, Rng& rng, std::size_t n) {
  std::vector<KemKeyPair> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(kem_keygen(g, rng));
  return out;
}

std::vector<GroupElement> pks(const std::vector<KemKeyPair>& kps) {
  std::vector<GroupElement> out;
  for (const auto& kp : kps) out.push_back(kp.pk);
  return out;
}

}  // namespace

TEST_SUITE("kem") {

TEST_CASE("toy group keygen, chain, decap and blinding by hand") {
  auto g = toy_group();
  KemKeyPair kp = kem_keypair_from(*g, g->from_u64(2));
  CHECK(kp.pk == toy(9));

  std::vector<GroupElement> keys{toy(9)};
  KemChain c = kem_chain_create(*g, g->from_u64(2), keys, 16);
  REQUIRE(c.layers.size() == 1);
  CHECK(c.layers[0].alpha == toy(9));
  CHECK(c.layers[0].s == toy(4));

  Decapsulation d = kem_decap(*g, g->from_u64(2), toy(9), 16);
  CHECK(d.s == toy(4));
  CHECK(d.k_mu == c.layers[0].k_mu);

  CHECK(kem_blind(*g, toy(9), g->from_u64(3)) == toy(3));
  CHECK(kem_blind(*g, toy(9), g->from_u64(3)) == g->exp_g(g->from_u64(1)));
  CHECK(kem_blind(*g, toy(5), g->from_u64(1)) == toy(5));
}

TEST_CASE("empty path and invalid keys are rejected") {
  auto g = ristretto255();
  std::vector<GroupElement> none;
  CHECK_THROWS_AS(kem_chain_create(*g, g->from_u64(3), none, 16), ArgumentError);
  std::vector<GroupElement> bad{GroupElement{Bytes(32, 0)}};
  CHECK_THROWS_AS(kem_chain_create(*g, g->from_u64(3), bad, 16), DecodeError);
}

TEST_CASE("keygen draws are distinct and consistent") {
  auto g = ristretto255();
  Rng rng(21);
  std::set<std::string> seen;
  for (int i = 0; i < 100; ++i) {
    KemKeyPair kp = kem_keygen(*g, rng);
    CHECK(g->exp_g(kp.sk) == kp.pk);
    seen.insert(to_hex(kp.sk.view()));
  }
  CHECK(seen.size() == 100);
}

TEST_CASE("chain and hop-by-hop decapsulation agree") {
  auto g = ristretto255();
  Rng rng(22);
  std::size_t mismatches = 0;
  for (std::size_t n = 1; n <= 5; ++n) {
    for (int trial = 0; trial < 50; ++trial) {
      auto kps = keypairs(*g, rng, n);
      Scalar x = g->random_scalar(rng);
      KemChain c = kem_chain_create(*g, x, pks(kps), 16);
      CHECK(c.layers.front().alpha == g->exp_g(x));
      GroupElement alpha = g->exp_g(x);
      for (std::size_t i = 0; i < n; ++i) {
        Decapsulation d = kem_decap(*g, kps[i].sk, alpha, 16);
        const LayerSecrets& l = c.layers[i];
        if (!(l.alpha == alpha && l.s == d.s && l.b == d.b && l.k_rho == d.k_rho &&
              l.k_mu == d.k_mu && l.k_pi == d.k_pi)) {
          ++mismatches;
        }
        CHECK(l.b == ro_hb(*g, l.alpha, l.s));
        alpha = kem_blind(*g, alpha, d.b);
      }
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("blinded elements along a chain are fresh") {
  auto g = ristretto255();
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    auto kps = keypairs(*g, rng, 5);
    KemChain c = kem_chain_create(*g, g->random_scalar(rng), pks(kps), 16);
    std::set<GroupElement> alphas;
    for (const auto& l : c.layers) alphas.insert(l.alpha);
    CHECK(alphas.size() == 5);
  }
}

TEST_CASE("DH symmetry") {
  auto g = ristretto255();
  Rng rng(24);
  KemKeyPair kp = kem_keygen(*g, rng);
  Scalar x = g->random_scalar(rng);
  CHECK(kem_decap(*g, kp.sk, g->exp_g(x), 16).s == g->exp(kp.pk, x));
}

TEST_CASE("kem game controls") {
  KemGameConfig cfg;
  cfg.group = ristretto255();
  Rng rng(25);
  int guess_wins = 0;
  for (int i = 0; i < 1000; ++i) {
    auto adv = make_kem_guessing_adversary(rng.fork("adv" + std::to_string(i)));
    Rng ch = rng.fork("ch" + std::to_string(i));
    KemGameResult r = kem_game_run(*adv, 1 + static_cast<std::size_t>(i % 5), cfg, ch);
    CHECK_FALSE(r.rejected);
    guess_wins += r.adversary_won ? 1 : 0;
  }
  CHECK(guess_wins >= 450);
  CHECK(guess_wins <= 550);

  cfg.white_box = true;
  int wb_wins = 0;
  int bad = 0;
  for (int i = 0; i < 200; ++i) {
    auto adv = make_kem_white_box_adversary(rng.fork("wb" + std::to_string(i)));
    Rng ch = rng.fork("wbch" + std::to_string(i));
    KemGameResult r = kem_game_run(*adv, 5, cfg, ch);
    wb_wins += r.adversary_won ? 1 : 0;
    bad += r.bad ? 1 : 0;
  }
  CHECK(wb_wins == 200);
  CHECK(bad == 200);
}

TEST_CASE("kem game transcripts hide the bit in their length") {
  KemGameConfig cfg;
  cfg.group = ristretto255();
  cfg.white_box = true;
  for (int i = 0; i < 20; ++i) {
    std::string t[2];
    for (int b = 0; b < 2; ++b) {
      cfg.forced_bit = b;
      auto adv = make_kem_white_box_adversary(Rng(100 + i));
      Rng ch(200 + i);
      t[b] = kem_game_run(*adv, 4, cfg, ch).transcript;
    }
    CHECK(t[0].size() == t[1].size());
    CHECK(t[0] != t[1]);
  }
}

TEST_CASE("kem game b=0 challenge equals honest decapsulation") {
  struct Probe final : KemAdversary {
    KemChallenge ch;
    std::optional<KemDecapAnswer> own;
    bool refused = false;
    KemSubmission submit(std::size_t n, KemOracles& o) override {
      Rng r(5);
      KemSubmission s{0, {}};
      for (std::size_t i = 0; i + 1 < n; ++i) s.keys.push_back(kem_keygen(o.group(), r).pk);
      return s;
    }
    void on_challenge(const KemAux&, const KemChallenge& c, KemOracles& o) override {
      ch = c;
      refused = !o.decap(c.alpha_j).has_value();
    }
    bool guess(KemOracles&) override { return false; }
  };
  KemGameConfig cfg;
  cfg.group = ristretto255();
  cfg.forced_bit = 0;
  Probe probe;
  Rng ch(9);
  KemGameResult r = kem_game_run(probe, 3, cfg, ch);
  CHECK(r.adversary_won);
  CHECK(probe.refused);
  CHECK(probe.ch.key.size() == 48);
}

TEST_CASE("kem game rejects duplicate or invalid keys") {
  struct Dup final : KemAdversary {
    KemSubmission submit(std::size_t, KemOracles& o) override {
      Rng r(1);
      GroupElement y = kem_keygen(o.group(), r).pk;
      return KemSubmission{1, {y, y}};
    }
    bool guess(KemOracles&) override { return true; }
  };
  struct Bad final : KemAdversary {
    KemSubmission submit(std::size_t, KemOracles&) override {
      return KemSubmission{0, {GroupElement{Bytes(32, 0)}}};
    }
    bool guess(KemOracles&) override { return true; }
  };
  KemGameConfig cfg;
  cfg.group = ristretto255();
  Rng ch(1);
  Dup d;
  CHECK(kem_game_run(d, 3, cfg, ch).rejected);
  Bad b;
  CHECK(kem_game_run(b, 2, cfg, ch).rejected);
}

}  // TEST_SUITE
