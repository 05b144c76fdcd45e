#include "rsor/kem_game.hpp"

#include <json.hpp>

#include "rsor/oracles.hpp"

namespace rsor {

using ojson = nlohmann::ordered_json;

class KemGameState {
 public:
  KemGameState(const KemGameConfig& cfg, KemKeyPair kp) : cfg(cfg), kp(std::move(kp)) {}

  const KemGameConfig& cfg;
  KemKeyPair kp;
  std::optional<GroupElement> alpha_j;
  std::optional<GroupElement> s_j;
  bool bad = false;

  // Oracle bookkeeping: L (decap answers), L_y (adversarial layers),
  // L_b (h_b answers), L_O (decap queries), L_h (h_* queries).
  std::map<GroupElement, KemDecapAnswer> L;
  std::vector<std::pair<GroupElement, KemDecapAnswer>> L_y;
  std::map<std::pair<GroupElement, GroupElement>, Scalar> L_b;
  std::vector<GroupElement> L_O;
  std::map<GroupElement, Bytes> L_h;

  std::string transcript;

  void log(const ojson& rec) {
    transcript += rec.dump();
    transcript += '\n';
  }
};

std::optional<KemDecapAnswer> KemOracles::decap(const GroupElement& alpha) {
  if (st_.alpha_j && alpha == *st_.alpha_j) {
    st_.log({{"oracle", "decap"}, {"in", to_hex(alpha.view())}, {"out", "refused"}});
    return std::nullopt;
  }
  auto it = st_.L.find(alpha);
  if (it == st_.L.end()) {
    st_.L_O.push_back(alpha);
    GroupElement s = st_.cfg.group->exp(alpha, st_.kp.sk);
    KemDecapAnswer ans{ro_hstar(s, st_.cfg.kappa), ro_hb(*st_.cfg.group, alpha, s)};
    it = st_.L.emplace(alpha, std::move(ans)).first;
  }
  st_.log({{"oracle", "decap"},
           {"in", to_hex(alpha.view())},
           {"out", to_hex(it->second.hstar) + to_hex(it->second.b.view())}});
  return it->second;
}

Bytes KemOracles::h_star(const GroupElement& z) {
  st_.cfg.group->decode(z.view());
  if (st_.s_j && z == *st_.s_j) st_.bad = true;
  auto it = st_.L_h.find(z);
  if (it == st_.L_h.end()) it = st_.L_h.emplace(z, ro_hstar(z, st_.cfg.kappa)).first;
  st_.log({{"oracle", "h_star"}, {"in", to_hex(z.view())}, {"out", to_hex(it->second)}});
  return it->second;
}

Scalar KemOracles::h_b(const GroupElement& a, const GroupElement& z) {
  st_.cfg.group->decode(a.view());
  st_.cfg.group->decode(z.view());
  if (st_.alpha_j && st_.s_j && a == *st_.alpha_j && z == *st_.s_j) st_.bad = true;
  auto key = std::make_pair(a, z);
  auto it = st_.L_b.find(key);
  if (it == st_.L_b.end()) it = st_.L_b.emplace(key, ro_hb(*st_.cfg.group, a, z)).first;
  st_.log({{"oracle", "h_b"},
           {"in", to_hex(a.view()) + to_hex(z.view())},
           {"out", to_hex(it->second.view())}});
  return it->second;
}

const Group& KemOracles::group() const { return *st_.cfg.group; }
std::size_t KemOracles::kappa() const { return st_.cfg.kappa; }

KemGameResult kem_game_run(KemAdversary& adversary, std::size_t n, const KemGameConfig& config,
                           Rng& challenger_rng) {
  if (!config.group) throw ArgumentError("kem game needs a group");
  if (n == 0 || n > 2 * config.max_hops) throw ArgumentError("kem game hop count out of range");
  const Group& g = *config.group;
  const std::size_t kappa = config.kappa;

  KemGameResult result;
  KemGameState st(config, kem_keygen(g, challenger_rng));
  KemOracles oracles(st);

  st.log({{"step", "pk"}, {"pk", to_hex(st.kp.pk.view())}});
  adversary.on_public_key(st.kp.pk, oracles);

  KemSubmission sub = adversary.submit(n, oracles);
  st.log({{"step", "submit"}, {"j", sub.j}, {"keys", sub.keys.size()}});

  std::vector<GroupElement> keys;
  bool ok = sub.j < n && sub.keys.size() + 1 == n;
  if (ok) {
    keys = sub.keys;
    keys.insert(keys.begin() + static_cast<std::ptrdiff_t>(sub.j), st.kp.pk);
    std::set<GroupElement> seen;
    for (const auto& y : keys) {
      if (!g.is_valid(y.view()) || !seen.insert(y).second) {
        ok = false;
        break;
      }
    }
  }
  if (!ok) {
    st.log({{"step", "reject"}});
    result.rejected = true;
    result.transcript = std::move(st.transcript);
    return result;
  }

  const int bit = config.forced_bit ? *config.forced_bit : (challenger_rng.coin() ? 1 : 0);
  const Scalar x_prime = g.random_scalar(challenger_rng);

  KemAux aux;
  KemChallenge ch;
  Scalar e = x_prime;
  GroupElement alpha = g.exp_g(x_prime);
  aux.alpha0 = alpha;
  for (std::size_t i = 0; i < n; ++i) {
    GroupElement s = g.exp(keys[i], e);
    Bytes hstar;
    Scalar b;
    if (i == sub.j) {
      st.alpha_j = alpha;
      st.s_j = s;
      ch.alpha_j = alpha;
      if (bit == 0) {
        hstar = ro_hstar(s, kappa);
        b = ro_hb(g, alpha, s);
      } else {
        hstar = challenger_rng.bytes(3 * kappa);
        b = g.random_scalar(challenger_rng);
      }
      ch.key = hstar;
      ch.b_j = b;
    } else {
      hstar = ro_hstar(s, kappa);
      b = ro_hb(g, alpha, s);
      st.L_y.emplace_back(alpha, KemDecapAnswer{hstar, b});
      if (i < sub.j) {
        aux.hstar.push_back(hstar);
        aux.b.push_back(b);
      } else {
        ch.hstar_after.push_back(hstar);
        ch.b_after.push_back(b);
      }
    }
    if (i + 1 < n) {
      alpha = g.exp(alpha, b);
      e = g.mul(e, b);
    }
  }

  ojson aux_rec{{"step", "aux"}, {"alpha0", to_hex(aux.alpha0.view())}};
  for (std::size_t i = 0; i < aux.hstar.size(); ++i) {
    aux_rec["layers"].push_back(to_hex(aux.hstar[i]) + to_hex(aux.b[i].view()));
  }
  st.log(aux_rec);
  ojson ch_rec{{"step", "challenge"},
               {"alpha", to_hex(ch.alpha_j.view())},
               {"key", to_hex(ch.key)},
               {"b", to_hex(ch.b_j.view())}};
  for (std::size_t i = 0; i < ch.hstar_after.size(); ++i) {
    ch_rec["layers"].push_back(to_hex(ch.hstar_after[i]) + to_hex(ch.b_after[i].view()));
  }
  st.log(ch_rec);

  if (config.white_box) adversary.on_white_box(x_prime);
  adversary.on_challenge(aux, ch, oracles);
  const bool guess = adversary.guess(oracles);
  st.log({{"step", "guess"}, {"guess", guess ? 1 : 0}});

  result.bit = bit;
  result.adversary_won = (guess ? 1 : 0) == bit;
  result.bad = st.bad;
  result.transcript = std::move(st.transcript);
  return result;
}

namespace {

class GuessingKemAdversary final : public KemAdversary {
 public:
  explicit GuessingKemAdversary(Rng rng) : rng_(std::move(rng)) {}

  KemSubmission submit(std::size_t n, KemOracles& o) override {
    KemSubmission sub;
    sub.j = rng_.uniform(n);
    for (std::size_t i = 0; i + 1 < n; ++i) sub.keys.push_back(kem_keygen(o.group(), rng_).pk);
    return sub;
  }

  bool guess(KemOracles&) override { return rng_.coin(); }

 private:
  Rng rng_;
};

class WhiteBoxKemAdversary final : public KemAdversary {
 public:
  explicit WhiteBoxKemAdversary(Rng rng) : rng_(std::move(rng)) {}

  void on_public_key(const GroupElement& pk, KemOracles&) override { pk_ = pk; }

  KemSubmission submit(std::size_t n, KemOracles& o) override {
    KemSubmission sub;
    sub.j = rng_.uniform(n);
    for (std::size_t i = 0; i + 1 < n; ++i) sub.keys.push_back(kem_keygen(o.group(), rng_).pk);
    return sub;
  }

  void on_white_box(const Scalar& x_prime) override { x_ = x_prime; }

  void on_challenge(const KemAux& aux, const KemChallenge& ch, KemOracles& o) override {
    if (!x_) return;
    Scalar e = *x_;
    for (const auto& b : aux.b) e = o.group().mul(e, b);
    GroupElement s_j = o.group().exp(pk_, e);
    real_ = o.h_star(s_j) == ch.key;
  }

  bool guess(KemOracles&) override {
    if (!x_) return rng_.coin();
    return !real_;
  }

 private:
  Rng rng_;
  GroupElement pk_;
  std::optional<Scalar> x_;
  bool real_ = false;
};

}  // namespace

std::unique_ptr<KemAdversary> make_kem_guessing_adversary(Rng rng) {
  return std::make_unique<GuessingKemAdversary>(std::move(rng));
}

std::unique_ptr<KemAdversary> make_kem_white_box_adversary(Rng rng) {
  return std::make_unique<WhiteBoxKemAdversary>(std::move(rng));
}

}  // namespace rsor
