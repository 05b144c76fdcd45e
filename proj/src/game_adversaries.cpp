#include <map>

#include "rsor/batch.hpp"
#include "rsor/games.hpp"
#include "rsor/sim.hpp"

namespace rsor {

namespace {

struct Step {
  std::string at;
  bool honest = false;
  Onion in;
  std::optional<Peeled> peeled;
  enum class Result { forward, exit, reply, failed, nothing } result = Result::nothing;
};

struct Shape {
  std::size_t n = 1;
  std::size_t j = 0;
  std::size_t nr = 1;
  std::size_t jb = 0;
};

class AdversaryBase : public GameAdversary {
 public:
  AdversaryBase(GameKind kind, Rng rng) : kind_(kind), rng_(std::move(rng)) {}

  void setup(const GameSetup& s, GameOracles&) override {
    setup_ = s;
    for (int k = 1; k <= 12; ++k) {
      const std::string name = "A" + std::to_string(k);
      own_[name] = kem_keygen(*s.params.group, rng_);
    }
  }

  ChallengeSubmission submit() override {
    shape_ = pick_shape();
    sub_ = build(shape_);
    return sub_;
  }

  void on_challenge(const ChallengeOnion& ch, GameOracles& oracles) override {
    steps_ = follow(ch, oracles);
  }

 protected:
  virtual Shape pick_shape() { return random_shape(); }

  Shape random_shape() {
    Shape s;
    const std::size_t h = setup_.params.max_hops;
    switch (kind_) {
      case GameKind::tlu:
        s.n = 1 + rng_.uniform(h);
        s.j = 1 + rng_.uniform(s.n);
        s.nr = 1 + rng_.uniform(h);
        break;
      case GameKind::slu:
        s.n = 1 + rng_.uniform(h);
        s.nr = 1 + rng_.uniform(h);
        s.jb = rng_.uniform(s.nr);
        break;
      case GameKind::sti:
        s.n = 1 + rng_.uniform(h);
        s.j = rng_.uniform(s.n);
        s.nr = 2 + rng_.uniform(h - 1);
        s.jb = 1 + rng_.uniform(s.nr - 1);
        break;
    }
    return s;
  }

  Hop honest(const std::string& name) const {
    if (name == setup_.p_h) return Hop{name, setup_.pk_h};
    if (name == setup_.p_s) return Hop{name, setup_.pk_s};
    return Hop{name, setup_.pk_h_back};
  }

  ChallengeSubmission build(const Shape& s) {
    std::vector<std::string> pool;
    for (const auto& [name, kp] : own_) pool.push_back(name);
    auto draw = [&](std::vector<std::string>& avail) {
      const std::size_t at = rng_.uniform(avail.size());
      std::string name = avail[at];
      avail.erase(avail.begin() + static_cast<std::ptrdiff_t>(at));
      return Hop{name, own_.at(name).pk};
    };
    ChallengeSubmission sub;
    sub.message = rng_.bytes(1 + rng_.uniform(64));
    sub.receiver = "rcv" + std::to_string(rng_.uniform(100));
    sub.j = s.j;
    sub.j_back = s.jb;
    std::vector<std::string> avail = pool;
    for (std::size_t k = 0; k < s.n; ++k) sub.path.push_back(draw(avail));
    avail = pool;
    for (std::size_t k = 0; k + 1 < s.nr; ++k) sub.reply_path.push_back(draw(avail));
    sub.reply_path.push_back(honest(setup_.p_s));
    switch (kind_) {
      case GameKind::tlu: sub.path[s.j - 1] = honest(setup_.p_h); break;
      case GameKind::slu:
        if (s.jb == 0) {
          sub.path.back() = honest(setup_.p_h);
        } else {
          sub.reply_path[s.jb - 1] = honest(setup_.p_h);
        }
        break;
      case GameKind::sti:
        if (s.j >= 1) sub.path[s.j - 1] = honest(setup_.p_h);
        sub.reply_path[s.jb - 1] = honest(setup_.p_h_back);
        break;
    }
    return sub;
  }

  /// Delivers the challenge along its route, processing at corrupted hops
  /// and querying the oracles at honest ones. Replies at every exit.
  std::vector<Step> follow(const ChallengeOnion& ch, GameOracles& oracles) {
    const FormatParams& p = setup_.params;
    ProcContext ctx;
    ctx.replay_check = [](ByteView) { return false; };
    std::vector<Step> steps;
    Onion o = ch.onion;
    std::string at = ch.to;
    bool tagged = false;
    for (int guard = 0; guard < 32; ++guard) {
      Step st;
      st.at = at;
      if (auto it = own_.find(at); it != own_.end()) {
        st.in = o;
        st.peeled = peel_header(p, it->second.sk, o.header);
        ProcResult r = proc_onion(p, it->second.sk, o, at, ctx);
        if (auto* f = std::get_if<Forwarded>(&r)) {
          st.result = Step::Result::forward;
          steps.push_back(std::move(st));
          o = std::move(f->onion);
          at = std::move(f->next_hop);
          continue;
        }
        if (auto* e = std::get_if<Exited>(&r)) {
          st.result = Step::Result::exit;
          steps.push_back(std::move(st));
          if (!e->reply) break;
          auto sealed = seal_reply(p, *e->reply, reply_message());
          o = std::move(sealed.first);
          at = std::move(sealed.second);
          continue;
        }
        st.result = std::holds_alternative<ReplyReceived>(r) ? Step::Result::reply : Step::Result::failed;
        steps.push_back(std::move(st));
        break;
      }
      st.honest = true;
      if (tag_honest_ && !tagged && at == setup_.p_h) {
        Bytes mask(p.payload_len, 0);
        mask[p.payload_len / 2] = 0x01;
        o = tag_payload(o, mask);
        tagged = true;
      }
      st.in = o;
      auto out = oracles.proc(at, o);
      if (!out) {
        steps.push_back(std::move(st));
        break;
      }
      if (out->kind == OracleOutput::Kind::forward) {
        st.result = Step::Result::forward;
        steps.push_back(std::move(st));
        o = std::move(out->onion);
        at = std::move(out->next);
        continue;
      }
      if (out->kind == OracleOutput::Kind::reply) {
        st.result = Step::Result::reply;
        steps.push_back(std::move(st));
        break;
      }
      st.result = Step::Result::exit;
      steps.push_back(st);
      auto rep = oracles.reply(at, st.in, reply_message());
      if (!rep) break;
      o = std::move(rep->first);
      at = std::move(rep->second);
    }
    return steps;
  }

  Bytes reply_message() { return Bytes(32, 0x5a); }

  /// Names visited when the challenge layer is the real onion.
  std::vector<std::string> expected_route() const {
    std::vector<std::string> route;
    std::size_t from = kind_ == GameKind::sti ? shape_.j : 0;
    for (std::size_t k = from; k < sub_.path.size(); ++k) route.push_back(sub_.path[k].name);
    for (const auto& h : sub_.reply_path) route.push_back(h.name);
    return route;
  }

  bool coin() { return rng_.coin(); }

  GameKind kind_;
  Rng rng_;
  GameSetup setup_;
  std::map<std::string, KemKeyPair> own_;
  Shape shape_;
  ChallengeSubmission sub_;
  std::vector<Step> steps_;
  bool tag_honest_ = false;
};

class Guessing final : public AdversaryBase {
 public:
  using AdversaryBase::AdversaryBase;
  bool guess() override { return coin(); }
};

/// Compares widths, routes and processing outcomes with what the real onion
/// would produce.
class Structural final : public AdversaryBase {
 public:
  using AdversaryBase::AdversaryBase;
  void on_challenge(const ChallengeOnion& ch, GameOracles& oracles) override {
    OnionSpec own;
    own.seed = rng_.seed32();
    own.message = sub_.message;
    own.receiver = sub_.receiver;
    own.forward = sub_.path;
    own.reply = sub_.reply_path;
    const std::size_t layer = kind_ == GameKind::sti ? shape_.j + 1 : 1;
    same_header_ = form_onion(layer, own, setup_.params).header == ch.onion.header;
    AdversaryBase::on_challenge(ch, oracles);
  }

  bool guess() override {
    if (same_header_) return false;
    const std::size_t width = setup_.params.onion_len();
    const auto route = expected_route();
    bool deviates = false;
    for (std::size_t k = 0; k < steps_.size(); ++k) {
      if (serialize_onion(steps_[k].in).size() != width) deviates = true;
      if (k >= route.size() || steps_[k].at != route[k]) deviates = true;
      if (!steps_[k].honest && steps_[k].result == Step::Result::failed) deviates = true;
    }
    return deviates ? true : coin();
  }

 private:
  bool same_header_ = false;
};

/// Tags the payload before the honest relay and checks whether the
/// corruption survives to the exit.
class TagConsistency final : public AdversaryBase {
 public:
  TagConsistency(GameKind kind, Rng rng) : AdversaryBase(kind, std::move(rng)) { tag_honest_ = true; }

 protected:
  Shape pick_shape() override {
    Shape s = random_shape();
    s.n = 2 + rng_.uniform(setup_.params.max_hops - 1);
    s.j = 1 + rng_.uniform(s.n - 1);
    return s;
  }

 public:
  bool guess() override {
    for (const auto& st : steps_) {
      if (!st.honest && st.result == Step::Result::exit) return true;
    }
    return coin();
  }
};

/// Reads the zero run of the routing block at the corrupted exit.
class PathLength final : public AdversaryBase {
 public:
  using AdversaryBase::AdversaryBase;

 protected:
  Shape pick_shape() override {
    Shape s = random_shape();
    s.n = 2 + rng_.uniform(setup_.params.max_hops - 1);
    s.j = 1 + rng_.uniform(s.n - 1);
    return s;
  }

 public:
  bool guess() override {
    const FormatParams& p = setup_.params;
    for (const auto& st : steps_) {
      if (st.honest || st.result != Step::Result::exit || !st.peeled) continue;
      const std::size_t seen = guess_path_length(p, exit_zero_run(p, *st.peeled));
      if (kind_ == GameKind::sti) {
        if (seen == shape_.n - shape_.j) return true;
        if (seen == shape_.n) return false;
      } else if (seen != shape_.n) {
        return true;
      }
      break;
    }
    return coin();
  }
};

/// Checks the address kinds seen after the honest relay: a returning reply
/// routes through relay entries until the reply receiver.
class DirectionStructure final : public AdversaryBase {
 public:
  using AdversaryBase::AdversaryBase;
  bool guess() override {
    bool after_honest = false;
    for (const auto& st : steps_) {
      if (st.honest && st.at == setup_.p_h) {
        after_honest = true;
        continue;
      }
      if (!after_honest || st.honest || !st.peeled) continue;
      if (st.peeled->kind != AddrKind::relay) return true;
    }
    return coin();
  }
};

}  // namespace

std::vector<std::string> game_adversary_names(GameKind kind) {
  std::vector<std::string> names{"guessing", "structural"};
  if (kind == GameKind::tlu) names.push_back("tag-consistency");
  if (kind == GameKind::tlu || kind == GameKind::sti) names.push_back("path-length");
  if (kind == GameKind::slu) names.push_back("direction-structure");
  return names;
}

std::unique_ptr<GameAdversary> make_game_adversary(std::string_view name, GameKind kind, Rng rng) {
  const auto names = game_adversary_names(kind);
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw ArgumentError("unknown adversary " + std::string(name) + " for " + std::string(to_string(kind)));
  }
  if (name == "guessing") return std::make_unique<Guessing>(kind, std::move(rng));
  if (name == "structural") return std::make_unique<Structural>(kind, std::move(rng));
  if (name == "tag-consistency") return std::make_unique<TagConsistency>(kind, std::move(rng));
  if (name == "path-length") return std::make_unique<PathLength>(kind, std::move(rng));
  return std::make_unique<DirectionStructure>(kind, std::move(rng));
}

WinExpectation registered_expectation(GameKind kind, std::string_view adversary, bool legacy_padding) {
  if (legacy_padding && adversary == "path-length" && kind != GameKind::slu) {
    return WinExpectation{WinExpectation::Type::at_least, 0.95};
  }
  return WinExpectation{};
}

GameBatch run_game_batch(GameKind kind, std::string_view adversary, std::size_t games,
                         std::uint64_t seed, const GameConfig& cfg, bool parallel) {
  const std::string adv_name(adversary);
  make_game_adversary(adv_name, kind, Rng(seed));
  const auto results = run_trials(
      games, seed,
      [&](std::uint64_t s) {
        Rng rng(s);
        auto adv = make_game_adversary(adv_name, kind, rng.fork("adversary"));
        Rng challenger = rng.fork("challenger");
        return run_game(kind, *adv, cfg, challenger);
      },
      parallel ? BatchMode::parallel : BatchMode::serial);
  GameBatch out;
  out.expectation = registered_expectation(kind, adversary, cfg.params.filler == Filler::legacy_zero);
  for (const auto& r : results) {
    if (r.rejected) {
      ++out.rejected;
      continue;
    }
    ++out.games;
    if (r.won) ++out.wins;
  }
  out.stats = binomial_summary(out.wins, out.games);
  if (out.expectation.type == WinExpectation::Type::chance) {
    out.passed = out.games > 0 && consistent_with_rate(out.wins, out.games, 0.5);
  } else {
    out.passed = out.games > 0 && out.stats.rate >= out.expectation.threshold;
  }
  return out;
}

}  // namespace rsor
