#include "rsor/games.hpp"

#include <functional>
#include <map>
#include <set>

namespace rsor {

namespace {

ProcContext plain_context(std::function<std::optional<ReplyExpectation>(ByteView)> find = {}) {
  ProcContext ctx;
  ctx.replay_check = [](ByteView) { return false; };
  ctx.find_reply = std::move(find);
  return ctx;
}

}  // namespace

CorrectnessReport game_correctness(const CorrectnessConfig& cfg) {
  const FormatParams& p = cfg.params;
  CorrectnessReport rep;
  std::set<std::size_t> widths;
  Rng key_rng = Rng(cfg.seed).fork("correctness/keys");
  std::map<std::string, KemKeyPair> keys;
  std::vector<std::string> pool;
  for (int k = 1; k <= 12; ++k) {
    pool.push_back("C" + std::to_string(k));
    keys[pool.back()] = kem_keygen(*p.group, key_rng);
  }
  keys["S"] = kem_keygen(*p.group, key_rng);
  const KemKeyPair stranger = kem_keygen(*p.group, key_rng);

  for (std::size_t n = cfg.min_hops; n <= cfg.max_hops; ++n) {
    for (std::size_t nr = cfg.min_reply_hops; nr <= cfg.max_reply_hops; ++nr) {
      for (std::size_t t = 0; t < cfg.per_cell; ++t) {
        Rng rng = Rng(cfg.seed).fork("correctness/" + std::to_string(n) + "/" + std::to_string(nr) +
                                     "/" + std::to_string(t));
        std::vector<std::string> avail = pool;
        auto draw = [&]() {
          const std::size_t at = rng.uniform(avail.size());
          std::string name = avail[at];
          avail.erase(avail.begin() + static_cast<std::ptrdiff_t>(at));
          return name;
        };
        OnionSpec spec;
        spec.seed = rng.seed32();
        spec.message = rng.bytes(1 + rng.uniform(p.max_message_len()));
        spec.receiver = "rcv" + std::to_string(rng.uniform(1000));
        for (std::size_t k = 0; k < n; ++k) {
          std::string name = draw();
          spec.forward.push_back(Hop{name, keys.at(name).pk});
        }
        avail = pool;
        if (nr > 0) {
          for (std::size_t k = 0; k + 1 < nr; ++k) {
            std::string name = draw();
            spec.reply.push_back(Hop{name, keys.at(name).pk});
          }
          spec.reply.push_back(Hop{"S", keys.at("S").pk});
        }
        const Bytes m_reply = rng.bytes(1 + rng.uniform(p.max_message_len()));
        OnionSpec built = spec;
        if (cfg.wrong_key_at_hop2 && n >= 2) built.forward[1].pk = stranger.pk;
        ++rep.specs;

        const OnionLayers layers = form_all_layers(built, p);
        for (const auto& l : layers.layers) widths.insert(serialize_onion(l).size());
        const ProcContext ctx = plain_context();

        Onion o = layers.layers.front();
        bool forward_ok = true;
        for (std::size_t i = 0; i + 1 < n; ++i) {
          const auto& at = spec.forward[i].name;
          ProcResult r = proc_onion(p, keys.at(at).sk, o, at, ctx);
          auto* f = std::get_if<Forwarded>(&r);
          if (!f || f->next_hop != spec.forward[i + 1].name) {
            forward_ok = false;
            break;
          }
          ++rep.layers_checked;
          if (f->onion != layers.layers[i + 1]) ++rep.dual_mismatches;
          o = std::move(f->onion);
        }
        if (!forward_ok) {
          ++rep.forward_path_failures;
          continue;
        }
        const auto& exit = spec.forward.back().name;
        ProcResult r = proc_onion(p, keys.at(exit).sk, o, exit, ctx);
        auto* ex = std::get_if<Exited>(&r);
        if (!ex || ex->message != spec.message || ex->receiver != spec.receiver) {
          ++rep.request_failures;
          continue;
        }
        if (nr == 0) continue;

        OnionSpec with_reply = built;
        with_reply.message = m_reply;
        const OnionLayers reply_layers = form_all_layers(with_reply, p);
        auto back = form_reply(p, m_reply, o, exit, keys.at(exit).sk);
        if (!back || back->second != spec.reply.front().name) {
          ++rep.backward_path_failures;
          continue;
        }
        auto expectation = reply_expectation(spec, p);
        const ProcContext sender_ctx = plain_context([&](ByteView ident) -> std::optional<ReplyExpectation> {
          if (expectation && to_bytes(ident) == expectation->ident) return expectation;
          return std::nullopt;
        });
        Onion ob = back->first;
        bool backward_ok = true;
        for (std::size_t k = 0; k < nr; ++k) {
          widths.insert(serialize_onion(ob).size());
          ++rep.layers_checked;
          if (ob != reply_layers.layers[n + k]) ++rep.dual_mismatches;
          const auto& at = spec.reply[k].name;
          ProcResult rr = proc_onion(p, keys.at(at).sk, ob, at, k + 1 == nr ? sender_ctx : ctx);
          if (k + 1 < nr) {
            auto* f = std::get_if<Forwarded>(&rr);
            if (!f || f->next_hop != spec.reply[k + 1].name) {
              backward_ok = false;
              break;
            }
            ob = std::move(f->onion);
          } else {
            auto* got = std::get_if<ReplyReceived>(&rr);
            if (!got || got->message != m_reply) ++rep.reply_failures;
          }
        }
        if (!backward_ok) ++rep.backward_path_failures;
      }
    }
  }
  rep.widths.assign(widths.begin(), widths.end());
  return rep;
}

std::string_view to_string(GameKind k) {
  switch (k) {
    case GameKind::tlu: return "tlu";
    case GameKind::slu: return "slu";
    case GameKind::sti: return "sti";
  }
  return "?";
}

std::optional<GameKind> game_kind_from(std::string_view name) {
  if (name == "tlu") return GameKind::tlu;
  if (name == "slu") return GameKind::slu;
  if (name == "sti") return GameKind::sti;
  return std::nullopt;
}

namespace {

class Rejected : public std::exception {};

/// Holds the honest parties and answers oracle requests. Game-specific
/// exceptions are installed as hooks; a hook returning an engaged value has
/// handled the request.
class Challenger final : public GameOracles {
 public:
  using ProcHook = std::function<std::optional<std::optional<OracleOutput>>(const std::string&, const Onion&)>;
  using ReplyHook = std::function<std::optional<std::optional<std::pair<Onion, std::string>>>(
      const std::string&, const Onion&, ByteView)>;

  struct Party {
    KemKeyPair kp;
    std::set<Bytes> eta;
    std::set<Bytes> o_list;
    std::set<Bytes> replied;
  };

  Challenger(const FormatParams& p, Rng& rng, GameResult& result)
      : p_(p), rng_(rng), result_(result) {}

  const FormatParams& params() const { return p_; }
  Rng& rng() { return rng_; }

  const GroupElement& add_party(const std::string& name) {
    auto& pt = parties_[name];
    pt.kp = kem_keygen(*p_.group, rng_);
    return pt.kp.pk;
  }
  Party& party(const std::string& name) { return parties_.at(name); }
  void expect_reply(const ReplyExpectation& e) { expectations_.push_back(e); }

  ProcHook proc_hook;
  ReplyHook reply_hook;
  bool bit = false;

  void record(const std::string& party_name, const Onion& o) {
    auto& pt = parties_.at(party_name);
    pt.eta.insert(serialize_header(o.header));
    pt.o_list.insert(serialize_onion(o));
  }
  bool listed(const std::string& party_name, const Onion& o) {
    return parties_.at(party_name).eta.contains(serialize_header(o.header));
  }
  bool header_ok(const std::string& party_name, const Onion& o) {
    return peel_header(p_, parties_.at(party_name).kp.sk, o.header).has_value();
  }
  bool may_reply(const std::string& party_name, const Onion& o) {
    const auto& pt = parties_.at(party_name);
    return pt.o_list.contains(serialize_onion(o)) && !pt.replied.contains(serialize_header(o.header));
  }
  void mark_replied(const std::string& party_name, const Onion& o) {
    parties_.at(party_name).replied.insert(serialize_header(o.header));
  }

  std::optional<OracleOutput> proc(const std::string& name, const Onion& o) override {
    std::optional<OracleOutput> out;
    if (parties_.contains(name)) {
      if (auto handled = proc_hook ? proc_hook(name, o) : std::nullopt) {
        out = *handled;
      } else {
        out = normal_proc(name, o);
      }
    }
    result_.transcript.emplace_back("proc", size_of(out));
    return out;
  }

  std::optional<std::pair<Onion, std::string>> reply(const std::string& name, const Onion& o,
                                                     ByteView m) override {
    std::optional<std::pair<Onion, std::string>> out;
    if (parties_.contains(name)) {
      if (auto handled = reply_hook ? reply_hook(name, o, m) : std::nullopt) {
        out = *handled;
      } else {
        out = normal_reply(name, o, m);
      }
    }
    result_.transcript.emplace_back("reply", out ? serialize_onion(out->first).size() : 0);
    return out;
  }

  std::optional<OracleOutput> normal_proc(const std::string& name, const Onion& o) {
    if (listed(name, o)) return std::nullopt;
    const ProcContext ctx = plain_context([this](ByteView ident) -> std::optional<ReplyExpectation> {
      for (const auto& e : expectations_) {
        if (e.ident == to_bytes(ident)) return e;
      }
      return std::nullopt;
    });
    ProcResult r = proc_onion(p_, parties_.at(name).kp.sk, o, name, ctx);
    record(name, o);
    return to_output(std::move(r));
  }

  std::optional<std::pair<Onion, std::string>> normal_reply(const std::string& name, const Onion& o,
                                                            ByteView m) {
    if (!may_reply(name, o)) return std::nullopt;
    if (m.size() > p_.max_message_len()) return std::nullopt;
    auto r = form_reply(p_, m, o, name, parties_.at(name).kp.sk);
    if (r) mark_replied(name, o);
    return r;
  }

  static std::optional<OracleOutput> to_output(ProcResult r) {
    OracleOutput out;
    if (auto* f = std::get_if<Forwarded>(&r)) {
      out.kind = OracleOutput::Kind::forward;
      out.onion = std::move(f->onion);
      out.next = std::move(f->next_hop);
    } else if (auto* e = std::get_if<Exited>(&r)) {
      out.kind = OracleOutput::Kind::exit;
      out.message = std::move(e->message);
      out.receiver = std::move(e->receiver);
    } else if (auto* g = std::get_if<ReplyReceived>(&r)) {
      out.kind = OracleOutput::Kind::reply;
      out.message = std::move(g->message);
    } else {
      return std::nullopt;
    }
    return out;
  }

  std::size_t size_of(const std::optional<OracleOutput>& o) const {
    if (!o) return 0;
    if (o->kind == OracleOutput::Kind::forward) return serialize_onion(o->onion).size();
    return o->message.size() + o->receiver.size();
  }

 private:
  const FormatParams& p_;
  Rng& rng_;
  GameResult& result_;
  std::map<std::string, Party> parties_;
  std::vector<ReplyExpectation> expectations_;
};

const std::string kPH = "PH";
const std::string kPS = "PS";
const std::string kPHb = "PHb";

/// Fixes the honest keys into a submitted path and checks step-4 conditions.
OnionSpec accept_submission(const ChallengeSubmission& sub, const FormatParams& p,
                            std::vector<Hop> path, std::vector<Hop> reply, Rng& rng) {
  std::map<std::string, GroupElement> seen;
  for (const auto* hops : {&path, &reply}) {
    for (const auto& h : *hops) {
      auto [it, fresh] = seen.emplace(h.name, h.pk);
      if (!fresh && !(it->second == h.pk)) throw Rejected();
    }
  }
  if (sub.message.size() > p.max_message_len() || sub.receiver.empty()) throw Rejected();
  OnionSpec spec;
  spec.seed = rng.seed32();
  spec.message = sub.message;
  spec.receiver = sub.receiver;
  spec.forward = std::move(path);
  spec.reply = std::move(reply);
  try {
    validate_spec(spec, p);
  } catch (const std::exception&) {
    throw Rejected();
  }
  return spec;
}

OnionSpec replacement(const FormatParams& p, Rng& rng, Bytes m, std::string receiver,
                      std::vector<Hop> path, std::vector<Hop> reply) {
  OnionSpec s;
  s.seed = rng.seed32();
  s.message = std::move(m);
  s.receiver = std::move(receiver);
  s.forward = std::move(path);
  s.reply = std::move(reply);
  validate_spec(s, p);
  return s;
}

Bytes random_message(const FormatParams& p, Rng& rng) { return rng.bytes(p.max_message_len()); }
std::string random_receiver(Rng& rng) { return "rcv-" + to_hex(rng.bytes(4)); }

bool same_name_key(const std::vector<Hop>& hops, std::size_t at, const std::string& name) {
  return at < hops.size() && hops[at].name == name;
}

template <class Body>
GameResult play(GameAdversary& adv, const GameConfig& cfg, Rng& rng, GameKind kind, Body body) {
  GameResult result;
  Challenger ch(cfg.params, rng, result);
  GameSetup setup;
  setup.kind = kind;
  setup.params = cfg.params;
  setup.p_h = kPH;
  setup.p_s = kPS;
  setup.pk_h = ch.add_party(kPH);
  setup.pk_s = ch.add_party(kPS);
  if (kind == GameKind::sti) {
    setup.p_h_back = kPHb;
    setup.pk_h_back = ch.add_party(kPHb);
  }
  adv.setup(setup, ch);
  ChallengeSubmission sub = adv.submit();
  std::optional<ChallengeOnion> challenge;
  try {
    challenge = body(ch, sub);
  } catch (const Rejected&) {
    result.rejected = true;
    return result;
  }
  result.bit = ch.bit;
  result.transcript.emplace_back("challenge", serialize_onion(challenge->onion).size());
  adv.on_challenge(*challenge, ch);
  result.guess = adv.guess();
  result.won = result.guess == result.bit;
  return result;
}

}  // namespace

GameResult game_tlu_forward(GameAdversary& adv, const GameConfig& cfg, Rng& rng) {
  GameResult r = play(adv, cfg, rng, GameKind::tlu, [&](Challenger& ch, const ChallengeSubmission& sub) {
    const FormatParams& p = ch.params();
    const std::size_t n = sub.path.size();
    const std::size_t j = sub.j;
    if (j < 1 || j > n || !same_name_key(sub.path, j - 1, kPH)) throw Rejected();
    if (sub.reply_path.empty() || sub.reply_path.back().name != kPS) throw Rejected();
    std::vector<Hop> path = sub.path;
    std::vector<Hop> reply = sub.reply_path;
    path[j - 1].pk = ch.party(kPH).kp.pk;
    reply.back().pk = ch.party(kPS).kp.pk;
    const OnionSpec spec = accept_submission(sub, p, path, reply, ch.rng());
    const bool b = cfg.forced_bit.value_or(ch.rng().coin());
    ch.bit = b;
    const OnionSpec bar = replacement(p, ch.rng(), random_message(p, ch.rng()), random_receiver(ch.rng()),
                                      std::vector<Hop>(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(j)), {});
    if (auto e = reply_expectation(spec, p)) ch.expect_reply(*e);
    if (b) {
      const Onion bar_j = form_onion(j, bar, p);
      ch.proc_hook = [&ch, spec, bar, bar_j, j, n](const std::string& who, const Onion& o)
          -> std::optional<std::optional<OracleOutput>> {
        const FormatParams& p = ch.params();
        if (who != kPH || !recognize_onion(j, o, bar, p) || ch.listed(kPH, o)) return std::nullopt;
        if (j < n) {
          if (!ch.header_ok(kPH, o)) return std::nullopt;
          ch.record(kPH, o);
          OracleOutput out;
          out.kind = OracleOutput::Kind::forward;
          out.onion = form_onion(j + 1, spec, p);
          out.next = spec.forward[j].name;
          if (o.delta != bar_j.delta) out.onion.delta = ch.rng().bytes(p.payload_len);
          return std::optional<OracleOutput>(std::move(out));
        }
        const ProcResult pr = proc_onion(p, ch.party(kPH).kp.sk, o, kPH, plain_context());
        if (std::holds_alternative<Failed>(pr)) return std::nullopt;
        ch.record(kPH, o);
        OracleOutput out;
        out.kind = OracleOutput::Kind::exit;
        out.message = spec.message;
        out.receiver = spec.receiver;
        return std::optional<OracleOutput>(std::move(out));
      };
      if (j == n) {
        ch.reply_hook = [&ch, spec, bar, j](const std::string& who, const Onion& o, ByteView m)
            -> std::optional<std::optional<std::pair<Onion, std::string>>> {
          const FormatParams& p = ch.params();
          if (who != kPH || !recognize_onion(j, o, bar, p) || !ch.may_reply(kPH, o)) return std::nullopt;
          if (m.size() > p.max_message_len()) return std::nullopt;
          ch.mark_replied(kPH, o);
          OnionSpec with_reply = spec;
          with_reply.message = to_bytes(m);
          return std::optional<std::pair<Onion, std::string>>(
              std::pair{form_onion(j + 1, with_reply, p), spec.reply.front().name});
        };
      }
    }
    const Onion first = b ? form_onion(1, bar, p) : form_onion(1, spec, p);
    return ChallengeOnion{first, path.front().name};
  });
  return r;
}

GameResult game_slu_backward(GameAdversary& adv, const GameConfig& cfg, Rng& rng) {
  return play(adv, cfg, rng, GameKind::slu, [&](Challenger& ch, const ChallengeSubmission& sub) {
    const FormatParams& p = ch.params();
    const std::size_t n = sub.path.size();
    const std::size_t nr = sub.reply_path.size();
    const std::size_t jb = sub.j_back;
    if (n == 0 || nr == 0 || jb >= nr || sub.reply_path.back().name != kPS) throw Rejected();
    std::vector<Hop> path = sub.path;
    std::vector<Hop> reply = sub.reply_path;
    if (jb == 0) {
      if (!same_name_key(path, n - 1, kPH)) throw Rejected();
      path[n - 1].pk = ch.party(kPH).kp.pk;
    } else {
      if (!same_name_key(reply, jb - 1, kPH)) throw Rejected();
      reply[jb - 1].pk = ch.party(kPH).kp.pk;
    }
    reply.back().pk = ch.party(kPS).kp.pk;
    const OnionSpec spec = accept_submission(sub, p, path, reply, ch.rng());
    const bool b = cfg.forced_bit.value_or(ch.rng().coin());
    ch.bit = b;
    if (auto e = reply_expectation(spec, p)) ch.expect_reply(*e);
    const OnionSpec bar = replacement(
        p, ch.rng(), random_message(p, ch.rng()), random_receiver(ch.rng()),
        std::vector<Hop>(reply.begin() + static_cast<std::ptrdiff_t>(jb), reply.end()), {});
    const std::size_t bar_len = nr - jb;

    ch.proc_hook = [&ch, spec, bar, b, n, nr, jb, bar_len](const std::string& who, const Onion& o)
        -> std::optional<std::optional<OracleOutput>> {
      const FormatParams& p = ch.params();
      if (who == kPS) {
        const bool challenge_final =
            b ? recognize_onion(bar_len, o, bar, p) : recognize_onion(n + nr, o, spec, p);
        if (!challenge_final) return std::nullopt;
        if (!ch.listed(kPS, o)) ch.record(kPS, o);
        return std::optional<OracleOutput>();
      }
      if (who != kPH || jb == 0) return std::nullopt;
      if (!recognize_onion(n + jb, o, spec, p) || ch.listed(kPH, o) || !ch.header_ok(kPH, o)) {
        return std::nullopt;
      }
      if (!b) return std::optional<std::optional<OracleOutput>>(ch.normal_proc(kPH, o));
      ch.record(kPH, o);
      OracleOutput out;
      out.kind = OracleOutput::Kind::forward;
      out.onion = form_onion(1, bar, p);
      out.next = bar.forward.front().name;
      return std::optional<OracleOutput>(std::move(out));
    };
    if (jb == 0) {
      ch.reply_hook = [&ch, spec, bar, b, n](const std::string& who, const Onion& o, ByteView m)
          -> std::optional<std::optional<std::pair<Onion, std::string>>> {
        const FormatParams& p = ch.params();
        if (who != kPH || !recognize_onion(n, o, spec, p) || !ch.may_reply(kPH, o)) return std::nullopt;
        if (m.size() > p.max_message_len()) return std::nullopt;
        auto real = form_reply(p, m, o, kPH, ch.party(kPH).kp.sk);
        if (!real) return std::nullopt;
        ch.mark_replied(kPH, o);
        if (!b) return std::optional<std::pair<Onion, std::string>>(std::move(*real));
        return std::optional<std::pair<Onion, std::string>>(
            std::pair{form_onion(1, bar, p), bar.forward.front().name});
      };
    }
    return ChallengeOnion{form_onion(1, spec, p), path.front().name};
  });
}

GameResult game_sti_tail(GameAdversary& adv, const GameConfig& cfg, Rng& rng) {
  return play(adv, cfg, rng, GameKind::sti, [&](Challenger& ch, const ChallengeSubmission& sub) {
    const FormatParams& p = ch.params();
    const std::size_t n = sub.path.size();
    const std::size_t nr = sub.reply_path.size();
    const std::size_t j = sub.j;
    const std::size_t jb = sub.j_back;
    if (n == 0 || j >= n) throw Rejected();
    if (nr < 2 || jb < 1 || jb >= nr || sub.reply_path.back().name != kPS) throw Rejected();
    if (!same_name_key(sub.reply_path, jb - 1, kPHb)) throw Rejected();
    std::vector<Hop> path = sub.path;
    std::vector<Hop> reply = sub.reply_path;
    if (j >= 1) {
      const std::string& at = path[j - 1].name;
      if (at != kPH && at != kPHb) throw Rejected();
      path[j - 1].pk = ch.party(at).kp.pk;
    }
    reply[jb - 1].pk = ch.party(kPHb).kp.pk;
    reply.back().pk = ch.party(kPS).kp.pk;
    const OnionSpec spec = accept_submission(sub, p, path, reply, ch.rng());
    const bool b = cfg.forced_bit.value_or(ch.rng().coin());
    ch.bit = b;
    if (auto e = reply_expectation(spec, p)) ch.expect_reply(*e);
    const OnionSpec bar = replacement(
        p, ch.rng(), spec.message, spec.receiver,
        std::vector<Hop>(path.begin() + static_cast<std::ptrdiff_t>(j), path.end()),
        std::vector<Hop>(reply.begin(), reply.begin() + static_cast<std::ptrdiff_t>(jb)));

    ch.proc_hook = [&ch, spec, bar, b, n, j, jb](const std::string& who, const Onion& o)
        -> std::optional<std::optional<OracleOutput>> {
      const FormatParams& p = ch.params();
      if (who != kPHb) return std::nullopt;
      const bool challenge_layer =
          b ? recognize_onion((n - j) + jb, o, bar, p) : recognize_onion(n + jb, o, spec, p);
      if (!challenge_layer) return std::nullopt;
      if (!ch.listed(kPHb, o)) ch.record(kPHb, o);
      return std::optional<OracleOutput>();
    };
    const Onion first = b ? form_onion(1, bar, p) : form_onion(j + 1, spec, p);
    return ChallengeOnion{first, path[j].name};
  });
}

GameResult run_game(GameKind kind, GameAdversary& adv, const GameConfig& cfg, Rng& rng) {
  switch (kind) {
    case GameKind::tlu: return game_tlu_forward(adv, cfg, rng);
    case GameKind::slu: return game_slu_backward(adv, cfg, rng);
    case GameKind::sti: return game_sti_tail(adv, cfg, rng);
  }
  throw ArgumentError("unknown game");
}

}  // namespace rsor
