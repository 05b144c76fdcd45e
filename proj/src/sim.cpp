#include "rsor/sim.hpp"

#include <algorithm>
#include <deque>

#include "rsor/node.hpp"

namespace rsor {

namespace {

bool contains(const std::vector<std::string>& v, const std::string& n) {
  return std::find(v.begin(), v.end(), n) != v.end();
}

enum class PacketKind { onion, message, reply };

struct Packet {
  std::uint64_t seq = 0;
  std::uint64_t due = 0;
  std::string src;
  std::string dst;
  PacketKind kind = PacketKind::onion;
  Onion onion;
  Bytes message;
  std::optional<Bytes> rid;
  /// Set once adversary rules ran on this packet (delayed or injected).
  bool ruled = false;
};

ojson packet_record(const FormatParams& p, const Packet& pk, bool visible) {
  ojson j{{"src", pk.src}, {"dst", pk.dst}};
  if (!visible) {
    j["size"] = p.onion_len();
    return j;
  }
  switch (pk.kind) {
    case PacketKind::onion:
      j["type"] = "onion";
      j["bytes"] = to_hex(serialize_onion(pk.onion));
      break;
    case PacketKind::message:
      j["type"] = "message";
      j["message"] = to_hex(pk.message);
      j["rid"] = pk.rid ? ojson(to_hex(*pk.rid)) : ojson(nullptr);
      break;
    case PacketKind::reply:
      j["type"] = "reply";
      j["message"] = to_hex(pk.message);
      j["rid"] = to_hex(pk.rid.value_or(Bytes{}));
      break;
  }
  return j;
}

bool matches(const Selector& s, const Packet& pk, std::uint64_t round, std::size_t index) {
  return (!s.src || *s.src == pk.src) && (!s.dst || *s.dst == pk.dst) &&
         (!s.round || *s.round == round) && (!s.index || *s.index == index);
}

class Engine {
 public:
  Engine(const Scenario& s, std::uint64_t seed)
      : s_(s), p_(scenario_params(s)), rng_(Rng(seed).fork("schedule")) {
    auto keys = scenario_keys(s, p_, seed);
    for (const auto& r : s.topology.relays) relays_.emplace(r, make_relay(r, keys.at(r)));
    for (const auto& n : s.topology.senders) senders_.emplace(n, make_sender(n, keys.at(n)));
    for (const auto& n : s.topology.receivers) receivers_.emplace(n, ReceiverState{n, {}});
    flows_ = resolve_flows(s, seed);
    for (std::size_t i = 0; i < flows_.size(); ++i) {
      specs_.push_back(build_spec(flows_[i], keys, Rng(seed).fork("flow/" + std::to_string(i))));
    }
  }

  EventLog run() {
    for (std::uint64_t r = 0; r <= s_.max_rounds; ++r) {
      if (done(r)) break;
      log_.set_time(r);
      launch(r);
      std::vector<Packet> due = take_due(r);
      adversary(r, due);
      deliver(r, due);
      environment();
    }
    return std::move(log_);
  }

 private:
  Visibility vis_of(const std::string& actor) const {
    return s_.topology.is_corrupted(actor) ? Visibility::adversary : Visibility::environment;
  }

  OnionSpec build_spec(const Flow& f, const std::map<std::string, KemKeyPair>& keys, Rng rng) {
    OnionSpec spec;
    spec.seed = rng.seed32();
    spec.message = f.message;
    spec.receiver = f.receiver;
    for (const auto& h : f.path) spec.forward.push_back(Hop{h, keys.at(h).pk});
    for (const auto& h : f.reply_path) spec.reply.push_back(Hop{h, keys.at(h).pk});
    validate_spec(spec, p_);
    return spec;
  }

  bool done(std::uint64_t r) const {
    if (!in_flight_.empty() || !replies_.empty()) return false;
    for (const auto& f : flows_) {
      if (f.round >= r) return false;
    }
    return true;
  }

  void send(Packet pk) {
    pk.seq = next_seq_++;
    in_flight_.push_back(std::move(pk));
  }

  void launch(std::uint64_t r) {
    for (std::size_t i = 0; i < flows_.size(); ++i) {
      if (flows_[i].round != r) continue;
      const Flow& f = flows_[i];
      SendOnion out = sender_send(p_, senders_.at(f.sender), specs_[i]);
      log_.emit(f.sender, "forwarded", {{"to", out.to}}, vis_of(f.sender));
      if (f.reply_message) pending_reply_[{f.receiver, f.message}].push_back(*f.reply_message);
      send(Packet{0, r, f.sender, out.to, PacketKind::onion, std::move(out.onion), {}, {}});
    }
  }

  std::vector<Packet> take_due(std::uint64_t r) {
    std::vector<Packet> due;
    std::deque<Packet> later;
    for (auto& pk : in_flight_) {
      if (pk.due <= r) {
        due.push_back(std::move(pk));
      } else {
        later.push_back(std::move(pk));
      }
    }
    in_flight_ = std::move(later);
    std::sort(due.begin(), due.end(), [](const Packet& a, const Packet& b) { return a.seq < b.seq; });
    return due;
  }

  void adversary(std::uint64_t r, std::vector<Packet>& due) {
    std::map<std::pair<std::string, std::string>, std::size_t> link_count;
    std::vector<Packet> kept;
    std::vector<std::size_t> swap_slots;
    for (auto& pk : due) {
      if (pk.ruled) {
        kept.push_back(std::move(pk));
        continue;
      }
      const bool visible = s_.topology.adversary_link(pk.src, pk.dst);
      log_.emit("adversary", "link", packet_record(p_, pk, visible), Visibility::adversary);
      if (!visible) {
        kept.push_back(std::move(pk));
        continue;
      }
      const std::size_t index = link_count[{pk.src, pk.dst}]++;
      bool dropped = false;
      for (const auto& rule : s_.rules) {
        if (!matches(rule.sel, pk, r, index)) continue;
        switch (rule.kind) {
          case RuleKind::observe:
            break;
          case RuleKind::drop:
            dropped = true;
            break;
          case RuleKind::tag:
            if (pk.kind == PacketKind::onion) {
              Bytes mask(pk.onion.delta.size(), 0);
              std::copy_n(rule.mask.begin(), std::min(rule.mask.size(), mask.size()), mask.begin());
              pk.onion = tag_payload(pk.onion, mask);
            } else {
              for (std::size_t k = 0; k < rule.mask.size() && k < pk.message.size(); ++k) {
                pk.message[k] ^= rule.mask[k];
              }
            }
            break;
          case RuleKind::delay:
            pk.due = r + rule.rounds;
            break;
          case RuleKind::swap_rid:
            if (pk.kind != PacketKind::onion) swap_slots.push_back(kept.size());
            break;
          case RuleKind::impersonate_edge:
            pk.src = rule.as;
            break;
          case RuleKind::inject: {
            Packet copy = pk;
            if (!rule.as.empty()) copy.dst = rule.as;
            copy.due = r + rule.rounds;
            copy.ruled = true;
            send(std::move(copy));
            break;
          }
        }
        log_.emit("adversary", std::string(to_string(rule.kind)),
                  {{"src", pk.src}, {"dst", pk.dst}, {"index", index}}, Visibility::adversary);
        if (dropped) break;
      }
      if (dropped) continue;
      if (pk.due > r) {
        pk.ruled = true;
        send(std::move(pk));
        continue;
      }
      kept.push_back(std::move(pk));
    }
    for (std::size_t k = 0; k + 1 < swap_slots.size(); k += 2) {
      std::swap(kept[swap_slots[k]].rid, kept[swap_slots[k + 1]].rid);
    }
    due = std::move(kept);
  }

  void deliver(std::uint64_t, std::vector<Packet>& due) {
    std::shuffle(due.begin(), due.end(), rng_);
    for (auto& pk : due) deliver_one(pk);
  }

  void drop(const std::string& actor, FailReason reason) {
    log_.emit(actor, "dropped", {{"reason", std::string(to_string(reason))}},
              Visibility::diagnostic);
  }

  void deliver_one(Packet& pk) {
    const std::string& at = pk.dst;
    if (s_.topology.is_relay(at)) {
      RelayState& relay = relays_.at(at);
      if (pk.kind == PacketKind::onion) {
        RelayEvent ev = relay_on_onion(p_, relay, pk.onion, rng_);
        if (auto* b = std::get_if<Buffered>(&ev)) {
          log_.emit(at, "onion-received", {{"tid", to_hex(b->tid)}, {"from", pk.src}}, vis_of(at));
          buffered_[at].push_back(b->tid);
        } else {
          FailReason why = std::get<Dropped>(ev).reason;
          if (why == FailReason::integrity_check) log_.emit(at, "integrity-fail", ojson::object(), vis_of(at));
          drop(at, why);
        }
      } else if (pk.kind == PacketKind::reply && pk.rid) {
        log_.emit(at, "reply-received",
                  {{"from", pk.src}, {"message", to_hex(pk.message)}, {"rid", to_hex(*pk.rid)}},
                  vis_of(at));
        if (auto tid = relay_on_receiver_reply(p_, relay, pk.message, *pk.rid, rng_)) {
          log_.emit(at, "reply-onion-ready", {{"tid", to_hex(*tid)}}, vis_of(at));
          buffered_[at].push_back(*tid);
        }
      } else {
        drop(at, FailReason::malformed);
      }
      return;
    }
    if (s_.topology.is_sender(at)) {
      if (pk.kind != PacketKind::onion) {
        drop(at, FailReason::malformed);
        return;
      }
      SenderEvent ev = sender_on_onion(p_, senders_.at(at), pk.onion);
      if (auto* got = std::get_if<GotReply>(&ev)) {
        log_.emit(at, "got-reply", {{"message", to_hex(got->message)}}, vis_of(at));
      } else {
        drop(at, std::get<Dropped>(ev).reason);
        if (s_.sender_reaction == SenderReaction::visible) {
          log_.emit(at, "reply-rejected", ojson::object(), vis_of(at));
        }
      }
      return;
    }
    if (s_.topology.is_receiver(at)) {
      ReceiverState& rcv = receivers_.at(at);
      if (pk.kind != PacketKind::message) {
        drop(at, receiver_on_onion(rcv, pk.onion).reason);
        return;
      }
      log_.emit(at, "message-delivered", {{"from", pk.src}, {"message", to_hex(pk.message)}},
                vis_of(at));
      if (pk.rid) log_.emit(at, "message-repliable", {{"rid", to_hex(*pk.rid)}}, vis_of(at));
      receiver_on_message(rcv, pk.message, pk.rid, pk.src);
      auto want = pending_reply_.find({at, pk.message});
      if (pk.rid && want != pending_reply_.end() && !want->second.empty()) {
        replies_.push_back({at, rcv.inbox.size() - 1, want->second.front()});
        want->second.erase(want->second.begin());
      }
      return;
    }
    drop(at, FailReason::unknown_route);
  }

  void environment() {
    const std::uint64_t next = log_.time() + 1;
    for (auto& [name, tids] : buffered_) {
      std::shuffle(tids.begin(), tids.end(), rng_);
      for (const auto& tid : tids) {
        RelayAction a = relay_forward(p_, relays_.at(name), tid, rng_);
        if (auto* so = std::get_if<SendOnion>(&a)) {
          log_.emit(name, "forwarded", {{"to", so->to}}, vis_of(name));
          send(Packet{0, next, name, so->to, PacketKind::onion, std::move(so->onion), {}, {}});
        } else if (auto* sm = std::get_if<SendMessage>(&a)) {
          log_.emit(name, "message-sent", {{"to", sm->to}}, vis_of(name));
          send(Packet{0, next, name, sm->to, PacketKind::message, {}, std::move(sm->message),
                      std::move(sm->rid)});
        }
      }
    }
    buffered_.clear();
    for (const auto& pr : replies_) {
      auto out = receiver_reply(receivers_.at(pr.receiver), pr.index, pr.message);
      if (!out) continue;
      log_.emit(pr.receiver, "reply-sent", {{"to", out->to}, {"rid", to_hex(out->rid)}},
                Visibility::diagnostic);
      send(Packet{0, next, pr.receiver, out->to, PacketKind::reply, {}, std::move(out->message),
                  std::move(out->rid)});
    }
    replies_.clear();
  }

  struct PendingReply {
    std::string receiver;
    std::size_t index;
    Bytes message;
  };

  const Scenario& s_;
  FormatParams p_;
  Rng rng_;
  EventLog log_;
  std::map<std::string, RelayState> relays_;
  std::map<std::string, SenderState> senders_;
  std::map<std::string, ReceiverState> receivers_;
  std::vector<Flow> flows_;
  std::vector<OnionSpec> specs_;
  std::deque<Packet> in_flight_;
  std::uint64_t next_seq_ = 0;
  std::map<std::string, std::vector<Bytes>> buffered_;
  std::map<std::pair<std::string, Bytes>, std::vector<Bytes>> pending_reply_;
  std::vector<PendingReply> replies_;
};

}  // namespace

bool Topology::is_relay(const std::string& n) const { return contains(relays, n); }
bool Topology::is_sender(const std::string& n) const { return contains(senders, n); }
bool Topology::is_receiver(const std::string& n) const { return contains(receivers, n); }

bool Topology::adversary_link(const std::string& src, const std::string& dst) const {
  return is_corrupted(src) || is_corrupted(dst) || is_receiver(src) || is_receiver(dst) ||
         (!is_relay(src) && !is_sender(src)) || (!is_relay(dst) && !is_sender(dst));
}

std::string_view to_string(ExitPolicy p) {
  switch (p) {
    case ExitPolicy::explicit_path: return "explicit";
    case ExitPolicy::uniform: return "uniform";
    case ExitPolicy::receiver_hash: return "receiver-hash";
  }
  return "?";
}

std::string_view to_string(RuleKind k) {
  switch (k) {
    case RuleKind::observe: return "observe";
    case RuleKind::drop: return "drop";
    case RuleKind::tag: return "tag";
    case RuleKind::delay: return "delay";
    case RuleKind::swap_rid: return "swap-rid";
    case RuleKind::impersonate_edge: return "impersonate-edge";
    case RuleKind::inject: return "inject";
  }
  return "?";
}

FormatParams scenario_params(const Scenario& s) {
  FormatParams p = default_params();
  if (s.legacy_zero_padding) p.filler = Filler::legacy_zero;
  return p;
}

std::map<std::string, KemKeyPair> scenario_keys(const Scenario& s, const FormatParams& p,
                                                std::uint64_t seed) {
  std::map<std::string, KemKeyPair> keys;
  const Rng base = Rng(seed).fork("keys");
  for (const auto* names : {&s.topology.relays, &s.topology.senders}) {
    for (const auto& n : *names) {
      Rng r = base.fork(n);
      keys.emplace(n, kem_keygen(*p.group, r));
    }
  }
  return keys;
}

std::vector<Flow> resolve_flows(const Scenario& s, std::uint64_t seed) {
  std::vector<Flow> out = s.flows;
  const auto& relays = s.topology.relays;
  for (std::size_t i = 0; i < out.size(); ++i) {
    Flow& f = out[i];
    Rng rng = Rng(seed).fork("paths/" + std::to_string(i));
    auto draw = [&](std::vector<std::string>& pool, std::size_t k) {
      std::vector<std::string> picked;
      for (std::size_t j = 0; j < k; ++j) {
        if (pool.empty()) throw ConfigError("not enough relays for flow " + std::to_string(i));
        std::size_t at = rng.uniform(pool.size());
        picked.push_back(pool[at]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(at));
      }
      return picked;
    };
    if (f.path.empty()) {
      if (f.path_len == 0) throw ConfigError("flow " + std::to_string(i) + " has no path");
      std::vector<std::string> pool = relays;
      std::string exit;
      if (s.exit_policy == ExitPolicy::receiver_hash) {
        if (pool.empty()) throw ConfigError("no relays");
        Bytes h = Rng::derive(to_bytes(f.receiver), "exit-by-receiver").bytes(8);
        exit = pool[get_u32_be(h) % pool.size()];
        pool.erase(std::find(pool.begin(), pool.end(), exit));
      }
      f.path = draw(pool, exit.empty() ? f.path_len : f.path_len - 1);
      if (!exit.empty()) f.path.push_back(exit);
    }
    if (!f.session.empty()) f.message = concat({to_bytes("session=" + f.session + ";"), f.message});
    if (f.repliable && f.reply_path.empty()) {
      std::vector<std::string> pool = relays;
      f.reply_path = draw(pool, std::max<std::size_t>(f.path_len, 2) - 1);
      f.reply_path.push_back(f.sender);
    }
  }
  return out;
}

bool check_expectation(const EventLog& log, const Expectation& e) {
  std::size_t n = 0;
  for (const auto& ev : log.events()) {
    if (ev.kind == e.kind && (e.actor.empty() || ev.actor == e.actor)) ++n;
  }
  return e.count ? n == *e.count : n > 0;
}

RunResult run_scenario(const Scenario& s, std::uint64_t seed) {
  RunResult res;
  res.log = Engine(s, seed).run();
  for (const auto& e : s.expect) {
    if (!check_expectation(res.log, e)) {
      res.assertions_hold = false;
      res.failed.push_back(e.kind + "@" + e.actor +
                           (e.count ? " count=" + std::to_string(*e.count) : std::string()));
    }
  }
  return res;
}

std::vector<UsageViolation> check_usage_conditions(const Scenario& s) {
  std::vector<UsageViolation> out;
  if (s.exit_policy == ExitPolicy::receiver_hash) {
    out.push_back({1, "exit relay derived from the receiver"});
  }
  if (s.sender_reaction == SenderReaction::visible) {
    out.push_back({2, "sender reacts visibly to a rejected reply"});
  }
  std::map<std::string, std::size_t> sessions;
  for (const auto& f : s.flows) {
    if (!f.session.empty()) ++sessions[f.session];
  }
  for (const auto& [id, n] : sessions) {
    if (n > 1) out.push_back({3, "session '" + id + "' spans " + std::to_string(n) + " flows"});
  }
  return out;
}

}  // namespace rsor
