#include <algorithm>

#include "rsor/node.hpp"
#include "rsor/sim.hpp"

namespace rsor {

TaggingOutcome scenario_tagging_linkage(std::uint64_t seed, bool tagging) {
  Rng rng = Rng(seed).fork("tagging");
  Scenario s;
  s.name = tagging ? "tagging-linkage" : "tagging-baseline";
  s.topology.relays = {"A", "H", "E1", "E2"};
  s.topology.corrupted = {"A", "E1", "E2"};
  s.topology.senders = {"S1", "S2"};
  s.topology.receivers = {"R1", "R2"};
  const bool swap = rng.coin();
  const std::string exit1 = swap ? "E2" : "E1";
  const std::string exit2 = swap ? "E1" : "E2";
  for (int k = 1; k <= 2; ++k) {
    Flow f;
    f.sender = "S" + std::to_string(k);
    f.receiver = "R" + std::to_string(k);
    f.message = to_bytes("message from " + f.sender);
    f.path = {"A", "H", k == 1 ? exit1 : exit2};
    s.flows.push_back(f);
  }
  const int target = rng.coin() ? 1 : 2;
  TaggingOutcome out;
  out.tagging = tagging;
  out.target_sender = "S" + std::to_string(target);
  out.true_exit = target == 1 ? exit1 : exit2;
  if (tagging) {
    Rule r;
    r.kind = RuleKind::tag;
    r.sel.src = out.target_sender;
    r.sel.dst = "A";
    r.sel.round = 0;
    s.rules.push_back(r);
  }
  RunResult run = run_scenario(s, seed);
  for (const auto& e : run.log.filtered(Visibility::adversary)) {
    if (e.kind == "integrity-fail" && (e.actor == "E1" || e.actor == "E2")) out.named_exit = e.actor;
  }
  if (out.named_exit.empty()) out.named_exit = rng.coin() ? "E1" : "E2";
  out.linked = out.named_exit == out.true_exit;
  const std::string target_msg = to_hex(s.flows[static_cast<std::size_t>(target - 1)].message);
  for (const auto& e : run.log.events()) {
    if (e.kind == "message-delivered" && e.fields.value("message", "") == target_msg) {
      out.tagged_message_delivered = true;
    }
  }
  out.trace = std::move(run.log);
  return out;
}

namespace {

/// Third-party nymserver: stores reply blocks under pseudonyms and turns a
/// receiver's (pseudonym, reply) request into a reply onion.
struct Nymserver {
  std::map<Bytes, ReplyInfo> table;

  void on_message(const FormatParams& p, ByteView m) {
    if (m.size() < 8 + p.reply_block_len()) return;
    Bytes nym = slice(m, 0, 8);
    ByteView block = m.subspan(8, p.reply_block_len());
    ReplyInfo info;
    info.first_hop = decode_addr(block.subspan(0, p.addr_len)).value_or(std::pair{AddrKind::relay, std::string()}).second;
    Onion tmp = parse_onion(p, concat({block.subspan(p.addr_len, p.header_len()), Bytes(p.payload_len, 0)}));
    info.eta0 = tmp.header;
    info.k_tilde = to_bytes(block.subspan(p.addr_len + p.header_len(), p.kappa));
    table[nym] = info;
  }

  std::optional<std::pair<Onion, std::string>> lookup(const FormatParams& p, ByteView nym,
                                                      ByteView reply) {
    auto it = table.find(to_bytes(nym));
    if (it == table.end()) return std::nullopt;
    return seal_reply(p, it->second, reply);
  }
};

Bytes encode_reply_block(const FormatParams& p, const ReplyInfo& info) {
  return concat({encode_addr(p, AddrKind::relay, info.first_hop), serialize_header(info.eta0),
                 info.k_tilde});
}

/// Runs one onion through its forward path with honest processing.
std::optional<Exited> carry(const FormatParams& p, const std::map<std::string, KemKeyPair>& keys,
                            Onion onion, std::string at, EventLog& log) {
  ProcContext ctx;
  ctx.replay_check = [](ByteView) { return false; };
  for (;;) {
    ProcResult r = proc_onion(p, keys.at(at).sk, onion, at, ctx);
    if (auto* f = std::get_if<Forwarded>(&r)) {
      log.emit(at, "forwarded", {{"to", f->next_hop}});
      onion = std::move(f->onion);
      at = f->next_hop;
      log.emit(at, "onion-received", {{"from", "prev"}});
      continue;
    }
    if (auto* e = std::get_if<Exited>(&r)) {
      log.emit(at, "message-sent", {{"to", e->receiver}});
      return std::move(*e);
    }
    log.emit(at, "dropped", {{"reason", std::string(to_string(std::get<Failed>(r).reason))}},
             Visibility::diagnostic);
    return std::nullopt;
  }
}

}  // namespace

NymserverOutcome scenario_nymserver_attack(std::uint64_t seed, bool legacy, NymChoice choice) {
  Rng rng = Rng(seed).fork("nymserver");
  const FormatParams p = default_params();
  std::map<std::string, KemKeyPair> keys;
  for (const char* n : {"A", "H", "E1", "E2", "C", "S"}) {
    Rng kr = Rng(seed).fork(std::string("key/") + n);
    keys[n] = kem_keygen(*p.group, kr);
  }
  auto hop = [&](const std::string& n) { return Hop{n, keys.at(n).pk}; };
  NymserverOutcome out;
  out.legacy = legacy;
  EventLog& log = out.trace;
  const Bytes m = to_bytes("hello");
  const Bytes m_reply = to_bytes("hi");

  if (!legacy) {
    OnionSpec spec;
    spec.seed = rng.seed32();
    spec.message = m;
    spec.receiver = "R";
    spec.forward = {hop("A"), hop("H"), hop("E1")};
    spec.reply = {hop("C"), hop("S")};
    Onion o = form_onion(1, spec, p);
    log.emit("S", "forwarded", {{"to", "A"}});
    log.emit("adversary", "link",
             {{"src", "S"}, {"dst", "A"}, {"index", 0}, {"bytes", to_hex(serialize_onion(o))}},
             Visibility::adversary);
    log.emit("adversary", "drop", {{"src", "S"}, {"dst", "A"}, {"index", 0}},
             Visibility::adversary);
    out.expressible = false;
    out.attack_succeeds = false;
    return out;
  }

  const Bytes nym = rng.bytes(8);
  OnionSpec reply_source;
  reply_source.seed = rng.seed32();
  reply_source.message = Bytes{0};
  reply_source.receiver = "NYM";
  reply_source.forward = {hop("E2")};
  reply_source.reply = {hop("C"), hop("S")};
  const OnionLayers rl = form_all_layers(reply_source, p);

  OnionSpec to_receiver;
  to_receiver.seed = rng.seed32();
  to_receiver.message = concat({to_bytes("nym:"), nym, m});
  to_receiver.receiver = "R";
  to_receiver.forward = {hop("A"), hop("H"), hop("E1")};

  OnionSpec to_nym;
  to_nym.seed = rng.seed32();
  to_nym.message = concat({nym, encode_reply_block(p, *rl.reply_info)});
  to_nym.receiver = "NYM";
  to_nym.forward = {hop("A"), hop("H"), hop("E2")};

  std::vector<std::pair<Onion, bool>> sent{{form_onion(1, to_receiver, p), false},
                                           {form_onion(1, to_nym, p), true}};
  if (rng.coin()) std::swap(sent[0], sent[1]);
  for (std::size_t k = 0; k < sent.size(); ++k) {
    log.emit("S", "forwarded", {{"to", "A"}});
    log.emit("adversary", "link",
             {{"src", "S"}, {"dst", "A"}, {"index", k}, {"bytes", to_hex(serialize_onion(sent[k].first))}},
             Visibility::adversary);
  }
  out.expressible = true;
  std::size_t victim = 0;
  if (choice == NymChoice::oracle) {
    victim = sent[0].second ? 0 : 1;
  } else {
    victim = rng.coin() ? 1 : 0;
  }
  log.emit("adversary", "drop", {{"src", "S"}, {"dst", "A"}, {"index", victim}},
           Visibility::adversary);
  const bool dropped_nym = sent[victim].second;

  Nymserver server;
  std::optional<Bytes> receiver_got;
  for (std::size_t k = 0; k < sent.size(); ++k) {
    if (k == victim) continue;
    log.emit("A", "onion-received", {{"from", "S"}}, Visibility::adversary);
    auto ex = carry(p, keys, sent[k].first, "A", log);
    if (!ex) continue;
    if (ex->receiver == "NYM") {
      log.emit("NYM", "message-delivered", {{"from", "E2"}});
      server.on_message(p, ex->message);
    } else {
      log.emit("R", "message-delivered", {{"from", "E1"}, {"message", to_hex(ex->message)}});
      receiver_got = ex->message;
    }
  }

  bool lookup_seen = false;
  bool reply_onion_seen = false;
  if (receiver_got && receiver_got->size() >= 12) {
    const Bytes asked = slice(*receiver_got, 4, 8);
    lookup_seen = true;
    log.emit("adversary", "link",
             {{"src", "R"}, {"dst", "NYM"}, {"type", "lookup"}, {"pseudonym", to_hex(asked)}},
             Visibility::adversary);
    if (auto reply = server.lookup(p, asked, m_reply)) {
      reply_onion_seen = true;
      log.emit("NYM", "forwarded", {{"to", reply->second}});
      log.emit("adversary", "link",
               {{"src", "NYM"}, {"dst", reply->second}, {"type", "onion"}},
               Visibility::adversary);
    } else {
      log.emit("NYM", "lookup-miss", ojson::object(), Visibility::diagnostic);
    }
  }
  const bool claims_link = lookup_seen && !reply_onion_seen;
  if (claims_link) {
    log.emit("adversary", "linked", {{"sender", "S"}, {"receiver", "R"}}, Visibility::adversary);
  }
  out.attack_succeeds = claims_link && dropped_nym;
  return out;
}

std::size_t exit_zero_run(const FormatParams& p, const Peeled& at_exit) {
  const std::size_t start = p.addr_len + p.kappa;
  std::size_t run = 0;
  while (start + run < p.beta_len() && at_exit.routing[start + run] == 0) ++run;
  return run;
}

std::size_t guess_path_length(const FormatParams& p, std::size_t zero_run) {
  if (zero_run < p.kappa) return p.max_hops;
  const std::size_t spare = (zero_run - p.kappa) / p.hop_stride();
  return spare >= p.max_hops ? 1 : p.max_hops - spare;
}

PaddingOutcome scenario_zero_padding_leak(std::uint64_t seed, bool legacy) {
  Rng rng = Rng(seed).fork("padding");
  FormatParams p = default_params();
  if (legacy) p.filler = Filler::legacy_zero;
  const std::size_t n = rng.coin() ? 2 : 5;
  std::map<std::string, KemKeyPair> keys;
  OnionSpec spec;
  spec.seed = rng.seed32();
  spec.message = rng.bytes(32);
  spec.receiver = "R";
  for (std::size_t k = 1; k <= n; ++k) {
    std::string name = k == n ? "X" : "H" + std::to_string(k);
    keys[name] = kem_keygen(*p.group, rng);
    spec.forward.push_back(Hop{name, keys[name].pk});
  }
  ProcContext ctx;
  ctx.replay_check = [](ByteView) { return false; };
  Onion o = form_onion(1, spec, p);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    ProcResult r = proc_onion(p, keys.at(spec.forward[k].name).sk, o, spec.forward[k].name, ctx);
    o = std::get<Forwarded>(r).onion;
  }
  auto peeled = peel_header(p, keys.at("X").sk, o.header);
  PaddingOutcome out;
  out.true_len = n;
  if (!peeled) return out;
  std::size_t guess = guess_path_length(p, exit_zero_run(p, *peeled));
  out.guessed_len = guess <= 3 ? 2 : 5;
  out.path_length_recovered = out.guessed_len == n;
  return out;
}

}  // namespace rsor
