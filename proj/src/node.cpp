#include "rsor/node.hpp"

namespace rsor {

namespace {

Bytes fresh_id(const FormatParams& p, Rng& rng, const auto& taken) {
  for (;;) {
    Bytes id = rng.bytes(p.kappa);
    if (!taken.contains(id)) return id;
  }
}

}  // namespace

RelayState make_relay(std::string name, KemKeyPair keypair) {
  RelayState s;
  s.name = std::move(name);
  s.keypair = std::move(keypair);
  return s;
}

RelayEvent relay_on_onion(const FormatParams& p, RelayState& state, const Onion& onion, Rng& rng) {
  ProcContext ctx;
  ctx.replay_check = [&state](ByteView header) {
    return !state.seen_headers.insert(to_bytes(header)).second;
  };
  ProcResult r = proc_onion(p, state.keypair.sk, onion, state.name, ctx);
  if (auto* f = std::get_if<Failed>(&r)) return Dropped{f->reason};
  Bytes tid = fresh_id(p, rng, state.outgoing);
  if (auto* fw = std::get_if<Forwarded>(&r)) {
    state.outgoing.emplace(tid, BufferedForward{std::move(fw->onion), std::move(fw->next_hop)});
  } else if (auto* ex = std::get_if<Exited>(&r)) {
    state.outgoing.emplace(tid, BufferedDelivery{onion, std::move(ex->message),
                                                 std::move(ex->receiver), ex->reply.has_value()});
  } else {
    return Dropped{FailReason::unknown_route};
  }
  return Buffered{tid};
}

RelayAction relay_forward(const FormatParams& p, RelayState& state, ByteView tid, Rng& rng) {
  auto it = state.outgoing.find(to_bytes(tid));
  if (it == state.outgoing.end()) return NoAction{};
  Outgoing entry = std::move(it->second);
  state.outgoing.erase(it);
  if (auto* fw = std::get_if<BufferedForward>(&entry)) {
    return SendOnion{std::move(fw->next), std::move(fw->onion)};
  }
  auto& d = std::get<BufferedDelivery>(entry);
  std::optional<Bytes> rid;
  if (d.repliable && form_reply(p, Bytes{}, d.exit_layer, state.name, state.keypair.sk)) {
    rid = fresh_id(p, rng, state.reply_buffer);
    state.reply_buffer.emplace(*rid, std::move(d.exit_layer));
  }
  return SendMessage{std::move(d.receiver), std::move(d.message), std::move(rid)};
}

std::optional<Bytes> relay_on_receiver_reply(const FormatParams& p, RelayState& state,
                                             ByteView m_reply, ByteView rid, Rng& rng) {
  auto it = state.reply_buffer.find(to_bytes(rid));
  if (it == state.reply_buffer.end()) return std::nullopt;
  Onion stored = std::move(it->second);
  state.reply_buffer.erase(it);
  if (m_reply.size() > p.max_message_len()) return std::nullopt;
  auto reply = form_reply(p, m_reply, stored, state.name, state.keypair.sk);
  if (!reply) return std::nullopt;
  Bytes tid = fresh_id(p, rng, state.outgoing);
  state.outgoing.emplace(tid, BufferedForward{std::move(reply->first), std::move(reply->second)});
  return tid;
}

SenderState make_sender(std::string name, KemKeyPair keypair) {
  SenderState s;
  s.name = std::move(name);
  s.keypair = std::move(keypair);
  return s;
}

SendOnion sender_send(const FormatParams& p, SenderState& state, const OnionSpec& spec) {
  validate_spec(spec, p);
  OnionLayers all = form_all_layers(spec, p);
  if (all.expectation) state.pending.emplace(all.expectation->ident, *all.expectation);
  return SendOnion{spec.forward.front().name, all.layers.front()};
}

SenderEvent sender_on_onion(const FormatParams& p, SenderState& state, const Onion& onion) {
  ProcContext ctx;
  ctx.replay_check = [](ByteView) { return false; };
  ctx.find_reply = [&state](ByteView ident) -> std::optional<ReplyExpectation> {
    auto it = state.pending.find(to_bytes(ident));
    if (it == state.pending.end()) return std::nullopt;
    return it->second;
  };
  ProcResult r = proc_onion(p, state.keypair.sk, onion, state.name, ctx);
  if (auto* got = std::get_if<ReplyReceived>(&r)) {
    state.pending.erase(got->ident);
    return GotReply{std::move(got->message)};
  }
  if (auto* f = std::get_if<Failed>(&r)) return Dropped{f->reason};
  return Dropped{FailReason::unsolicited_reply};
}

void receiver_on_message(ReceiverState& state, ByteView m, std::optional<Bytes> rid,
                         std::string from) {
  state.inbox.push_back(InboxEntry{to_bytes(m), std::move(rid), std::move(from)});
}

Dropped receiver_on_onion(ReceiverState&, const Onion&) { return Dropped{FailReason::malformed}; }

std::optional<SendReply> receiver_reply(const ReceiverState& state, std::size_t index,
                                        ByteView m_reply) {
  if (index >= state.inbox.size() || !state.inbox[index].rid) return std::nullopt;
  const auto& e = state.inbox[index];
  return SendReply{e.from, to_bytes(m_reply), *e.rid};
}

}  // namespace rsor
