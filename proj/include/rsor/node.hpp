#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "rsor/kem.hpp"
#include "rsor/packet.hpp"
#include "rsor/rng.hpp"

namespace rsor {

struct BufferedForward {
  Onion onion;
  std::string next;
};

struct BufferedDelivery {
  /// Layer as received by the exit; kept so a rid can be minted on forward.
  Onion exit_layer;
  Bytes message;
  std::string receiver;
  bool repliable = false;
};

using Outgoing = std::variant<BufferedForward, BufferedDelivery>;

struct RelayState {
  std::string name;
  KemKeyPair keypair;
  std::set<Bytes> seen_headers;
  std::map<Bytes, Outgoing> outgoing;
  std::map<Bytes, Onion> reply_buffer;
};

struct SenderState {
  std::string name;
  KemKeyPair keypair;
  std::map<Bytes, ReplyExpectation> pending;
};

struct InboxEntry {
  Bytes message;
  std::optional<Bytes> rid;
  std::string from;
};

struct ReceiverState {
  std::string address;
  std::vector<InboxEntry> inbox;
};

struct Buffered {
  Bytes tid;
};

struct Dropped {
  FailReason reason;
};

using RelayEvent = std::variant<Buffered, Dropped>;

struct SendOnion {
  std::string to;
  Onion onion;
};

struct SendMessage {
  std::string to;
  Bytes message;
  std::optional<Bytes> rid;
};

struct SendReply {
  std::string to;
  Bytes message;
  Bytes rid;
};

struct NoAction {};

using RelayAction = std::variant<SendOnion, SendMessage, NoAction>;

RelayState make_relay(std::string name, KemKeyPair keypair);

RelayEvent relay_on_onion(const FormatParams& p, RelayState& state, const Onion& onion, Rng& rng);
RelayAction relay_forward(const FormatParams& p, RelayState& state, ByteView tid, Rng& rng);

/// On a rid hit, builds the reply onion and places it in the outgoing
/// buffer; the returned tid is released with relay_forward. The rid is
/// consumed. nullopt on a miss.
std::optional<Bytes> relay_on_receiver_reply(const FormatParams& p, RelayState& state,
                                             ByteView m_reply, ByteView rid, Rng& rng);

SenderState make_sender(std::string name, KemKeyPair keypair);
SendOnion sender_send(const FormatParams& p, SenderState& state, const OnionSpec& spec);

struct GotReply {
  Bytes message;
};

using SenderEvent = std::variant<GotReply, Dropped>;

SenderEvent sender_on_onion(const FormatParams& p, SenderState& state, const Onion& onion);

void receiver_on_message(ReceiverState& state, ByteView m, std::optional<Bytes> rid,
                         std::string from);
/// Receivers never parse onions.
Dropped receiver_on_onion(ReceiverState& state, const Onion& onion);
/// Reply to inbox entry `index`. nullopt if it has no rid.
std::optional<SendReply> receiver_reply(const ReceiverState& state, std::size_t index,
                                        ByteView m_reply);

}  // namespace rsor
