#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rsor/bytes.hpp"
#include "rsor/group.hpp"
#include "rsor/kem.hpp"

namespace rsor {

enum class Filler { random, legacy_zero };

/// Packet geometry. All widths derive from these fields.
///
///   hop stride   s = addr_len + kappa        (routing address + next MAC)
///   beta         L = max_hops * s + kappa
///   header         = element_len + L + kappa
///   reply block    = addr_len + header + kappa   (first hop, eta0, k~)
///   payload        = 0_kappa | R | reply block | u32 len | m | zero fill
struct FormatParams {
  GroupPtr group;
  std::size_t kappa = 16;
  std::size_t max_hops = 5;
  std::size_t addr_len = 16;
  std::size_t payload_len = 1024;
  Filler filler = Filler::random;

  std::size_t element_len() const { return group->element_len(); }
  std::size_t hop_stride() const { return addr_len + kappa; }
  std::size_t beta_len() const { return max_hops * hop_stride() + kappa; }
  std::size_t prg_cap() const { return beta_len() + hop_stride(); }
  std::size_t header_len() const { return element_len() + beta_len() + kappa; }
  std::size_t onion_len() const { return header_len() + payload_len; }
  std::size_t reply_block_len() const { return addr_len + header_len() + kappa; }
  std::size_t message_offset() const { return kappa + addr_len + reply_block_len(); }
  std::size_t max_message_len() const { return payload_len - message_offset() - 4; }
  std::size_t max_name_len() const { return addr_len - 1; }

  /// Throws ArgumentError if the geometry is unusable.
  void validate() const;
};

FormatParams default_params();

/// First byte of a routing address.
enum class AddrKind : std::uint8_t { relay = 1, exit = 2, reply_return = 3, receiver = 4 };

Bytes encode_addr(const FormatParams& p, AddrKind kind, std::string_view name);
/// nullopt on an unknown kind byte or a malformed name.
std::optional<std::pair<AddrKind, std::string>> decode_addr(ByteView field);

struct Header {
  GroupElement alpha;
  Bytes beta;
  Bytes gamma;

  friend bool operator==(const Header&, const Header&) = default;
};

struct Onion {
  Header header;
  Bytes delta;

  friend bool operator==(const Onion&, const Onion&) = default;
};

Bytes serialize_header(const Header& h);
Bytes serialize_onion(const Onion& o);
/// Splits a fixed-width record; does not validate alpha.
Onion parse_onion(const FormatParams& p, ByteView wire);

/// Pre-built reply material carried in a forward payload.
struct ReplyInfo {
  std::string first_hop;
  Header eta0;
  Bytes k_tilde;

  friend bool operator==(const ReplyInfo&, const ReplyInfo&) = default;
};

/// Sender-side state needed to recognise and open a returning reply.
struct ReplyExpectation {
  Bytes ident;
  Bytes k_tilde;
  std::vector<Bytes> reply_pi_keys;
  Header final_header;
  std::string reply_receiver;
};

struct Hop {
  std::string name;
  GroupElement pk;
};

struct OnionSpec {
  std::array<std::uint8_t, 32> seed{};
  Bytes message;
  std::string receiver;
  std::vector<Hop> forward;
  /// Empty for a non-repliable onion; otherwise ends at the reply receiver.
  std::vector<Hop> reply;
};

void validate_spec(const OnionSpec& spec, const FormatParams& p);

struct Forwarded {
  Onion onion;
  std::string next_hop;
};

struct Exited {
  Bytes message;
  std::string receiver;
  std::optional<ReplyInfo> reply;
};

struct ReplyReceived {
  Bytes message;
  Bytes ident;
};

enum class FailReason {
  decode,
  mac_mismatch,
  replay,
  integrity_check,
  unknown_route,
  unsolicited_reply,
  wrong_recipient,
  malformed,
};

std::string_view to_string(FailReason r);

struct Failed {
  FailReason reason;
};

using ProcResult = std::variant<Forwarded, Exited, ReplyReceived, Failed>;

/// Caller-owned state consulted during processing.
struct ProcContext {
  /// Returns true if the header was seen before; records it otherwise.
  std::function<bool(ByteView header)> replay_check;
  std::function<std::optional<ReplyExpectation>(ByteView ident)> find_reply;
};

/// Padding string Phi_upto (upto * hop_stride bytes).
Bytes build_padding(const FormatParams& p, const KemChain& chain, std::size_t upto);

/// Headers for every layer. next_names[i] is the hop after layer i
/// (next_names.size() == chain.layers.size() - 1). final_block is the
/// plaintext routing block of the last layer, L - (n-1) * stride bytes.
std::vector<Header> build_header(const FormatParams& p, const KemChain& chain,
                                 const std::vector<std::string>& next_names, ByteView final_block);

Bytes build_payload_forward(const FormatParams& p, std::string_view receiver,
                            const std::optional<ReplyInfo>& reply, ByteView m);
Bytes build_payload_reply(const FormatParams& p, ByteView m);

struct ForwardPlaintext {
  std::string receiver;
  std::optional<ReplyInfo> reply;
  Bytes message;
};

std::variant<ForwardPlaintext, FailReason> parse_payload_forward(const FormatParams& p,
                                                                 ByteView plain);
std::variant<Bytes, FailReason> parse_payload_reply(const FormatParams& p, ByteView plain);

struct OnionLayers {
  /// Layers 1..n forward, then n+1..n+n_rep reply layers carrying the message.
  std::vector<Onion> layers;
  std::optional<ReplyInfo> reply_info;
  std::optional<ReplyExpectation> expectation;
};

OnionLayers form_all_layers(const OnionSpec& spec, const FormatParams& p);
/// 1-based layer index.
Onion form_onion(std::size_t i, const OnionSpec& spec, const FormatParams& p);
std::optional<ReplyExpectation> reply_expectation(const OnionSpec& spec, const FormatParams& p);

struct Peeled {
  Decapsulation secrets;
  /// (beta || 0_stride) xor rho: the decrypted routing area.
  Bytes routing;
  AddrKind kind;
  std::string name;
  Header next;
};

/// Header-only processing: decapsulate, verify the MAC, peel one layer.
/// nullopt on a bad alpha or MAC.
std::optional<Peeled> peel_header(const FormatParams& p, const Scalar& sk, const Header& h);

ProcResult proc_onion(const FormatParams& p, const Scalar& sk, const Onion& onion,
                      std::string_view self_name, const ProcContext& ctx);

/// Builds the reply onion from the layer the exit received. nullopt if the
/// onion does not exit here or is not repliable.
std::optional<std::pair<Onion, std::string>> form_reply(const FormatParams& p, ByteView m_reply,
                                                        const Onion& onion_at_exit,
                                                        std::string_view exit_name,
                                                        const Scalar& sk);
std::pair<Onion, std::string> seal_reply(const FormatParams& p, const ReplyInfo& info,
                                         ByteView m_reply);

bool recognize_onion(std::size_t i, const Onion& onion, const OnionSpec& spec,
                     const FormatParams& p);

/// XORs mask into the payload. Throws ArgumentError on a zero mask or a
/// length mismatch.
Onion tag_payload(const Onion& onion, ByteView mask);

}  // namespace rsor
