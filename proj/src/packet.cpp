#include "rsor/packet.hpp"

#include <algorithm>
#include <set>

#include "rsor/oracles.hpp"
#include "rsor/prp.hpp"

namespace rsor {

void FormatParams::validate() const {
  if (!group) throw ArgumentError("format needs a group");
  if (kappa < 16 || kappa > 32) throw ArgumentError("kappa must be in [16, 32]");
  if (max_hops < 1) throw ArgumentError("max_hops must be positive");
  if (addr_len < 2) throw ArgumentError("addr_len too small");
  if (payload_len < message_offset() + 4 + 1) throw ArgumentError("payload_len too small");
}

FormatParams default_params() {
  FormatParams p;
  p.group = ristretto255();
  return p;
}

Bytes encode_addr(const FormatParams& p, AddrKind kind, std::string_view name) {
  if (name.size() > p.max_name_len()) throw ArgumentError("name too long for address field");
  if (name.find('\0') != std::string_view::npos) throw ArgumentError("name contains NUL");
  Bytes out(p.addr_len, 0);
  out[0] = static_cast<std::uint8_t>(kind);
  std::copy(name.begin(), name.end(), out.begin() + 1);
  return out;
}

std::optional<std::pair<AddrKind, std::string>> decode_addr(ByteView field) {
  if (field.empty()) return std::nullopt;
  const std::uint8_t k = field[0];
  if (k < 1 || k > 4) return std::nullopt;
  auto body = field.subspan(1);
  auto end = std::find(body.begin(), body.end(), std::uint8_t{0});
  if (!std::all_of(end, body.end(), [](std::uint8_t b) { return b == 0; })) return std::nullopt;
  return std::make_pair(static_cast<AddrKind>(k), std::string(body.begin(), end));
}

Bytes serialize_header(const Header& h) { return concat({h.alpha.view(), h.beta, h.gamma}); }

Bytes serialize_onion(const Onion& o) {
  return concat({o.header.alpha.view(), o.header.beta, o.header.gamma, o.delta});
}

namespace {

Header parse_header(const FormatParams& p, ByteView wire) {
  if (wire.size() != p.header_len()) throw DecodeError("header length mismatch");
  Header h;
  std::size_t off = 0;
  h.alpha.enc = slice(wire, off, p.element_len());
  off += p.element_len();
  h.beta = slice(wire, off, p.beta_len());
  off += p.beta_len();
  h.gamma = slice(wire, off, p.kappa);
  return h;
}

bool header_well_formed(const FormatParams& p, const Header& h) {
  return h.alpha.enc.size() == p.element_len() && h.beta.size() == p.beta_len() &&
         h.gamma.size() == p.kappa;
}

std::vector<Bytes> rho_streams(const FormatParams& p, const KemChain& chain, std::size_t count) {
  std::vector<Bytes> rho;
  rho.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    rho.push_back(prg(chain.layers[i].k_rho, p.prg_cap(), p.prg_cap()));
  }
  return rho;
}

Bytes padding_from(const FormatParams& p, const std::vector<Bytes>& rho, std::size_t upto) {
  const std::size_t s = p.hop_stride();
  const std::size_t span = p.beta_len() + s;
  Bytes phi;
  for (std::size_t i = 1; i <= upto; ++i) {
    phi.resize(phi.size() + s, 0);
    xor_into(phi, ByteView(rho[i - 1]).subspan(span - i * s, i * s));
  }
  return phi;
}

Bytes filler(const FormatParams& p, ByteView seed, std::string_view label, std::size_t len) {
  if (p.filler == Filler::legacy_zero) return Bytes(len, 0);
  return Rng::derive(seed, label).bytes(len);
}

std::vector<GroupElement> keys_of(const std::vector<Hop>& hops) {
  std::vector<GroupElement> out;
  out.reserve(hops.size());
  for (const auto& h : hops) out.push_back(h.pk);
  return out;
}

std::vector<std::string> next_names_of(const std::vector<Hop>& hops) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i < hops.size(); ++i) out.push_back(hops[i].name);
  return out;
}

Bytes frame_message(const FormatParams& p, ByteView m) {
  if (m.size() > p.max_message_len()) throw ArgumentError("message too long");
  Bytes out(4 + m.size());
  put_u32_be(out, static_cast<std::uint32_t>(m.size()));
  std::copy(m.begin(), m.end(), out.begin() + 4);
  return out;
}

std::optional<Bytes> unframe_message(const FormatParams& p, ByteView plain) {
  auto body = plain.subspan(p.message_offset());
  const std::uint32_t len = get_u32_be(body.first(4));
  if (len > p.max_message_len()) return std::nullopt;
  if (!is_all_zero(body.subspan(4 + len))) return std::nullopt;
  return Bytes(body.begin() + 4, body.begin() + 4 + len);
}

std::variant<Decapsulation, FailReason> decap_verify(const FormatParams& p, const Scalar& sk,
                                                     const Header& h) {
  if (!header_well_formed(p, h)) return FailReason::malformed;
  if (!p.group->is_valid(h.alpha.view())) return FailReason::decode;
  Decapsulation d = kem_decap(*p.group, sk, h.alpha, p.kappa);
  if (!mac_verify(d.k_mu, h.beta, h.gamma)) return FailReason::mac_mismatch;
  return d;
}

std::variant<Peeled, FailReason> peel_verified(const FormatParams& p, Decapsulation d,
                                               const Header& h) {
  const std::size_t s = p.hop_stride();
  Bytes routing(p.beta_len() + s, 0);
  std::copy(h.beta.begin(), h.beta.end(), routing.begin());
  xor_into(routing, prg(d.k_rho, routing.size(), p.prg_cap()));
  auto addr = decode_addr(ByteView(routing).first(p.addr_len));
  if (!addr) return FailReason::unknown_route;
  Peeled out{std::move(d), std::move(routing), addr->first, std::move(addr->second), {}};
  if (out.kind == AddrKind::relay) {
    out.next.alpha = kem_blind(*p.group, h.alpha, out.secrets.b);
    out.next.gamma = slice(out.routing, p.addr_len, p.kappa);
    out.next.beta = slice(out.routing, s, p.beta_len());
  }
  return out;
}

}  // namespace

Onion parse_onion(const FormatParams& p, ByteView wire) {
  if (wire.size() != p.onion_len()) throw DecodeError("onion length mismatch");
  Onion o;
  o.header = parse_header(p, wire.first(p.header_len()));
  o.delta = slice(wire, p.header_len(), p.payload_len);
  return o;
}

void validate_spec(const OnionSpec& spec, const FormatParams& p) {
  p.validate();
  if (spec.forward.empty()) throw ArgumentError("empty forward path");
  if (spec.forward.size() > p.max_hops) throw ArgumentError("forward path too long");
  if (spec.reply.size() > p.max_hops) throw ArgumentError("reply path too long");
  if (spec.message.size() > p.max_message_len()) throw ArgumentError("message too long");
  auto check_name = [&](const std::string& n) {
    if (n.empty() || n.size() > p.max_name_len() || n.find('\0') != std::string::npos) {
      throw ArgumentError("invalid name: " + n);
    }
  };
  check_name(spec.receiver);
  for (const auto* path : {&spec.forward, &spec.reply}) {
    std::set<std::string> seen;
    for (const auto& hop : *path) {
      check_name(hop.name);
      if (!seen.insert(hop.name).second) throw ArgumentError("cyclic path at " + hop.name);
      if (!p.group->is_valid(hop.pk.view())) throw ArgumentError("invalid public key for " + hop.name);
    }
  }
}

std::string_view to_string(FailReason r) {
  switch (r) {
    case FailReason::decode: return "decode";
    case FailReason::mac_mismatch: return "mac-mismatch";
    case FailReason::replay: return "replay";
    case FailReason::integrity_check: return "integrity-check";
    case FailReason::unknown_route: return "unknown-route";
    case FailReason::unsolicited_reply: return "unsolicited-reply";
    case FailReason::wrong_recipient: return "wrong-recipient";
    case FailReason::malformed: return "malformed";
  }
  return "unknown";
}

Bytes build_padding(const FormatParams& p, const KemChain& chain, std::size_t upto) {
  if (upto > chain.layers.size()) throw ArgumentError("padding index beyond chain");
  return padding_from(p, rho_streams(p, chain, upto), upto);
}

std::vector<Header> build_header(const FormatParams& p, const KemChain& chain,
                                 const std::vector<std::string>& next_names,
                                 ByteView final_block) {
  const std::size_t n = chain.layers.size();
  const std::size_t s = p.hop_stride();
  const std::size_t L = p.beta_len();
  if (n == 0 || n > p.max_hops) throw ArgumentError("path length out of range");
  if (next_names.size() + 1 != n) throw ArgumentError("next_names must have n-1 entries");
  if (final_block.size() != L - (n - 1) * s) throw ArgumentError("final block width mismatch");

  const auto rho = rho_streams(p, chain, n);
  const Bytes phi = padding_from(p, rho, n - 1);

  std::vector<Header> hs(n);
  Bytes last(final_block.begin(), final_block.end());
  xor_into(last, rho[n - 1]);
  hs[n - 1].beta = concat({last, phi});
  hs[n - 1].gamma = mac(chain.layers[n - 1].k_mu, hs[n - 1].beta);
  for (std::size_t i = n - 1; i-- > 0;) {
    Bytes b = concat({encode_addr(p, AddrKind::relay, next_names[i]), hs[i + 1].gamma,
                      ByteView(hs[i + 1].beta).first(L - s)});
    xor_into(b, rho[i]);
    hs[i].beta = std::move(b);
    hs[i].gamma = mac(chain.layers[i].k_mu, hs[i].beta);
  }
  for (std::size_t i = 0; i < n; ++i) hs[i].alpha = chain.layers[i].alpha;
  return hs;
}

Bytes build_payload_forward(const FormatParams& p, std::string_view receiver,
                            const std::optional<ReplyInfo>& reply, ByteView m) {
  Bytes out(p.payload_len, 0);
  std::size_t off = p.kappa;
  Bytes r = encode_addr(p, AddrKind::receiver, receiver);
  std::copy(r.begin(), r.end(), out.begin() + off);
  off += p.addr_len;
  if (reply) {
    if (reply->k_tilde.size() != p.kappa || !header_well_formed(p, reply->eta0)) {
      throw ArgumentError("malformed reply info");
    }
    Bytes block = concat({encode_addr(p, AddrKind::relay, reply->first_hop),
                          serialize_header(reply->eta0), reply->k_tilde});
    std::copy(block.begin(), block.end(), out.begin() + off);
  }
  Bytes framed = frame_message(p, m);
  std::copy(framed.begin(), framed.end(), out.begin() + p.message_offset());
  return out;
}

Bytes build_payload_reply(const FormatParams& p, ByteView m) {
  Bytes out(p.payload_len, 0);
  Bytes framed = frame_message(p, m);
  std::copy(framed.begin(), framed.end(), out.begin() + p.message_offset());
  return out;
}

std::variant<ForwardPlaintext, FailReason> parse_payload_forward(const FormatParams& p,
                                                                 ByteView plain) {
  if (plain.size() != p.payload_len) return FailReason::malformed;
  if (!is_all_zero(plain.first(p.kappa))) return FailReason::integrity_check;
  ForwardPlaintext out;
  auto r = decode_addr(plain.subspan(p.kappa, p.addr_len));
  if (!r || r->first != AddrKind::receiver || r->second.empty()) return FailReason::malformed;
  out.receiver = r->second;
  auto block = plain.subspan(p.kappa + p.addr_len, p.reply_block_len());
  if (!is_all_zero(block)) {
    auto hop = decode_addr(block.first(p.addr_len));
    if (!hop || hop->first != AddrKind::relay || hop->second.empty()) return FailReason::malformed;
    ReplyInfo info;
    info.first_hop = hop->second;
    info.eta0 = parse_header(p, block.subspan(p.addr_len, p.header_len()));
    info.k_tilde = slice(block, p.addr_len + p.header_len(), p.kappa);
    out.reply = std::move(info);
  }
  auto m = unframe_message(p, plain);
  if (!m) return FailReason::malformed;
  out.message = std::move(*m);
  return out;
}

std::variant<Bytes, FailReason> parse_payload_reply(const FormatParams& p, ByteView plain) {
  if (plain.size() != p.payload_len) return FailReason::malformed;
  if (!is_all_zero(plain.first(p.kappa))) return FailReason::integrity_check;
  if (!is_all_zero(plain.subspan(p.kappa, p.message_offset() - p.kappa))) {
    return FailReason::malformed;
  }
  auto m = unframe_message(p, plain);
  if (!m) return FailReason::malformed;
  return std::move(*m);
}

OnionLayers form_all_layers(const OnionSpec& spec, const FormatParams& p) {
  validate_spec(spec, p);
  const Group& g = *p.group;
  const ByteView seed(spec.seed.data(), spec.seed.size());
  const std::size_t n = spec.forward.size();
  const std::size_t nr = spec.reply.size();
  const std::size_t s = p.hop_stride();
  const std::size_t L = p.beta_len();

  OnionLayers out;
  std::vector<Header> reply_headers;
  KemChain reply_chain;
  if (nr > 0) {
    Rng xr = Rng::derive(seed, "x-reply");
    reply_chain = kem_chain_create(g, g.random_scalar(xr), keys_of(spec.reply), p.kappa);
    Bytes ident = Rng::derive(seed, "ident").bytes(p.kappa);
    Bytes k_tilde = Rng::derive(seed, "k-tilde").bytes(p.kappa);
    Bytes final_block =
        concat({encode_addr(p, AddrKind::reply_return, spec.reply.back().name), ident,
                filler(p, seed, "filler-reply", L - (nr - 1) * s - p.addr_len - p.kappa)});
    reply_headers = build_header(p, reply_chain, next_names_of(spec.reply), final_block);
    out.reply_info = ReplyInfo{spec.reply.front().name, reply_headers.front(), k_tilde};
    ReplyExpectation e{ident, k_tilde, {}, reply_headers.back(), spec.reply.back().name};
    for (const auto& l : reply_chain.layers) e.reply_pi_keys.push_back(l.k_pi);
    out.expectation = std::move(e);
  }

  Rng xf = Rng::derive(seed, "x-forward");
  KemChain chain = kem_chain_create(g, g.random_scalar(xf), keys_of(spec.forward), p.kappa);
  Bytes final_block =
      concat({encode_addr(p, AddrKind::exit, ""), Rng::derive(seed, "ident-forward").bytes(p.kappa),
              filler(p, seed, "filler-forward", L - (n - 1) * s - p.addr_len - p.kappa)});
  std::vector<Header> headers = build_header(p, chain, next_names_of(spec.forward), final_block);

  std::vector<Bytes> deltas(n);
  Bytes d = build_payload_forward(p, spec.receiver, out.reply_info, spec.message);
  for (std::size_t i = n; i-- > 0;) {
    d = prp_enc(chain.layers[i].k_pi, d, p.payload_len);
    deltas[i] = d;
  }
  for (std::size_t i = 0; i < n; ++i) out.layers.push_back(Onion{headers[i], deltas[i]});

  if (nr > 0) {
    Bytes dr = prp_enc(out.reply_info->k_tilde, build_payload_reply(p, spec.message), p.payload_len);
    for (std::size_t k = 0; k < nr; ++k) {
      out.layers.push_back(Onion{reply_headers[k], dr});
      if (k + 1 < nr) dr = prp_dec(reply_chain.layers[k].k_pi, dr, p.payload_len);
    }
  }
  return out;
}

Onion form_onion(std::size_t i, const OnionSpec& spec, const FormatParams& p) {
  if (i < 1 || i > spec.forward.size() + spec.reply.size()) {
    throw ArgumentError("layer index out of range");
  }
  return form_all_layers(spec, p).layers[i - 1];
}

std::optional<ReplyExpectation> reply_expectation(const OnionSpec& spec, const FormatParams& p) {
  return form_all_layers(spec, p).expectation;
}

std::optional<Peeled> peel_header(const FormatParams& p, const Scalar& sk, const Header& h) {
  auto v = decap_verify(p, sk, h);
  if (auto* d = std::get_if<Decapsulation>(&v)) {
    auto r = peel_verified(p, std::move(*d), h);
    if (auto* peeled = std::get_if<Peeled>(&r)) return std::move(*peeled);
  }
  return std::nullopt;
}

ProcResult proc_onion(const FormatParams& p, const Scalar& sk, const Onion& onion,
                      std::string_view self_name, const ProcContext& ctx) {
  if (onion.delta.size() != p.payload_len) return Failed{FailReason::malformed};
  auto v = decap_verify(p, sk, onion.header);
  if (auto* r = std::get_if<FailReason>(&v)) return Failed{*r};
  if (ctx.replay_check && ctx.replay_check(serialize_header(onion.header))) {
    return Failed{FailReason::replay};
  }
  auto pv = peel_verified(p, std::move(std::get<Decapsulation>(v)), onion.header);
  if (auto* r = std::get_if<FailReason>(&pv)) return Failed{*r};
  Peeled& peeled = std::get<Peeled>(pv);

  switch (peeled.kind) {
    case AddrKind::relay: {
      if (peeled.name.empty()) return Failed{FailReason::unknown_route};
      Bytes delta = prp_dec(peeled.secrets.k_pi, onion.delta, p.payload_len);
      return Forwarded{Onion{std::move(peeled.next), std::move(delta)}, std::move(peeled.name)};
    }
    case AddrKind::exit: {
      Bytes plain = prp_dec(peeled.secrets.k_pi, onion.delta, p.payload_len);
      auto parsed = parse_payload_forward(p, plain);
      if (auto* r = std::get_if<FailReason>(&parsed)) return Failed{*r};
      auto& fp = std::get<ForwardPlaintext>(parsed);
      return Exited{std::move(fp.message), std::move(fp.receiver), std::move(fp.reply)};
    }
    case AddrKind::reply_return: {
      if (peeled.name != self_name) return Failed{FailReason::wrong_recipient};
      Bytes ident = slice(peeled.routing, p.addr_len, p.kappa);
      std::optional<ReplyExpectation> e;
      if (ctx.find_reply) e = ctx.find_reply(ident);
      if (!e || e->final_header != onion.header || e->reply_pi_keys.empty()) {
        return Failed{FailReason::unsolicited_reply};
      }
      Bytes x = onion.delta;
      for (std::size_t k = e->reply_pi_keys.size() - 1; k-- > 0;) {
        x = prp_enc(e->reply_pi_keys[k], x, p.payload_len);
      }
      Bytes plain = prp_dec(e->k_tilde, x, p.payload_len);
      auto parsed = parse_payload_reply(p, plain);
      if (auto* r = std::get_if<FailReason>(&parsed)) return Failed{*r};
      return ReplyReceived{std::move(std::get<Bytes>(parsed)), std::move(ident)};
    }
    case AddrKind::receiver:
      break;
  }
  return Failed{FailReason::unknown_route};
}

std::optional<std::pair<Onion, std::string>> form_reply(const FormatParams& p, ByteView m_reply,
                                                        const Onion& onion_at_exit,
                                                        std::string_view exit_name,
                                                        const Scalar& sk) {
  if (m_reply.size() > p.max_message_len()) return std::nullopt;
  ProcResult r = proc_onion(p, sk, onion_at_exit, exit_name, ProcContext{});
  auto* ex = std::get_if<Exited>(&r);
  if (!ex || !ex->reply) return std::nullopt;
  if (!p.group->is_valid(ex->reply->eta0.alpha.view())) return std::nullopt;
  return seal_reply(p, *ex->reply, m_reply);
}

std::pair<Onion, std::string> seal_reply(const FormatParams& p, const ReplyInfo& info,
                                         ByteView m_reply) {
  Bytes delta = prp_enc(info.k_tilde, build_payload_reply(p, m_reply), p.payload_len);
  return {Onion{info.eta0, std::move(delta)}, info.first_hop};
}

bool recognize_onion(std::size_t i, const Onion& onion, const OnionSpec& spec,
                     const FormatParams& p) {
  if (i < 1 || i > spec.forward.size() + spec.reply.size()) return false;
  return form_all_layers(spec, p).layers[i - 1].header == onion.header;
}

Onion tag_payload(const Onion& onion, ByteView mask) {
  if (mask.size() != onion.delta.size()) throw ArgumentError("mask length mismatch");
  if (is_all_zero(mask)) throw ArgumentError("zero mask");
  Onion out = onion;
  xor_into(out.delta, mask);
  return out;
}

}  // namespace rsor
