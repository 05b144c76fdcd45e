#include <doctest.h>

#include <set>

#include "rsor/oracles.hpp"
#include "rsor/packet.hpp"
#include "support.hpp"

using namespace rsor;
using testing_support::Fixture;

namespace {

ProcContext expecting(const std::optional<ReplyExpectation>& e) {
  ProcContext ctx;
  ctx.find_reply = [e](ByteView ident) -> std::optional<ReplyExpectation> {
    if (e && e->ident == Bytes(ident.begin(), ident.end())) return e;
    return std::nullopt;
  };
  return ctx;
}

Bytes flip(const Bytes& b, std::size_t bit) {
  Bytes out = b;
  out[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
  return out;
}

}  // namespace

TEST_SUITE("packet") {

TEST_CASE("geometry") {
  FormatParams p = default_params();
  p.validate();
  CHECK(p.beta_len() == (2 * p.max_hops + 1) * p.kappa);
  CHECK(p.prg_cap() == (2 * p.max_hops + 3) * p.kappa);
  CHECK(p.header_len() == 32 + 176 + 16);
  CHECK(p.onion_len() == 224 + 1024);
  FormatParams tiny = p;
  tiny.payload_len = 100;
  CHECK_THROWS_AS(tiny.validate(), ArgumentError);
}

TEST_CASE("address fields") {
  FormatParams p = default_params();
  Bytes a = encode_addr(p, AddrKind::relay, "R7");
  CHECK(a.size() == p.addr_len);
  auto d = decode_addr(a);
  REQUIRE(d);
  CHECK(d->first == AddrKind::relay);
  CHECK(d->second == "R7");
  CHECK_THROWS_AS(encode_addr(p, AddrKind::relay, std::string(16, 'x')), ArgumentError);
  CHECK_FALSE(decode_addr(Bytes(16, 0)));
  Bytes junk = a;
  junk[5] = 'z';
  CHECK_FALSE(decode_addr(junk));
}

TEST_CASE("padding lengths and suffix property") {
  Fixture fx;
  Rng rng(31);
  const std::size_t s = fx.params.hop_stride();
  OnionSpec spec = fx.spec(rng, 5, 0);
  std::vector<GroupElement> keys;
  for (const auto& h : spec.forward) keys.push_back(h.pk);
  KemChain c = kem_chain_create(*fx.params.group, fx.params.group->random_scalar(rng), keys, 16);
  CHECK(build_padding(fx.params, c, 0).empty());
  for (std::size_t i = 1; i <= 5; ++i) CHECK(build_padding(fx.params, c, i).size() == i * s);
  CHECK_THROWS_AS(build_padding(fx.params, c, 6), ArgumentError);

  std::vector<std::string> next{"R2", "R3", "R4", "R5"};
  Bytes final_block(fx.params.beta_len() - 4 * s, 0x33);
  auto hs = build_header(fx.params, c, next, final_block);
  for (std::size_t i = 0; i < 5; ++i) {
    Bytes phi = build_padding(fx.params, c, i);
    Bytes tail(hs[i].beta.end() - static_cast<std::ptrdiff_t>(phi.size()), hs[i].beta.end());
    CHECK(tail == phi);
    CHECK(hs[i].beta.size() == fx.params.beta_len());
    CHECK(mac_verify(c.layers[i].k_mu, hs[i].beta, hs[i].gamma));
  }
  CHECK_THROWS_AS(build_header(fx.params, c, next, Bytes(3, 0)), ArgumentError);
}

TEST_CASE("one-hop header") {
  Fixture fx;
  Rng rng(32);
  std::vector<GroupElement> keys{fx.keys.at("R1").pk};
  KemChain c = kem_chain_create(*fx.params.group, fx.params.group->random_scalar(rng), keys, 16);
  Bytes block = rng.bytes(fx.params.beta_len());
  auto hs = build_header(fx.params, c, {}, block);
  REQUIRE(hs.size() == 1);
  Bytes expect = block;
  xor_into(expect, prg(c.layers[0].k_rho, fx.params.beta_len(), fx.params.prg_cap()));
  CHECK(hs[0].beta == expect);
  CHECK(hs[0].gamma == mac(c.layers[0].k_mu, hs[0].beta));
}

TEST_CASE("relay processing reproduces sender-side headers") {
  Fixture fx;
  Rng rng(33);
  OnionSpec spec = fx.spec(rng, 3, 2);
  auto all = form_all_layers(spec, fx.params);
  for (std::size_t i = 0; i + 1 < 3; ++i) {
    auto peeled = peel_header(fx.params, fx.sk_for(spec, i), all.layers[i].header);
    REQUIRE(peeled);
    CHECK(peeled->kind == AddrKind::relay);
    CHECK(peeled->name == spec.forward[i + 1].name);
    CHECK(peeled->next == all.layers[i + 1].header);
  }
}

TEST_CASE("payload layouts") {
  Fixture fx;
  const FormatParams& p = fx.params;
  Rng rng(34);
  OnionSpec spec = fx.spec(rng, 2, 2);
  auto all = form_all_layers(spec, p);
  Bytes m = to_bytes("hello");
  Bytes rep = build_payload_forward(p, "bob", all.reply_info, m);
  Bytes non = build_payload_forward(p, "bob", std::nullopt, m);
  Bytes back = build_payload_reply(p, m);
  CHECK(rep.size() == p.payload_len);
  CHECK(non.size() == p.payload_len);
  CHECK(back.size() == p.payload_len);
  CHECK(is_all_zero(ByteView(rep).first(p.kappa)));
  CHECK(is_all_zero(ByteView(non).first(p.kappa)));
  CHECK(is_all_zero(ByteView(non).subspan(p.kappa + p.addr_len, p.reply_block_len())));

  auto r1 = std::get<ForwardPlaintext>(parse_payload_forward(p, rep));
  CHECK(r1.receiver == "bob");
  CHECK(r1.message == m);
  REQUIRE(r1.reply);
  CHECK(*r1.reply == *all.reply_info);
  auto r2 = std::get<ForwardPlaintext>(parse_payload_forward(p, non));
  CHECK_FALSE(r2.reply);
  CHECK(std::get<Bytes>(parse_payload_reply(p, back)) == m);

  CHECK_THROWS_AS(build_payload_forward(p, "bob", std::nullopt, Bytes(p.max_message_len() + 1)),
                  ArgumentError);
  Bytes full(p.max_message_len(), 0xab);
  auto r3 = std::get<ForwardPlaintext>(
      parse_payload_forward(p, build_payload_forward(p, "bob", std::nullopt, full)));
  CHECK(r3.message == full);

  Bytes broken = rep;
  broken[3] ^= 1;
  CHECK(std::get<FailReason>(parse_payload_forward(p, broken)) == FailReason::integrity_check);
}

TEST_CASE("honest forward chain exits with the message") {
  Fixture fx;
  Rng rng(35);
  OnionSpec spec = fx.spec(rng, 3, 0);
  Onion o = form_onion(1, spec, fx.params);
  CHECK(o == form_onion(1, spec, fx.params));
  for (std::size_t i = 0; i < 2; ++i) {
    auto r = proc_onion(fx.params, fx.sk_for(spec, i), o, fx.name_for(spec, i), {});
    auto* f = std::get_if<Forwarded>(&r);
    REQUIRE(f);
    CHECK(f->next_hop == spec.forward[i + 1].name);
    CHECK(f->onion == form_onion(i + 2, spec, fx.params));
    o = f->onion;
  }
  auto r = proc_onion(fx.params, fx.sk_for(spec, 2), o, fx.name_for(spec, 2), {});
  auto* e = std::get_if<Exited>(&r);
  REQUIRE(e);
  CHECK(e->message == spec.message);
  CHECK(e->receiver == spec.receiver);
  CHECK_FALSE(e->reply);
  CHECK_FALSE(form_reply(fx.params, to_bytes("x"), o, fx.name_for(spec, 2), fx.sk_for(spec, 2)));
}

TEST_CASE("full round trip with reply") {
  Fixture fx;
  Rng rng(36);
  for (std::size_t n = 1; n <= 5; ++n) {
    for (std::size_t nr = 1; nr <= 5; ++nr) {
      OnionSpec spec = fx.spec(rng, n, nr);
      auto all = form_all_layers(spec, fx.params);
      Onion o = all.layers[0];
      for (std::size_t i = 0; i + 1 < n; ++i) {
        o = std::get<Forwarded>(proc_onion(fx.params, fx.sk_for(spec, i), o, fx.name_for(spec, i), {}))
                .onion;
      }
      const Scalar& exit_sk = fx.sk_for(spec, n - 1);
      auto ex = std::get<Exited>(proc_onion(fx.params, exit_sk, o, fx.name_for(spec, n - 1), {}));
      CHECK(ex.reply);
      Bytes m_back = rng.bytes(1 + rng.uniform(100));
      auto rep = form_reply(fx.params, m_back, o, fx.name_for(spec, n - 1), exit_sk);
      REQUIRE(rep);
      CHECK(rep->second == spec.reply[0].name);
      CHECK(serialize_onion(rep->first).size() == fx.params.onion_len());
      Onion r = rep->first;
      for (std::size_t k = 0; k + 1 < nr; ++k) {
        auto res = proc_onion(fx.params, fx.sk(spec.reply[k].name), r, spec.reply[k].name, {});
        auto* f = std::get_if<Forwarded>(&res);
        REQUIRE(f);
        CHECK(f->next_hop == spec.reply[k + 1].name);
        r = f->onion;
      }
      auto fin = proc_onion(fx.params, fx.sk("S"), r, "S", expecting(all.expectation));
      auto* got = std::get_if<ReplyReceived>(&fin);
      REQUIRE(got);
      CHECK(got->message == m_back);
      CHECK(got->ident == all.expectation->ident);
    }
  }
}

TEST_CASE("reply layers are formed like a reply carrying the message") {
  Fixture fx;
  Rng rng(37);
  OnionSpec spec = fx.spec(rng, 2, 3);
  auto all = form_all_layers(spec, fx.params);
  auto rep = form_reply(fx.params, spec.message, all.layers[1], spec.forward[1].name,
                        fx.sk_for(spec, 1));
  REQUIRE(rep);
  CHECK(rep->first == all.layers[2]);
  for (std::size_t k = 0; k + 1 < 3; ++k) {
    auto f = std::get<Forwarded>(
        proc_onion(fx.params, fx.sk(spec.reply[k].name), all.layers[2 + k], spec.reply[k].name, {}));
    CHECK(f.onion == all.layers[3 + k]);
  }
  auto fin = proc_onion(fx.params, fx.sk("S"), all.layers[4], "S", expecting(all.expectation));
  CHECK(std::get<ReplyReceived>(fin).message == spec.message);
}

TEST_CASE("payload tagging is caught at the exit") {
  Fixture fx;
  Rng rng(38);
  for (int trial = 0; trial < 200; ++trial) {
    OnionSpec spec = fx.spec(rng, 3, 0);
    Onion o = form_onion(1, spec, fx.params);
    Bytes mask(fx.params.payload_len, 0);
    std::size_t bit = rng.uniform(fx.params.payload_len * 8);
    mask[bit / 8] = static_cast<std::uint8_t>(1u << (bit % 8));
    Onion t = tag_payload(o, mask);
    CHECK(t.header == o.header);
    for (std::size_t i = 0; i < 2; ++i) {
      t = std::get<Forwarded>(proc_onion(fx.params, fx.sk_for(spec, i), t, fx.name_for(spec, i), {}))
              .onion;
    }
    auto r = proc_onion(fx.params, fx.sk_for(spec, 2), t, fx.name_for(spec, 2), {});
    REQUIRE(std::holds_alternative<Failed>(r));
    CHECK(std::get<Failed>(r).reason == FailReason::integrity_check);
  }
  Onion o = form_onion(1, fx.spec(rng, 1, 0), fx.params);
  CHECK_THROWS_AS(tag_payload(o, Bytes(fx.params.payload_len, 0)), ArgumentError);
  CHECK_THROWS_AS(tag_payload(o, Bytes(3, 1)), ArgumentError);
}

TEST_CASE("tagged reply is rejected by the reply receiver") {
  Fixture fx;
  Rng rng(39);
  OnionSpec spec = fx.spec(rng, 1, 2);
  auto all = form_all_layers(spec, fx.params);
  Bytes mask(fx.params.payload_len, 0);
  mask[500] = 0x10;
  Onion t = tag_payload(all.layers[1], mask);
  t = std::get<Forwarded>(proc_onion(fx.params, fx.sk(spec.reply[0].name), t, spec.reply[0].name, {}))
          .onion;
  auto r = proc_onion(fx.params, fx.sk("S"), t, "S", expecting(all.expectation));
  REQUIRE(std::holds_alternative<Failed>(r));
  CHECK(std::get<Failed>(r).reason == FailReason::integrity_check);
}

TEST_CASE("header bit flips are rejected") {
  Fixture fx;
  Rng rng(40);
  OnionSpec spec = fx.spec(rng, 2, 0);
  Onion o = form_onion(1, spec, fx.params);
  const Scalar& sk = fx.sk_for(spec, 0);
  const std::size_t total = fx.params.header_len() * 8;
  const std::size_t alpha_bits = fx.params.element_len() * 8;
  int rejected = 0;
  for (int i = 0; i < 1000; ++i) {
    std::size_t bit = rng.uniform(total);
    Bytes wire = flip(serialize_onion(o), bit);
    auto r = proc_onion(fx.params, sk, parse_onion(fx.params, wire), "x", {});
    auto* f = std::get_if<Failed>(&r);
    if (!f) continue;
    ++rejected;
    if (bit >= alpha_bits) {
      CHECK(f->reason == FailReason::mac_mismatch);
    } else {
      CHECK((f->reason == FailReason::mac_mismatch || f->reason == FailReason::decode));
    }
  }
  CHECK(rejected == 1000);
}

TEST_CASE("replay view") {
  Fixture fx;
  Rng rng(41);
  OnionSpec spec = fx.spec(rng, 2, 0);
  Onion o = form_onion(1, spec, fx.params);
  std::set<Bytes> seen;
  ProcContext ctx;
  ctx.replay_check = [&seen](ByteView h) { return !seen.insert(Bytes(h.begin(), h.end())).second; };
  CHECK(std::holds_alternative<Forwarded>(proc_onion(fx.params, fx.sk_for(spec, 0), o, "x", ctx)));
  auto r = proc_onion(fx.params, fx.sk_for(spec, 0), o, "x", ctx);
  REQUIRE(std::holds_alternative<Failed>(r));
  CHECK(std::get<Failed>(r).reason == FailReason::replay);
  Bytes mask(fx.params.payload_len, 1);
  r = proc_onion(fx.params, fx.sk_for(spec, 0), tag_payload(o, mask), "x", ctx);
  CHECK(std::get<Failed>(r).reason == FailReason::replay);
}

TEST_CASE("unsolicited and misdirected replies") {
  Fixture fx;
  Rng rng(42);
  OnionSpec spec = fx.spec(rng, 1, 1);
  auto all = form_all_layers(spec, fx.params);
  Onion last = all.layers.back();
  auto r = proc_onion(fx.params, fx.sk("S"), last, "S", {});
  CHECK(std::get<Failed>(r).reason == FailReason::unsolicited_reply);
  OnionSpec other = fx.spec(rng, 1, 1);
  r = proc_onion(fx.params, fx.sk("S"), last, "S", expecting(reply_expectation(other, fx.params)));
  CHECK(std::get<Failed>(r).reason == FailReason::unsolicited_reply);
  r = proc_onion(fx.params, fx.sk("S"), last, "T", expecting(all.expectation));
  CHECK(std::get<Failed>(r).reason == FailReason::wrong_recipient);
}

TEST_CASE("recognition ignores the payload") {
  Fixture fx;
  Rng rng(43);
  OnionSpec spec = fx.spec(rng, 3, 2);
  OnionSpec other = fx.spec(rng, 3, 2);
  auto all = form_all_layers(spec, fx.params);
  Bytes mask(fx.params.payload_len, 0);
  mask[0] = 1;
  for (std::size_t i = 1; i <= 5; ++i) {
    CHECK(recognize_onion(i, all.layers[i - 1], spec, fx.params));
    CHECK(recognize_onion(i, tag_payload(all.layers[i - 1], mask), spec, fx.params));
    CHECK_FALSE(recognize_onion(i, all.layers[i - 1], other, fx.params));
  }
  CHECK_FALSE(recognize_onion(0, all.layers[0], spec, fx.params));
  CHECK_FALSE(recognize_onion(6, all.layers[0], spec, fx.params));
}

TEST_CASE("serialized width is constant") {
  Fixture fx;
  Rng rng(44);
  std::set<std::size_t> widths;
  for (std::size_t n = 1; n <= 5; ++n) {
    for (std::size_t nr = 0; nr <= 5; ++nr) {
      auto all = form_all_layers(fx.spec(rng, n, nr), fx.params);
      for (const auto& o : all.layers) widths.insert(serialize_onion(o).size());
    }
  }
  CHECK(widths.size() == 1);
  CHECK(*widths.begin() == fx.params.onion_len());
}

TEST_CASE("wire round trip") {
  Fixture fx;
  Rng rng(45);
  Onion o = form_onion(1, fx.spec(rng, 2, 2), fx.params);
  CHECK(parse_onion(fx.params, serialize_onion(o)) == o);
  CHECK_THROWS_AS(parse_onion(fx.params, Bytes(10, 0)), DecodeError);
}

TEST_CASE("onion spec validation") {
  Fixture fx;
  Rng rng(46);
  OnionSpec s = fx.spec(rng, 2, 1);
  OnionSpec empty = s;
  empty.forward.clear();
  CHECK_THROWS_AS(form_onion(1, empty, fx.params), ArgumentError);
  OnionSpec cyc = s;
  cyc.forward.push_back(cyc.forward[0]);
  CHECK_THROWS_AS(form_onion(1, cyc, fx.params), ArgumentError);
  OnionSpec longp = fx.spec(rng, 5, 0);
  longp.forward.push_back(fx.hop("R12") );
  if (longp.forward.size() > 5) CHECK_THROWS_AS(form_onion(1, longp, fx.params), ArgumentError);
  CHECK_THROWS_AS(form_onion(4, s, fx.params), ArgumentError);
  CHECK_THROWS_AS(form_onion(0, s, fx.params), ArgumentError);
}

TEST_CASE("legacy zero filler exposes the path length") {
  FormatParams legacy = default_params();
  legacy.filler = Filler::legacy_zero;
  Fixture fx(legacy);
  Rng rng(47);
  const std::size_t s = legacy.hop_stride();
  for (std::size_t n : {2u, 5u}) {
    OnionSpec spec = fx.spec(rng, n, 0);
    Onion o = form_onion(n, spec, legacy);
    auto peeled = peel_header(legacy, fx.sk_for(spec, n - 1), o.header);
    REQUIRE(peeled);
    CHECK(peeled->kind == AddrKind::exit);
    ByteView tail = ByteView(peeled->routing).subspan(legacy.addr_len + legacy.kappa);
    std::size_t run = 0;
    while (run < tail.size() && tail[run] == 0) ++run;
    CHECK(run >= (legacy.max_hops - n) * s + legacy.kappa);
    CHECK(run < (legacy.max_hops - n) * s + legacy.kappa + 4);
  }
}

TEST_CASE("toy group onions still round trip") {
  FormatParams p = default_params();
  p.group = toy_group();
  Fixture fx(p);
  Rng rng(48);
  OnionSpec spec = fx.spec(rng, 1, 1);
  auto all = form_all_layers(spec, p);
  auto ex = std::get<Exited>(proc_onion(p, fx.sk_for(spec, 0), all.layers[0], "x", {}));
  CHECK(ex.message == spec.message);
  CHECK(serialize_onion(all.layers[0]).size() == p.onion_len());
}

}  // TEST_SUITE
