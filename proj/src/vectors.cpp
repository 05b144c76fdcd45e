#include "rsor/vectors.hpp"

#include <map>

namespace rsor {

nlohmann::ordered_json make_test_vectors(Filler filler) {
  FormatParams p = default_params();
  p.filler = filler;
  nlohmann::ordered_json out;
  out["group"] = p.group->params().id;
  out["filler"] = filler == Filler::random ? "random" : "legacy_zero";
  out["kappa"] = p.kappa;
  out["max_hops"] = p.max_hops;
  out["addr_len"] = p.addr_len;
  out["payload_len"] = p.payload_len;
  out["onion_len"] = p.onion_len();

  const std::vector<std::string> forward{"R1", "R2", "R3"};
  const std::vector<std::string> reply{"R4", "S"};
  std::map<std::string, KemKeyPair> keys;
  Rng key_rng = Rng(2024).fork("vector-keys");
  for (const auto* names : {&forward, &reply}) {
    for (const auto& name : *names) {
      keys[name] = kem_keygen(*p.group, key_rng);
      out["keys"][name] = {{"sk", to_hex(keys[name].sk.view())}, {"pk", to_hex(keys[name].pk.view())}};
    }
  }

  OnionSpec spec;
  Rng spec_rng = Rng(2024).fork("vector-spec");
  spec.seed = spec_rng.seed32();
  spec.message = to_bytes("attack at dawn");
  spec.receiver = "bob";
  for (const auto& n : forward) spec.forward.push_back(Hop{n, keys[n].pk});
  for (const auto& n : reply) spec.reply.push_back(Hop{n, keys[n].pk});
  out["seed"] = to_hex(ByteView(spec.seed.data(), spec.seed.size()));
  out["message"] = to_hex(spec.message);
  out["receiver"] = spec.receiver;

  for (std::size_t i = 1; i <= forward.size(); ++i) {
    out["forward_layers"].push_back(to_hex(serialize_onion(form_onion(i, spec, p))));
  }
  ProcContext ctx;
  ctx.replay_check = [](ByteView) { return false; };
  Onion o = form_onion(1, spec, p);
  for (std::size_t i = 0; i + 1 < forward.size(); ++i) {
    ProcResult r = proc_onion(p, keys[forward[i]].sk, o, forward[i], ctx);
    o = std::get<Forwarded>(r).onion;
  }
  const Bytes m_reply = to_bytes("ack");
  auto back = form_reply(p, m_reply, o, forward.back(), keys[forward.back()].sk);
  out["reply_message"] = to_hex(m_reply);
  out["reply_first_hop"] = back->second;
  out["reply_onion"] = to_hex(serialize_onion(back->first));
  ProcResult r1 = proc_onion(p, keys["R4"].sk, back->first, "R4", ctx);
  out["reply_at_sender"] = to_hex(serialize_onion(std::get<Forwarded>(r1).onion));
  return out;
}

}  // namespace rsor
