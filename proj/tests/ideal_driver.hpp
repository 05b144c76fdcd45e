#pragma once

#include <deque>
#include <map>

#include "rsor/ideal.hpp"
#include "rsor/sim.hpp"

namespace testing_support {

using namespace rsor;

/// Plays both the adversary (delivering everything honestly) and the
/// environment (forwarding every tid, replying as the workload says) against
/// F_RSOR for a fully honest scenario.
inline std::vector<Event> drive_ideal(const Scenario& s, std::uint64_t seed) {
  IdealFunctionality f({}, default_params().max_hops, Rng(seed).fork("ideal"));
  std::map<std::pair<std::string, std::string>, std::deque<Bytes>> wants;
  for (const auto& flow : resolve_flows(s, seed)) {
    if (flow.reply_message) wants[{flow.receiver, to_hex(flow.message)}].push_back(*flow.reply_message);
    f.process_new_onion(Role::environment, flow.sender, flow.receiver, flow.message, flow.path,
                        flow.reply_path);
  }
  std::optional<std::string> pending_rid;
  const Event* last_delivered = nullptr;
  for (std::size_t cur = 0; cur < f.outputs().size(); ++cur) {
    const Event e = f.outputs()[cur];
    const ojson& x = e.fields;
    if (e.vis == Visibility::adversary) {
      if (e.kind == "reply-rid") {
        pending_rid = x["rid"].get<std::string>();
      } else if (e.kind == "leak-message") {
        f.deliver_message(Role::adversary, x["from"], from_hex(x["message"].get<std::string>()),
                          pending_rid, x["receiver"]);
        pending_rid.reset();
      } else if (e.kind == "hop") {
        f.deliver_onion(Role::adversary, x["tid"]);
      } else if (e.kind == "reply-request") {
        f.deliver_reply(Role::adversary, x["from"], x["via"],
                        from_hex(x["message"].get<std::string>()), x["rid"]);
      }
      continue;
    }
    const std::string party = x["party"];
    if (e.kind == "onion-received" || e.kind == "reply-onion-ready") {
      f.forward_onion(Role::environment, party, x["tid"]);
    } else if (e.kind == "message-delivered") {
      last_delivered = &f.outputs()[cur];
    } else if (e.kind == "message-repliable" && last_delivered) {
      const std::string from = last_delivered->fields["from"];
      const std::string msg = last_delivered->fields["message"];
      auto it = wants.find({party, msg});
      if (it != wants.end() && !it->second.empty()) {
        Bytes reply = it->second.front();
        it->second.pop_front();
        f.initiate_reply(Role::environment, party, from, reply, x["rid"]);
      }
    }
  }
  return f.outputs();
}

/// A random honest-only scenario.
inline Scenario honest_scenario(std::uint64_t seed) {
  Rng rng = Rng(seed).fork("honest-scenario");
  Scenario s;
  s.name = "honest-" + std::to_string(seed);
  s.exit_policy = ExitPolicy::uniform;
  const std::size_t relays = 6 + rng.uniform(6);
  for (std::size_t k = 1; k <= relays; ++k) s.topology.relays.push_back("R" + std::to_string(k));
  const std::size_t senders = 1 + rng.uniform(3);
  for (std::size_t k = 1; k <= senders; ++k) s.topology.senders.push_back("S" + std::to_string(k));
  const std::size_t receivers = 1 + rng.uniform(3);
  for (std::size_t k = 1; k <= receivers; ++k) s.topology.receivers.push_back("D" + std::to_string(k));
  const std::size_t flows = 1 + rng.uniform(5);
  for (std::size_t k = 0; k < flows; ++k) {
    Flow fl;
    fl.sender = s.topology.senders[rng.uniform(senders)];
    fl.receiver = s.topology.receivers[rng.uniform(receivers)];
    fl.message = to_bytes("m" + std::to_string(k));
    fl.path_len = 1 + rng.uniform(5);
    fl.repliable = rng.uniform(3) != 0;
    if (fl.repliable && rng.coin()) fl.reply_message = to_bytes("r" + std::to_string(k));
    fl.round = rng.uniform(3);
    s.flows.push_back(fl);
  }
  return s;
}

}  // namespace testing_support
