#include <fstream>
#include <sstream>

#include "rsor/sim.hpp"

namespace rsor {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in{std::string(s)};
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

bool parse_bool(const std::string& v, std::size_t line) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError("line " + std::to_string(line) + ": expected a boolean, got '" + v + "'");
}

std::uint64_t parse_u64(const std::string& v, std::size_t line) {
  try {
    std::size_t used = 0;
    const auto x = std::stoull(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("line " + std::to_string(line) + ": expected a number, got '" + v + "'");
}

Bytes parse_hex(const std::string& v, std::size_t line) {
  try {
    return from_hex(v);
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line) + ": bad hex '" + v + "'");
  }
}

/// "k=v k=v ..." after an optional leading bare word.
std::map<std::string, std::string> pairs(const std::string& text, std::string* head,
                                         std::size_t line) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string tok;
  bool first = true;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) {
      if (first && head) {
        *head = tok;
        first = false;
        continue;
      }
      throw ConfigError("line " + std::to_string(line) + ": expected key=value, got '" + tok + "'");
    }
    first = false;
    out[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return out;
}

Flow parse_flow(const std::string& text, std::size_t line) {
  Flow f;
  for (const auto& [k, v] : pairs(text, nullptr, line)) {
    if (k == "sender") {
      f.sender = v;
    } else if (k == "receiver") {
      f.receiver = v;
    } else if (k == "path") {
      f.path = split(v, ',');
    } else if (k == "path_len") {
      f.path_len = parse_u64(v, line);
    } else if (k == "reply") {
      f.reply_path = split(v, ',');
      f.repliable = true;
    } else if (k == "repliable") {
      f.repliable = parse_bool(v, line);
    } else if (k == "message") {
      f.message = to_bytes(v);
    } else if (k == "message_hex") {
      f.message = parse_hex(v, line);
    } else if (k == "reply_message") {
      f.reply_message = to_bytes(v);
    } else if (k == "round") {
      f.round = parse_u64(v, line);
    } else if (k == "session") {
      f.session = v;
    } else {
      throw ConfigError("line " + std::to_string(line) + ": unknown flow key '" + k + "'");
    }
  }
  if (f.sender.empty() || f.receiver.empty()) {
    throw ConfigError("line " + std::to_string(line) + ": flow needs sender and receiver");
  }
  return f;
}

Rule parse_rule(const std::string& text, std::size_t line) {
  std::string head;
  auto kv = pairs(text, &head, line);
  Rule r;
  static const std::map<std::string, RuleKind> kinds{
      {"observe", RuleKind::observe},   {"drop", RuleKind::drop},
      {"tag", RuleKind::tag},           {"delay", RuleKind::delay},
      {"swap-rid", RuleKind::swap_rid}, {"impersonate-edge", RuleKind::impersonate_edge},
      {"inject", RuleKind::inject}};
  auto it = kinds.find(head);
  if (it == kinds.end()) throw ConfigError("line " + std::to_string(line) + ": unknown rule '" + head + "'");
  r.kind = it->second;
  for (const auto& [k, v] : kv) {
    if (k == "src") {
      r.sel.src = v;
    } else if (k == "dst") {
      r.sel.dst = v;
    } else if (k == "round") {
      r.sel.round = parse_u64(v, line);
    } else if (k == "index") {
      r.sel.index = parse_u64(v, line);
    } else if (k == "mask") {
      r.mask = parse_hex(v, line);
      if (r.mask.empty()) throw ConfigError("line " + std::to_string(line) + ": empty mask");
    } else if (k == "rounds") {
      r.rounds = parse_u64(v, line);
    } else if (k == "as" || k == "to") {
      r.as = v;
    } else {
      throw ConfigError("line " + std::to_string(line) + ": unknown rule key '" + k + "'");
    }
  }
  return r;
}

Expectation parse_expect(const std::string& text, bool absent, std::size_t line) {
  std::string head;
  auto kv = pairs(text, &head, line);
  Expectation e;
  const auto at = head.find('@');
  e.kind = head.substr(0, at);
  if (at != std::string::npos) e.actor = head.substr(at + 1);
  if (e.kind.empty()) throw ConfigError("line " + std::to_string(line) + ": empty expectation");
  if (absent) e.count = 0;
  if (auto c = kv.find("count"); c != kv.end()) e.count = parse_u64(c->second, line);
  return e;
}

const std::map<std::string, std::string>& builtins() {
  static const std::map<std::string, std::string> table{
      {"baseline", R"(name = baseline
relays = R1,R2,R3,R4,R5,R6
senders = alice
receivers = bob
flow = sender=alice receiver=bob path=R1,R2,R3 reply=R4,R5,alice message=hello reply_message=hi
expect = message-delivered@bob count=1
expect = got-reply@alice count=1
)"},
      {"non-repliable", R"(name = non-repliable
relays = R1,R2,R3
senders = alice
receivers = bob
flow = sender=alice receiver=bob path=R1,R2,R3 message=hello
expect = message-delivered@bob count=1
expect_not = message-repliable@bob
)"},
      {"multi", R"(name = multi
relays = R1,R2,R3,R4,R5,R6,R7,R8
senders = alice,carol,dave
receivers = bob,erin
exit_policy = uniform
flow = sender=alice receiver=bob path_len=3 repliable=true message=a1 reply_message=r1
flow = sender=carol receiver=bob path_len=2 message=c1
flow = sender=dave receiver=erin path_len=4 repliable=true message=d1 reply_message=r2 round=1
flow = sender=alice receiver=erin path_len=1 repliable=true message=a2 reply_message=r3 round=2
expect = got-reply@alice count=2
expect = got-reply@dave count=1
)"},
      {"tagged-forward", R"(name = tagged-forward
relays = R1,R2,R3
corrupted = R1
senders = alice
receivers = bob
flow = sender=alice receiver=bob path=R1,R2,R3 message=hello
rule = tag src=alice dst=R1 round=0 mask=01
expect = integrity-fail@R3 count=1
expect_not = message-delivered@bob
)"},
      {"tagged-reply", R"(name = tagged-reply
relays = R1,R2,R3,R4,R5
corrupted = R5
senders = alice
receivers = bob
flow = sender=alice receiver=bob path=R1,R2,R3 reply=R4,R5,alice message=hello reply_message=hi
rule = tag src=R5 dst=alice mask=01
expect = message-delivered@bob count=1
expect_not = got-reply@alice
)"},
      {"replay", R"(name = replay
relays = R1,R2,R3
corrupted = R1
senders = alice
receivers = bob
flow = sender=alice receiver=bob path=R1,R2,R3 message=hello
rule = inject src=R1 dst=R2 rounds=2
expect = message-delivered@bob count=1
expect = onion-received@R2 count=1
)"},
      {"legacy-padding", R"(name = legacy-padding
relays = R1,R2,R3
senders = alice
receivers = bob
legacy_zero_padding = true
flow = sender=alice receiver=bob path=R1,R2,R3 reply=R1,alice message=hello reply_message=hi
expect = got-reply@alice count=1
)"},
      {"empty", R"(name = empty
relays = R1,R2
senders = alice
receivers = bob
)"},
  };
  return table;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  Scenario s;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    std::string l = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (l.empty()) continue;
    const auto eq = l.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    const std::string key = trim(l.substr(0, eq));
    const std::string val = trim(l.substr(eq + 1));
    if (key == "name") {
      s.name = val;
    } else if (key == "relays") {
      s.topology.relays = split(val, ',');
    } else if (key == "senders") {
      s.topology.senders = split(val, ',');
    } else if (key == "receivers") {
      s.topology.receivers = split(val, ',');
    } else if (key == "corrupted") {
      for (auto& n : split(val, ',')) s.topology.corrupted.insert(n);
    } else if (key == "exit_policy") {
      if (val == "explicit") {
        s.exit_policy = ExitPolicy::explicit_path;
      } else if (val == "uniform") {
        s.exit_policy = ExitPolicy::uniform;
      } else if (val == "receiver-hash") {
        s.exit_policy = ExitPolicy::receiver_hash;
      } else {
        throw ConfigError("line " + std::to_string(line) + ": unknown exit policy '" + val + "'");
      }
    } else if (key == "sender_reaction") {
      if (val != "silent" && val != "visible") {
        throw ConfigError("line " + std::to_string(line) + ": unknown sender reaction '" + val + "'");
      }
      s.sender_reaction = val == "silent" ? SenderReaction::silent : SenderReaction::visible;
    } else if (key == "legacy_zero_padding") {
      s.legacy_zero_padding = parse_bool(val, line);
    } else if (key == "legacy_nymserver") {
      s.legacy_nymserver = parse_bool(val, line);
    } else if (key == "max_rounds") {
      s.max_rounds = parse_u64(val, line);
    } else if (key == "flow") {
      s.flows.push_back(parse_flow(val, line));
    } else if (key == "rule") {
      s.rules.push_back(parse_rule(val, line));
    } else if (key == "expect" || key == "expect_not") {
      s.expect.push_back(parse_expect(val, key == "expect_not", line));
    } else {
      throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
  }
  const auto& t = s.topology;
  for (const auto& f : s.flows) {
    if (!t.is_sender(f.sender)) throw ConfigError("unknown sender '" + f.sender + "'");
    if (!t.is_receiver(f.receiver)) throw ConfigError("unknown receiver '" + f.receiver + "'");
    for (const auto& h : f.path) {
      if (!t.is_relay(h)) throw ConfigError("unknown relay '" + h + "' in path");
    }
    for (std::size_t k = 0; k < f.reply_path.size(); ++k) {
      const auto& h = f.reply_path[k];
      const bool last = k + 1 == f.reply_path.size();
      if (last ? h != f.sender : !t.is_relay(h)) {
        throw ConfigError("reply path must be relays ending at the sender");
      }
    }
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::vector<std::string> builtin_scenario_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : builtins()) out.push_back(k);
  return out;
}

std::optional<Scenario> builtin_scenario(std::string_view name) {
  auto it = builtins().find(std::string(name));
  if (it == builtins().end()) return std::nullopt;
  return parse_scenario(it->second);
}

}  // namespace rsor
