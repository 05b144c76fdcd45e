#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsor/events.hpp"
#include "rsor/packet.hpp"

namespace rsor {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Topology {
  std::vector<std::string> relays;
  std::vector<std::string> senders;
  std::vector<std::string> receivers;
  std::set<std::string> corrupted;

  bool is_relay(const std::string& n) const;
  bool is_sender(const std::string& n) const;
  bool is_receiver(const std::string& n) const;
  bool is_corrupted(const std::string& n) const { return corrupted.contains(n); }
  /// Links touching a corrupted party or a receiver are visible and
  /// modifiable by the adversary; the rest are secure channels.
  bool adversary_link(const std::string& src, const std::string& dst) const;
};

enum class ExitPolicy { explicit_path, uniform, receiver_hash };
enum class SenderReaction { silent, visible };

std::string_view to_string(ExitPolicy p);

struct Flow {
  std::string sender;
  std::string receiver;
  Bytes message;
  /// Empty: chosen from the topology according to the exit policy.
  std::vector<std::string> path;
  std::size_t path_len = 3;
  /// Empty with repliable set: chosen at random, ending at the sender.
  std::vector<std::string> reply_path;
  bool repliable = false;
  std::optional<Bytes> reply_message;
  std::uint64_t round = 0;
  std::string session;
};

enum class RuleKind { observe, drop, tag, delay, swap_rid, impersonate_edge, inject };

std::string_view to_string(RuleKind k);

/// Addresses packets by what the adversary sees on a link: its endpoints,
/// the round, and the packet's position among that link's packets in the
/// round.
struct Selector {
  std::optional<std::string> src;
  std::optional<std::string> dst;
  std::optional<std::uint64_t> round;
  std::optional<std::size_t> index;
};

struct Rule {
  RuleKind kind = RuleKind::observe;
  Selector sel;
  /// tag: XORed into the start of the payload.
  Bytes mask{0x01};
  /// delay: extra rounds; inject: rounds until the copy is delivered.
  std::uint64_t rounds = 1;
  /// impersonate_edge: claimed source. inject: destination of the copy.
  std::string as;
};

struct Expectation {
  std::string kind;
  std::string actor;
  /// nullopt: at least one.
  std::optional<std::size_t> count;
};

struct Scenario {
  std::string name;
  Topology topology;
  std::vector<Flow> flows;
  std::vector<Rule> rules;
  ExitPolicy exit_policy = ExitPolicy::explicit_path;
  SenderReaction sender_reaction = SenderReaction::silent;
  bool legacy_zero_padding = false;
  bool legacy_nymserver = false;
  std::uint64_t max_rounds = 64;
  std::vector<Expectation> expect;
};

/// Parses the key = value scenario format. Throws ConfigError.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);

std::vector<std::string> builtin_scenario_names();
std::optional<Scenario> builtin_scenario(std::string_view name);

/// Fills in every chosen path so the flows are fully explicit.
std::vector<Flow> resolve_flows(const Scenario& s, std::uint64_t seed);

/// Keys for every party of the topology.
std::map<std::string, KemKeyPair> scenario_keys(const Scenario& s, const FormatParams& p,
                                                std::uint64_t seed);

FormatParams scenario_params(const Scenario& s);

struct RunResult {
  EventLog log;
  bool assertions_hold = true;
  std::vector<std::string> failed;
};

/// Deterministic in (scenario, seed).
RunResult run_scenario(const Scenario& s, std::uint64_t seed);

bool check_expectation(const EventLog& log, const Expectation& e);

struct UsageViolation {
  int condition;
  std::string detail;
};

std::vector<UsageViolation> check_usage_conditions(const Scenario& s);

struct TaggingOutcome {
  bool tagging = false;
  std::string target_sender;
  std::string true_exit;
  std::string named_exit;
  bool linked = false;
  bool tagged_message_delivered = false;
  EventLog trace;
};

TaggingOutcome scenario_tagging_linkage(std::uint64_t seed, bool tagging = true);

enum class NymChoice { oracle, guess };

struct NymserverOutcome {
  bool legacy = false;
  /// False when the flow has no pseudonym lookup for the attack to use.
  bool expressible = false;
  bool attack_succeeds = false;
  EventLog trace;
};

NymserverOutcome scenario_nymserver_attack(std::uint64_t seed, bool legacy,
                                           NymChoice choice = NymChoice::oracle);

struct PaddingOutcome {
  std::size_t true_len = 0;
  std::size_t guessed_len = 0;
  bool path_length_recovered = false;
};

PaddingOutcome scenario_zero_padding_leak(std::uint64_t seed, bool legacy);

/// Length of the zero run following the exit's address and identifier in
/// the decrypted routing area, and the path length it suggests.
std::size_t exit_zero_run(const FormatParams& p, const Peeled& at_exit);
std::size_t guess_path_length(const FormatParams& p, std::size_t zero_run);

}  // namespace rsor
