#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rsor/packet.hpp"
#include "rsor/rng.hpp"
#include "rsor/stats.hpp"

namespace rsor {

// ---------------------------------------------------------------------------
// Correctness

struct CorrectnessConfig {
  FormatParams params = default_params();
  std::size_t per_cell = 50;
  std::size_t min_hops = 1;
  std::size_t max_hops = 5;
  std::size_t min_reply_hops = 0;
  std::size_t max_reply_hops = 5;
  std::uint64_t seed = 1;
  /// Builds every onion with a wrong public key for hop 2.
  bool wrong_key_at_hop2 = false;
};

struct CorrectnessReport {
  std::size_t specs = 0;
  std::size_t forward_path_failures = 0;
  std::size_t request_failures = 0;
  std::size_t backward_path_failures = 0;
  std::size_t reply_failures = 0;
  /// form_onion(i + 1) differing from processing layer i.
  std::size_t dual_mismatches = 0;
  std::size_t layers_checked = 0;
  /// Every distinct serialized onion width seen.
  std::vector<std::size_t> widths;

  bool passed() const {
    return forward_path_failures + request_failures + backward_path_failures + reply_failures == 0;
  }
};

/// Runs per_cell random specs for every (n, n_reply) in the configured
/// ranges and checks the four correctness clauses.
CorrectnessReport game_correctness(const CorrectnessConfig& cfg);

// ---------------------------------------------------------------------------
// Indistinguishability games

enum class GameKind { tlu, slu, sti };

std::string_view to_string(GameKind k);
std::optional<GameKind> game_kind_from(std::string_view name);

struct GameSetup {
  GameKind kind = GameKind::tlu;
  FormatParams params;
  std::string p_h;
  std::string p_s;
  /// Only in STI.
  std::string p_h_back;
  GroupElement pk_h;
  GroupElement pk_s;
  GroupElement pk_h_back;
};

/// What a processing oracle hands back. Exit results carry only (m, R).
struct OracleOutput {
  enum class Kind { forward, exit, reply } kind = Kind::forward;
  Onion onion;
  std::string next;
  Bytes message;
  std::string receiver;
};

class GameOracles {
 public:
  virtual ~GameOracles() = default;
  /// nullopt when processing fails, the header was seen before, or the
  /// challenger outputs nothing.
  virtual std::optional<OracleOutput> proc(const std::string& party, const Onion& onion) = 0;
  virtual std::optional<std::pair<Onion, std::string>> reply(const std::string& party,
                                                             const Onion& onion, ByteView m) = 0;
};

struct ChallengeSubmission {
  Bytes message;
  std::string receiver;
  /// TLU: 1..n. STI: 0..n-1. Unused in SLU.
  std::size_t j = 0;
  /// SLU: 0..n_reply-1. STI: 1..n_reply-1. Unused in TLU.
  std::size_t j_back = 0;
  std::vector<Hop> path;
  std::vector<Hop> reply_path;
};

struct ChallengeOnion {
  Onion onion;
  std::string to;
};

/// Move protocol: setup (with oracle access), submission, challenge (with
/// oracle access), guess.
class GameAdversary {
 public:
  virtual ~GameAdversary() = default;
  virtual void setup(const GameSetup& setup, GameOracles& oracles) = 0;
  virtual ChallengeSubmission submit() = 0;
  virtual void on_challenge(const ChallengeOnion& challenge, GameOracles& oracles) = 0;
  virtual bool guess() = 0;
};

struct GameConfig {
  FormatParams params = default_params();
  std::optional<bool> forced_bit;
};

struct GameResult {
  bool rejected = false;
  bool bit = false;
  bool guess = false;
  bool won = false;
  /// (move, bytes handed to the adversary) in order.
  std::vector<std::pair<std::string, std::size_t>> transcript;
};

GameResult game_tlu_forward(GameAdversary& adv, const GameConfig& cfg, Rng& rng);
GameResult game_slu_backward(GameAdversary& adv, const GameConfig& cfg, Rng& rng);
GameResult game_sti_tail(GameAdversary& adv, const GameConfig& cfg, Rng& rng);
GameResult run_game(GameKind kind, GameAdversary& adv, const GameConfig& cfg, Rng& rng);

/// guessing, structural, tag-consistency (TLU), path-length (TLU, STI),
/// direction-structure (SLU).
std::vector<std::string> game_adversary_names(GameKind kind);
std::unique_ptr<GameAdversary> make_game_adversary(std::string_view name, GameKind kind, Rng rng);

struct WinExpectation {
  enum class Type { chance, at_least } type = Type::chance;
  double threshold = 0.5;
};

WinExpectation registered_expectation(GameKind kind, std::string_view adversary, bool legacy_padding);

struct GameBatch {
  std::size_t games = 0;
  std::size_t wins = 0;
  std::size_t rejected = 0;
  BinomialSummary stats;
  WinExpectation expectation;
  bool passed = false;
};

GameBatch run_game_batch(GameKind kind, std::string_view adversary, std::size_t games,
                         std::uint64_t seed, const GameConfig& cfg, bool parallel = true);

}  // namespace rsor
