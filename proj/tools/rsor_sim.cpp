#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "rsor/games.hpp"
#include "rsor/sim.hpp"
#include "rsor/vectors.hpp"

using namespace rsor;

namespace {

void write_trace(const std::string& path, const EventLog& log) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << log.jsonl();
}

int cmd_run(const std::string& name, std::uint64_t seed, bool legacy_padding, bool legacy_nym,
            const std::string& out_path) {
  if (name == "nymserver") {
    const auto o = scenario_nymserver_attack(seed, legacy_nym);
    write_trace(out_path, o.trace);
    std::printf("nymserver legacy=%d expressible=%d attack_succeeds=%d\n", o.legacy, o.expressible,
                o.attack_succeeds);
    return o.attack_succeeds == legacy_nym ? 0 : 1;
  }
  if (name == "tagging") {
    const auto o = scenario_tagging_linkage(seed);
    write_trace(out_path, o.trace);
    std::printf("tagging target=%s exit=%s named=%s linked=%d delivered=%d\n", o.target_sender.c_str(),
                o.true_exit.c_str(), o.named_exit.c_str(), o.linked, o.tagged_message_delivered);
    return o.linked && !o.tagged_message_delivered ? 0 : 1;
  }
  Scenario s;
  if (auto b = builtin_scenario(name)) {
    s = *b;
  } else {
    s = load_scenario(name);
  }
  if (legacy_padding) s.legacy_zero_padding = true;
  if (legacy_nym) s.legacy_nymserver = true;
  for (const auto& v : check_usage_conditions(s)) {
    std::fprintf(stderr, "usage condition %d violated: %s\n", v.condition, v.detail.c_str());
  }
  const RunResult r = run_scenario(s, seed);
  write_trace(out_path, r.log);
  std::printf("scenario %s seed=%llu events=%zu\n", s.name.c_str(), static_cast<unsigned long long>(seed),
              r.log.events().size());
  for (const auto& f : r.failed) std::printf("assertion failed: %s\n", f.c_str());
  std::printf("%s\n", r.assertions_hold ? "assertions hold" : "assertions FAILED");
  return r.assertions_hold ? 0 : 1;
}

void row(const char* label, std::size_t wins, std::size_t trials) {
  const auto s = binomial_summary(wins, trials);
  std::printf("%-28s %6zu/%-6zu %7.3f   [%.3f, %.3f]\n", label, wins, trials, s.rate, s.ci_low, s.ci_high);
}

int cmd_attack(const std::string& which, std::size_t trials, std::uint64_t seed) {
  std::printf("%-28s %13s %7s   %s\n", "variant", "hits/trials", "rate", "99% CI");
  if (which == "tagging") {
    std::size_t linked = 0, delivered = 0, base = 0;
    for (std::size_t i = 0; i < trials; ++i) {
      const auto t = scenario_tagging_linkage(seed + i, true);
      linked += t.linked;
      delivered += t.tagged_message_delivered;
      base += scenario_tagging_linkage(seed + i, false).linked;
    }
    row("tagging: linked", linked, trials);
    row("tagging: tagged delivered", delivered, trials);
    row("baseline: linked", base, trials);
    return 0;
  }
  if (which == "nymserver") {
    std::size_t oracle = 0, guess = 0, adapted = 0, expressible = 0;
    for (std::size_t i = 0; i < trials; ++i) {
      oracle += scenario_nymserver_attack(seed + i, true, NymChoice::oracle).attack_succeeds;
      guess += scenario_nymserver_attack(seed + i, true, NymChoice::guess).attack_succeeds;
      const auto a = scenario_nymserver_attack(seed + i, false);
      adapted += a.attack_succeeds;
      expressible += a.expressible;
    }
    row("legacy: oracle choice", oracle, trials);
    row("legacy: guessed choice", guess, trials);
    row("adapted: succeeds", adapted, trials);
    row("adapted: expressible", expressible, trials);
    return 0;
  }
  if (which == "padding") {
    std::size_t legacy = 0, fixed = 0;
    for (std::size_t i = 0; i < trials; ++i) {
      legacy += scenario_zero_padding_leak(seed + i, true).path_length_recovered;
      fixed += scenario_zero_padding_leak(seed + i, false).path_length_recovered;
    }
    row("legacy zero padding", legacy, trials);
    row("random padding", fixed, trials);
    return 0;
  }
  throw CLI::ValidationError("attack", "unknown attack " + which);
}

int cmd_game(const std::string& which, const std::string& adversary, std::size_t games, std::uint64_t seed,
             bool legacy) {
  if (which == "correctness") {
    CorrectnessConfig cfg;
    cfg.seed = seed;
    if (legacy) cfg.params.filler = Filler::legacy_zero;
    if (games > 0) cfg.per_cell = games;
    const auto r = game_correctness(cfg);
    std::printf("specs=%zu forward=%zu request=%zu backward=%zu reply=%zu dual_mismatches=%zu widths=%zu\n",
                r.specs, r.forward_path_failures, r.request_failures, r.backward_path_failures,
                r.reply_failures, r.dual_mismatches, r.widths.size());
    const bool ok = r.passed() && r.dual_mismatches == 0 && r.widths.size() == 1;
    std::printf("%s\n", ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
  }
  const auto kind = game_kind_from(which);
  if (!kind) throw CLI::ValidationError("game", "unknown game " + which);
  GameConfig cfg;
  if (legacy) cfg.params.filler = Filler::legacy_zero;
  const auto b = run_game_batch(*kind, adversary, games, seed, cfg);
  const char* expect = b.expectation.type == WinExpectation::Type::chance ? "chance (0.5, two-sided 0.01)"
                                                                          : "at least";
  std::printf("game=%s adversary=%s games=%zu rejected=%zu\n", which.c_str(), adversary.c_str(), b.games,
              b.rejected);
  std::printf("win rate %.4f  99%% CI [%.4f, %.4f]  p(0.5)=%.4g\n", b.stats.rate, b.stats.ci_low,
              b.stats.ci_high, b.stats.p_value);
  if (b.expectation.type == WinExpectation::Type::chance) {
    std::printf("expectation: %s\n", expect);
  } else {
    std::printf("expectation: %s %.2f\n", expect, b.expectation.threshold);
  }
  std::printf("%s\n", b.passed ? "PASS" : "FAIL");
  return b.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Repliable service onion routing simulator"};
  app.require_subcommand(1);

  std::string scenario, out_path;
  std::uint64_t seed = 1;
  bool legacy_padding = false, legacy_nym = false;
  auto* run = app.add_subcommand("run", "Run a scenario and write its trace");
  run->add_option("--scenario", scenario, "builtin name or config file")->required();
  run->add_option("--seed", seed);
  run->add_flag("--legacy-zero-padding", legacy_padding);
  run->add_flag("--legacy-nymserver", legacy_nym);
  run->add_option("--out", out_path, "JSON-lines trace");

  std::string attack;
  std::size_t trials = 100;
  auto* att = app.add_subcommand("attack", "Repeat an attack scenario and summarise");
  att->add_option("attack", attack)->required()->check(CLI::IsMember({"tagging", "nymserver", "padding"}));
  att->add_option("--trials", trials);
  att->add_option("--seed", seed);

  std::string game, adversary = "guessing";
  std::size_t games = 1000;
  bool game_legacy = false;
  auto* gm = app.add_subcommand("game", "Play a security game batch");
  gm->add_option("game", game)->required()->check(CLI::IsMember({"correctness", "tlu", "slu", "sti"}));
  gm->add_option("--adversary", adversary);
  gm->add_option("--games", games, "games, or specs per cell for correctness");
  gm->add_option("--seed", seed);
  gm->add_flag("--legacy-zero-padding", game_legacy);

  bool vec_legacy = false;
  auto* vec = app.add_subcommand("vectors", "Print fixed-seed onion test vectors");
  vec->add_flag("--legacy-zero-padding", vec_legacy);

  auto* list = app.add_subcommand("list", "List builtin scenarios and adversaries");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(scenario, seed, legacy_padding, legacy_nym, out_path);
    if (*att) return cmd_attack(attack, trials, seed);
    if (*gm) {
      if (!gm->count("--games") && game == "correctness") games = 50;
      return cmd_game(game, adversary, games, seed, game_legacy);
    }
    if (*vec) {
      std::cout << make_test_vectors(vec_legacy ? Filler::legacy_zero : Filler::random).dump(2) << "\n";
      return 0;
    }
    if (*list) {
      std::printf("scenarios:");
      for (const auto& n : builtin_scenario_names()) std::printf(" %s", n.c_str());
      std::printf(" nymserver tagging\n");
      for (auto k : {GameKind::tlu, GameKind::slu, GameKind::sti}) {
        std::printf("%s adversaries:", std::string(to_string(k)).c_str());
        for (const auto& n : game_adversary_names(k)) std::printf(" %s", n.c_str());
        std::printf("\n");
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
