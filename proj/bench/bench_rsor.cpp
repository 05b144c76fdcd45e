#include <benchmark/benchmark.h>

#include <map>

#include "rsor/batch.hpp"
#include "rsor/games.hpp"
#include "rsor/packet.hpp"

using namespace rsor;

namespace {

struct Setup {
  FormatParams p = default_params();
  std::vector<KemKeyPair> keys;
  OnionSpec spec;

  explicit Setup(std::size_t n) {
    Rng rng(1);
    for (std::size_t k = 0; k <= n; ++k) keys.push_back(kem_keygen(*p.group, rng));
    spec.seed = rng.seed32();
    spec.message = rng.bytes(256);
    spec.receiver = "bob";
    for (std::size_t k = 0; k < n; ++k) spec.forward.push_back(Hop{"R" + std::to_string(k), keys[k].pk});
    spec.reply.push_back(Hop{"S", keys[n].pk});
  }
};

void BM_FormOnion(benchmark::State& state) {
  Setup s(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(form_onion(1, s.spec, s.p));
}
BENCHMARK(BM_FormOnion)->DenseRange(1, 5);

void BM_ProcOnion(benchmark::State& state) {
  Setup s(3);
  const Onion o = form_onion(1, s.spec, s.p);
  ProcContext ctx;
  ctx.replay_check = [](ByteView) { return false; };
  for (auto _ : state) benchmark::DoNotOptimize(proc_onion(s.p, s.keys[0].sk, o, "R0", ctx));
}
BENCHMARK(BM_ProcOnion);

void BM_FormReply(benchmark::State& state) {
  Setup s(1);
  const Onion o = form_onion(1, s.spec, s.p);
  const Bytes m(64, 1);
  for (auto _ : state) benchmark::DoNotOptimize(form_reply(s.p, m, o, "R0", s.keys[0].sk));
}
BENCHMARK(BM_FormReply);

void BM_GameBatch(benchmark::State& state) {
  const bool parallel = state.range(0) != 0;
  GameConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_game_batch(GameKind::tlu, "structural", 64, 1, cfg, parallel));
  }
  state.SetLabel(parallel ? "parallel" : "serial");
}
BENCHMARK(BM_GameBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
