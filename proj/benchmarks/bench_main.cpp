#include <benchmark/benchmark.h>

#include "fobn/capture.hpp"
#include "fobn/codec.hpp"
#include "fobn/ground.hpp"
#include "fobn/infer.hpp"
#include "fobn/spec.hpp"

namespace {

const char* kFriends =
    "root fan/1 = 1/5.\n"
    "define friends(x, y) <=> (x = y) | (fan(x) & fan(y)) | other(x, y).\n"
    "root other/2 = 1/10.\n";

const char* kCoinOr =
    "state q0 initial\nstate q1\nstate qa accept\nstate qr reject\n"
    "trans q0, 0 -> q1, 0, S\ntrans q0, 0 -> qa, 0, S\n"
    "trans q0, 1 -> q1, 1, S\ntrans q0, 1 -> qa, 1, S\n"
    "trans q0, _ -> q1, _, S\ntrans q0, _ -> qa, _, S\n"
    "trans q1, 0 -> qr, 0, S\ntrans q1, 0 -> qa, 0, S\n"
    "trans q1, 1 -> qr, 1, S\ntrans q1, 1 -> qa, 1, S\n"
    "trans q1, _ -> qr, _, S\ntrans q1, _ -> qa, _, S\n"
    "bounds kt=1 kp=auto\n";

void BM_GroundFriends(benchmark::State& state) {
  fobn::NetworkSpec spec = fobn::parse_spec(kFriends);
  int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    fobn::GroundedNetwork net = fobn::ground(spec, fobn::Domain(n));
    benchmark::DoNotOptimize(net.stats().edges);
  }
}
BENCHMARK(BM_GroundFriends)->DenseRange(3, 9, 2);

void BM_FriendsPairQuery(benchmark::State& state) {
  fobn::NetworkSpec spec = fobn::parse_spec(kFriends);
  int n = static_cast<int>(state.range(0));
  fobn::GroundedNetwork net = fobn::ground(spec, fobn::Domain(n));
  fobn::EventSpec event;
  event.require(net.atom_id(1, {0, 1}), true);
  for (auto _ : state) {
    fobn::Rational p = fobn::event_probability(net, event);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_FriendsPairQuery)->DenseRange(3, 9, 2);

void BM_CountPaths(benchmark::State& state) {
  fobn::NTMachine m =
      fobn::normalize_machine(fobn::parse_machine(kCoinOr));
  int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    fobn::PathCount pc = fobn::count_paths(m, n, "001");
    benchmark::DoNotOptimize(pc.accepting);
  }
}
BENCHMARK(BM_CountPaths)->DenseRange(4, 16, 4);

void BM_PairCodecRoundTrip(benchmark::State& state) {
  fobn::Vocabulary v;
  v.add({"p", 1});
  v.add({"q", 2});
  int n = static_cast<int>(state.range(0));
  fobn::EvidencePiece e(v, fobn::Domain(n));
  for (std::uint64_t r = 0; r < e.groundings(1); ++r)
    e.set(1, r, static_cast<fobn::Tristate>(r % 3));
  for (auto _ : state) {
    fobn::BitString bits = fobn::encode_pair(e);
    benchmark::DoNotOptimize(fobn::decode_pair(bits, v));
  }
}
BENCHMARK(BM_PairCodecRoundTrip)->DenseRange(2, 8, 2);

void BM_CompileAndGroundMachine(benchmark::State& state) {
  fobn::NTMachine m =
      fobn::normalize_machine(fobn::parse_machine(kCoinOr));
  fobn::Vocabulary sigma;
  sigma.add({"mark", 1});
  for (auto _ : state) {
    fobn::CompiledCapture compiled = fobn::compile_machine(m, sigma, 2);
    fobn::GroundedNetwork net =
        fobn::ground(compiled.spec, fobn::Domain(2));
    benchmark::DoNotOptimize(net.pool().size());
  }
}
BENCHMARK(BM_CompileAndGroundMachine);

void BM_StructuredConditional(benchmark::State& state) {
  fobn::NTMachine m =
      fobn::normalize_machine(fobn::parse_machine(kCoinOr));
  fobn::Vocabulary sigma;
  sigma.add({"mark", 1});
  fobn::CompiledCapture compiled = fobn::compile_machine(m, sigma, 2);
  int n = static_cast<int>(state.range(0));
  fobn::EvidencePiece empty(sigma, fobn::Domain(n));
  for (auto _ : state) {
    auto p = fobn::structured_conditional(compiled, fobn::Domain(n), empty);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_StructuredConditional)->DenseRange(1, 4, 1);

} // namespace

BENCHMARK_MAIN();
