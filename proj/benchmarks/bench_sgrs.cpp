#include "sgrs/properties.hpp"

#include <benchmark/benchmark.h>

using namespace sgrs;

namespace {

std::vector<MemberId>
members(std::uint32_t n)
{
  std::vector<MemberId> out;
  for (std::uint32_t i = 1; i <= n; i++) {
    out.emplace_back(i);
  }
  return out;
}

MembershipEvent
event(EventKind kind, std::uint32_t member)
{
  MembershipEvent e;
  e.kind = kind;
  e.group = GroupId{ 1 };
  e.members = { MemberId{ member } };
  return e;
}

void
BM_Kdf2(benchmark::State& state)
{
  SeededRng rng(1);
  const auto a = rng.next_bytes();
  const auto b = rng.next_bytes();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kdf2(KdfLabel::NonceRehash, a, b));
  }
}
BENCHMARK(BM_Kdf2);

void
BM_Join(benchmark::State& state)
{
  const auto n = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) {
    state.PauseTiming();
    Simulation sim(1);
    sim.add_group(GroupId{ 1 }, members(n));
    state.ResumeTiming();
    sim.apply(event(EventKind::Join, n + 1));
  }
}
BENCHMARK(BM_Join)->Arg(10)->Arg(50)->Arg(100);

void
BM_Leave(benchmark::State& state)
{
  const auto n = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) {
    state.PauseTiming();
    Simulation sim(1);
    sim.add_group(GroupId{ 1 }, members(n));
    state.ResumeTiming();
    sim.apply(event(EventKind::Leave, n / 2));
  }
}
BENCHMARK(BM_Leave)->Arg(10)->Arg(50)->Arg(100);

void
BM_ForwardSecrecyCheck(benchmark::State& state)
{
  const auto n = static_cast<std::uint32_t>(state.range(0));
  Simulation sim(1);
  sim.add_group(GroupId{ 1 }, members(n));
  for (std::uint32_t i = 1; i <= n / 2; i++) {
    sim.apply(event(EventKind::Leave, i));
  }
  const Evidence ev(sim.network());
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_property(Property::ForwardSecrecy, sim, ev));
  }
}
BENCHMARK(BM_ForwardSecrecyCheck)->Arg(10)->Arg(20);

} // namespace

BENCHMARK_MAIN();
