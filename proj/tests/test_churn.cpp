#include "support.hpp"

#include "sgrs/churn.hpp"

#include <gtest/gtest.h>

using namespace sgrs;

TEST(Churn, InvariantsHoldAfterEveryEvent)
{
  for (std::uint64_t seed : { 1, 2, 3 }) {
    Simulation sim(seed);
    ChurnConfig cfg;
    cfg.seed = seed;
    cfg.events = 120;
    const auto events = run_churn(sim, cfg);
    EXPECT_EQ(events.size(), cfg.events);
    for (const auto& o : sim.outcomes()) {
      EXPECT_TRUE(o.violations.empty()) << "seed " << seed << " " << o.label;
    }
    EXPECT_EQ(recount_bytes(sim.network()), sim.network().totals().bytes);
  }
}

TEST(Churn, MixesEveryKind)
{
  Simulation sim(5);
  ChurnConfig cfg;
  cfg.seed = 5;
  const auto events = run_churn(sim, cfg);
  std::set<EventKind> kinds;
  for (const auto& e : events) {
    kinds.insert(e.kind);
  }
  EXPECT_TRUE(kinds.count(EventKind::Join));
  EXPECT_TRUE(kinds.count(EventKind::Leave));
  EXPECT_TRUE(kinds.count(EventKind::Partition));
  EXPECT_TRUE(kinds.count(EventKind::Merge));
}

TEST(Churn, SameSeedSameTranscript)
{
  auto run = [](std::uint64_t seed) {
    Simulation sim(seed);
    ChurnConfig cfg;
    cfg.seed = seed;
    cfg.events = 60;
    run_churn(sim, cfg);
    std::ostringstream out;
    sim.network().write_transcript(out);
    return out.str();
  };
  EXPECT_EQ(run(9), run(9));
  EXPECT_NE(run(9), run(10));
}

TEST(Cascade, TopKeyAgreesAndSiblingsStayPut)
{
  const auto s = load_scenario(SGRS_SCENARIOS "/cascade_3x4.json");
  Simulation sim(s.seed, s.sizes);
  for (const auto& g : s.groups) {
    sim.add_group(g.id, g.members);
  }
  sim.build_cascade(*s.cascade_fanout);
  for (const auto& e : s.events) {
    const auto before = sim.groups();
    const auto out = sim.apply(e);
    EXPECT_TRUE(out.violations.empty()) << out.label;
    EXPECT_TRUE(check_cascade(*sim.cascade(), sim.groups()).empty()) << out.label;
    for (const auto& [gid, g] : sim.groups()) {
      if (gid == e.group) {
        continue;
      }
      const auto& old = before.at(gid);
      EXPECT_EQ(g.group_key, old.group_key) << out.label;
      for (const auto& [id, m] : g.members) {
        EXPECT_EQ(m.state, old.member(id).state) << out.label;
      }
    }
  }
}

TEST(Cascade, RefusesMerge)
{
  Simulation sim(1);
  sim.add_group(GroupId{ 1 }, test::range_ids(1, 3));
  sim.add_group(GroupId{ 2 }, test::range_ids(4, 6));
  sim.build_cascade(0);
  EXPECT_THROW(sim.apply(test::merge({ 1, 2 })), Refused);
}
