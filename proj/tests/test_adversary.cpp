#include "support.hpp"

#include <gtest/gtest.h>

using namespace sgrs;

namespace {

constexpr GroupId g1{ 1 };

bool
subset(const KnowledgeSet& a, const KnowledgeSet& b)
{
  for (const auto& [v, p] : a.atoms) {
    if (!b.contains(v)) {
      return false;
    }
  }
  return true;
}

} // namespace

TEST(Closure, EmptySeedsLearnNothing)
{
  Simulation sim(1);
  sim.add_group(g1, test::range_ids(1, 6));
  sim.apply(test::join(1, 7));
  sim.apply(test::leave(1, 2));
  sim.apply(test::partition(1, { 4, 5 }));
  const Evidence ev(sim.network());
  EXPECT_EQ(close(ev, {}).size(), 0u);
}

TEST(Closure, IndexNoncesAndKeyOpenTheMessage)
{
  Simulation sim(8);
  sim.add_group(g1, test::range_ids(1, 6));
  const auto before = sim.group(g1);
  sim.apply(test::partition(1, { 1, 2, 5 }, 3));
  const Evidence ev(sim.network());

  KnowledgeSet seeds;
  seeds.add_seed(before.group_key, AtomKind::Key);
  for (std::uint32_t i : { 1u, 4u, 6u }) {
    seeds.add_seed(before.shared_nonces.at(MemberId{ i }).value, AtomKind::Nonce);
  }
  const auto k = close(ev, seeds);
  const auto r = test::open_step(sim.network(), "partition.notice")[0].value;
  EXPECT_TRUE(k.contains(r));
  EXPECT_TRUE(k.contains(sim.group(g1).group_key));
  EXPECT_TRUE(replay_witness(ev, k, sim.group(g1).group_key));

  // Two of the three index nonces are not enough.
  KnowledgeSet partial;
  partial.add_seed(before.group_key, AtomKind::Key);
  partial.add_seed(before.shared_nonces.at(MemberId{ 1 }).value, AtomKind::Nonce);
  partial.add_seed(before.shared_nonces.at(MemberId{ 4 }).value, AtomKind::Nonce);
  EXPECT_FALSE(close(ev, partial).contains(r));
}

TEST(Closure, DepartedMemberOfLeaveLacksNewKey)
{
  Simulation sim(5);
  sim.add_group(g1, test::ids({ 1, 2, 3, 4 }));
  sim.apply(test::leave(1, 4, 2));
  const Evidence ev(sim.network());
  const auto k = close(ev, snapshot_knowledge(sim.departures()[0].members[0]));
  EXPECT_FALSE(k.contains(sim.group(g1).group_key));
  EXPECT_GT(k.size(), 0u);
}

TEST(Closure, MonotoneAndIdempotent)
{
  Simulation sim(3);
  sim.add_group(g1, test::range_ids(1, 7));
  sim.apply(test::join(1, 8, 2));
  sim.apply(test::leave(1, 5, 1));
  sim.apply(test::partition(1, { 2, 3 }, 6));
  const Evidence ev(sim.network());

  const auto small = snapshot_knowledge(sim.departures()[0].members[0]);
  auto large = small;
  for (const auto& m : sim.departures()[1].members) {
    const auto more = snapshot_knowledge(m);
    for (const auto& [v, p] : more.atoms) {
      large.atoms.emplace(v, p);
    }
    large.private_boxes.insert(large.private_boxes.end(), more.private_boxes.begin(),
                               more.private_boxes.end());
  }
  const auto ks = close(ev, small);
  const auto kl = close(ev, large);
  EXPECT_TRUE(subset(small, ks));
  EXPECT_TRUE(subset(ks, kl));

  auto again = ks;
  again.private_boxes = small.private_boxes;
  const auto twice = close(ev, again);
  EXPECT_EQ(twice.size(), ks.size());
  EXPECT_TRUE(subset(twice, ks));
}

TEST(Closure, BudgetIsEnforced)
{
  Simulation sim(2);
  sim.add_group(g1, test::range_ids(1, 5));
  sim.apply(test::leave(1, 3));
  const Evidence ev(sim.network());
  const auto seeds = snapshot_knowledge(sim.group(g1).member(MemberId{ 1 }));
  EXPECT_THROW(close(ev, seeds, 2), ClosureBudgetExceeded);
}

TEST(Closure, JoinerOpensOnlyItsOwnPrivateBoxes)
{
  Simulation sim(9);
  sim.add_group(g1, test::ids({ 1, 2, 3 }));
  sim.apply(test::join(1, 4, 3));
  const Evidence ev(sim.network());
  const auto& joiner = sim.group(g1).member(MemberId{ 4 });
  auto seeds = snapshot_knowledge(joiner);
  const auto k = close(ev, seeds);
  EXPECT_TRUE(k.contains(sim.group(g1).group_key));
  seeds.private_boxes.clear();
  EXPECT_TRUE(close(ev, seeds).contains(sim.group(g1).group_key));
}

TEST(Witness, ChainEndsAtTargetAndReplays)
{
  Simulation sim(8);
  sim.add_group(g1, test::range_ids(1, 6));
  sim.apply(test::partition(1, { 1, 2, 5 }, 3));
  const Evidence ev(sim.network());
  KnowledgeSet pooled;
  for (const auto& m : sim.departures()[0].members) {
    const auto one = snapshot_knowledge(m);
    for (const auto& [v, p] : one.atoms) {
      pooled.atoms.emplace(v, p);
    }
  }
  const auto k = close(ev, pooled);
  const auto& key = sim.group(g1).group_key;
  ASSERT_TRUE(k.contains(key));
  const auto chain = witness_chain(ev, k, key);
  ASSERT_FALSE(chain.empty());
  EXPECT_NE(chain.back().find(key.short_hex()), std::string::npos);
  EXPECT_TRUE(replay_witness(ev, k, key));
}
