#include "support.hpp"

#include <gtest/gtest.h>

using namespace sgrs;
using test::oracle_kdf2;

namespace {

constexpr GroupId g1{ 1 };

std::set<std::uint32_t>
holdings(const GroupSnapshot& g, std::uint32_t id)
{
  std::set<std::uint32_t> out;
  for (const auto& [origin, n] : g.member(MemberId{ id }).state) {
    out.insert(origin.value());
  }
  return out;
}

const Digest&
nonce_of(const GroupSnapshot& g, std::uint32_t id)
{
  return g.shared_nonces.at(MemberId{ id }).value;
}

void
expect_agreement(const GroupSnapshot& g, const Digest& key)
{
  EXPECT_EQ(g.group_key, key);
  for (const auto& [id, m] : g.members) {
    EXPECT_EQ(m.group_key, key) << to_string(id);
  }
  EXPECT_TRUE(check_ring_invariant(g).empty());
}

} // namespace

TEST(WorkedExamples, JoinOfFourthMember)
{
  Simulation sim(4);
  sim.add_group(g1, test::ids({ 1, 2, 3 }));
  const auto before = sim.group(g1);
  const auto out = sim.apply(test::join(1, 4, 3));
  const auto& g = sim.group(g1);

  EXPECT_EQ(g.ring.order(), test::ids({ 1, 2, 3, 4 }));
  expect_agreement(g, oracle_kdf2("GK-join", before.group_key, nonce_of(before, 3)));

  // N1 gains n3 and now lacks n4; nobody's nonce is rehashed.
  EXPECT_EQ(holdings(g, 1), (std::set<std::uint32_t>{ 1, 2, 3 }));
  EXPECT_EQ(holdings(g, 2), (std::set<std::uint32_t>{ 2, 3, 4 }));
  EXPECT_EQ(holdings(g, 3), (std::set<std::uint32_t>{ 1, 3, 4 }));
  EXPECT_EQ(holdings(g, 4), (std::set<std::uint32_t>{ 1, 2, 4 }));
  for (std::uint32_t i = 1; i <= 3; i++) {
    EXPECT_EQ(nonce_of(g, i), nonce_of(before, i));
    EXPECT_EQ(g.shared_nonces.at(MemberId{ i }).version, 0u);
  }

  const auto& ledger = sim.network().ledger_for_event(out.index);
  EXPECT_EQ(ledger.totals.uc, 2u);
  EXPECT_EQ(ledger.totals.bc, 1u);
  // One group-key derivation per member of the grown group except the joiner.
  EXPECT_EQ(ledger.totals.hash_ops, 3u);
  EXPECT_EQ(test::count_step(sim.network(), "join.request"), 1u);
  EXPECT_EQ(test::count_step(sim.network(), "join.welcome"), 1u);
  EXPECT_EQ(test::count_step(sim.network(), "join.handoff"), 1u);
}

TEST(WorkedExamples, LeaveOfFourthMember)
{
  Simulation sim(5);
  sim.add_group(g1, test::ids({ 1, 2, 3, 4 }));
  const auto before = sim.group(g1);
  const auto out = sim.apply(test::leave(1, 4, 2));
  const auto& g = sim.group(g1);

  const auto notice = test::open_step(sim.network(), "leave.notice");
  ASSERT_EQ(notice[0].kind, ItemKind::Random);
  const auto r = notice[0].value;

  const auto n2 = oracle_kdf2("NR", nonce_of(before, 2), r);
  const auto n3 = oracle_kdf2("NR", nonce_of(before, 3), nonce_of(before, 4));
  EXPECT_EQ(nonce_of(g, 2), n2);
  EXPECT_EQ(nonce_of(g, 3), n3);
  EXPECT_EQ(nonce_of(g, 1), nonce_of(before, 1));
  expect_agreement(g, oracle_kdf2("GK-leave", n2, r));

  EXPECT_EQ(g.ring.order(), test::ids({ 1, 2, 3 }));
  EXPECT_EQ(holdings(g, 1), (std::set<std::uint32_t>{ 1, 2 }));
  EXPECT_EQ(holdings(g, 2), (std::set<std::uint32_t>{ 2, 3 }));
  EXPECT_EQ(holdings(g, 3), (std::set<std::uint32_t>{ 1, 3 }));

  // One broadcast notice and one unicast delivery, as the message listing has it.
  const auto& ledger = sim.network().ledger_for_event(out.index);
  EXPECT_EQ(ledger.totals.uc, 1u);
  EXPECT_EQ(ledger.totals.bc, 1u);

  ASSERT_EQ(sim.departures().size(), 1u);
  EXPECT_EQ(sim.departures()[0].members[0].id, MemberId{ 4 });
}

TEST(WorkedExamples, MergeOfTwoTriples)
{
  Simulation sim(7);
  sim.add_group(g1, test::ids({ 1, 2, 3 }));
  sim.add_group(GroupId{ 2 }, test::ids({ 4, 5, 6 }));
  const auto a = sim.group(g1);
  const auto b = sim.group(GroupId{ 2 });
  const auto out = sim.apply(test::merge({ 1, 2 }, 2, 6));
  const auto& g = sim.group(g1);

  EXPECT_EQ(sim.groups().size(), 1u);
  EXPECT_EQ(g.ring.order(), test::ids({ 1, 2, 4, 5, 6, 3 }));
  expect_agreement(g, b.group_key);
  EXPECT_EQ(nonce_of(g, 2), oracle_kdf2("NR", nonce_of(a, 2), a.group_key));
  for (std::uint32_t i : { 1u, 3u }) {
    EXPECT_EQ(nonce_of(g, i), nonce_of(a, i));
  }
  for (std::uint32_t i : { 4u, 5u, 6u }) {
    EXPECT_EQ(nonce_of(g, i), nonce_of(b, i));
  }
  // N1^b now lacks n2^a; N3^a now lacks n3^b.
  for (std::uint32_t i = 1; i <= 6; i++) {
    auto expected = std::set<std::uint32_t>{ 1, 2, 3, 4, 5, 6 };
    expected.erase(g.ring.pred(MemberId{ i }).value());
    EXPECT_EQ(holdings(g, i), expected) << i;
  }
  EXPECT_EQ(g.ring.pred(MemberId{ 4 }), MemberId{ 2 });
  EXPECT_EQ(g.ring.pred(MemberId{ 3 }), MemberId{ 6 });

  const auto& ledger = sim.network().ledger_for_event(out.index);
  EXPECT_EQ(ledger.totals.uc, 3u);
  EXPECT_EQ(ledger.totals.bc, 3u);
}

TEST(WorkedExamples, PartitionOfSix)
{
  Simulation sim(8);
  sim.add_group(g1, test::range_ids(1, 6));
  const auto before = sim.group(g1);
  const auto out = sim.apply(test::partition(1, { 1, 2, 5 }, 3));
  const auto& g = sim.group(g1);

  const std::set<MemberId> gone{ MemberId{ 1 }, MemberId{ 2 }, MemberId{ 5 } };
  EXPECT_EQ(partition_index(before.ring, gone), test::ids({ 1, 4, 6 }));
  ASSERT_EQ(out.notes.size(), 1u);
  EXPECT_NE(out.notes[0].find("partition index: 1 4 6"), std::string::npos) << out.notes[0];

  const auto notice = test::open_step(sim.network(), "partition.notice");
  ASSERT_EQ(notice[0].kind, ItemKind::Random);
  const auto r = notice[0].value;

  const auto n3 = oracle_kdf2("NR", nonce_of(before, 3), r);
  EXPECT_EQ(nonce_of(g, 3), n3);
  EXPECT_EQ(nonce_of(g, 4), oracle_kdf2("NR", nonce_of(before, 4), nonce_of(before, 5)));
  EXPECT_EQ(nonce_of(g, 6), oracle_kdf2("NR", nonce_of(before, 6), nonce_of(before, 2)));
  // The drawn n3' = Hash(n3, n5) is an erratum; the sponsor rule mixes in r.
  EXPECT_NE(nonce_of(g, 3), oracle_kdf2("NR", nonce_of(before, 3), nonce_of(before, 5)));
  expect_agreement(g, oracle_kdf2("GK-leave", n3, r));

  EXPECT_EQ(g.ring.order(), test::ids({ 3, 4, 6 }));
  EXPECT_EQ(holdings(g, 3), (std::set<std::uint32_t>{ 3, 4 }));
  EXPECT_EQ(holdings(g, 4), (std::set<std::uint32_t>{ 4, 6 }));
  EXPECT_EQ(holdings(g, 6), (std::set<std::uint32_t>{ 3, 6 }));
}

TEST(Leave, SponsorNextToDepartingRehashesBoth)
{
  Simulation sim(11);
  sim.add_group(g1, test::range_ids(1, 5));
  const auto before = sim.group(g1);
  sim.apply(test::leave(1, 3, 4));
  const auto& g = sim.group(g1);
  EXPECT_EQ(nonce_of(g, 2), oracle_kdf2("NR", nonce_of(before, 2), nonce_of(before, 3)));
  EXPECT_EQ(nonce_of(g, 1), nonce_of(before, 1));
  EXPECT_EQ(g.shared_nonces.at(MemberId{ 4 }).version, 1u);
  EXPECT_TRUE(check_ring_invariant(g).empty());
}

TEST(Leave, Refusals)
{
  Simulation sim(12);
  sim.add_group(g1, test::ids({ 1, 2 }));
  EXPECT_THROW(sim.apply(test::leave(1, 2, 1)), Refused);
  Simulation other(12);
  other.add_group(g1, test::ids({ 1, 2, 3 }));
  EXPECT_THROW(other.apply(test::leave(1, 2, 2)), Refused);
}

TEST(Partition, ContiguousBlockNeedsOneRehash)
{
  Simulation sim(13);
  sim.add_group(g1, test::range_ids(1, 8));
  const auto before = sim.group(g1);
  sim.apply(test::partition(1, { 3, 4, 5 }, 7));
  const auto& g = sim.group(g1);
  // Only n2 (the block's predecessor) is rehashed, with the block member next to N6.
  EXPECT_EQ(nonce_of(g, 2), oracle_kdf2("NR", nonce_of(before, 2), nonce_of(before, 5)));
  for (std::uint32_t i : { 1u, 6u, 8u }) {
    EXPECT_EQ(nonce_of(g, i), nonce_of(before, i)) << i;
  }
  EXPECT_TRUE(check_ring_invariant(g).empty());
}

TEST(Partition, RefusesTooFewSurvivors)
{
  Simulation sim(14);
  sim.add_group(g1, test::range_ids(1, 4));
  EXPECT_THROW(sim.apply(test::partition(1, { 1, 2, 3 }, 4)), Refused);
}

TEST(Join, IntoTwoMemberGroup)
{
  Simulation sim(15);
  sim.add_group(g1, test::ids({ 1, 2 }));
  const auto before = sim.group(g1);
  sim.apply(test::join(1, 3, 2));
  expect_agreement(sim.group(g1), oracle_kdf2("GK-join", before.group_key, nonce_of(before, 2)));
}

TEST(Join, RefusesReusedIds)
{
  Simulation sim(16);
  sim.add_group(g1, test::ids({ 1, 2, 3 }));
  sim.apply(test::leave(1, 3, 1));
  EXPECT_THROW(sim.apply(test::join(1, 3, 1)), Refused);
  EXPECT_THROW(sim.apply(test::join(1, 2, 1)), Refused);
}

TEST(Merge, SixGroupsTakeThreeRounds)
{
  Simulation sim(17);
  std::uint32_t next = 1;
  for (std::uint32_t gid = 1; gid <= 6; gid++) {
    sim.add_group(GroupId{ gid }, test::range_ids(next, next + 2));
    next += 3;
  }
  const auto out = sim.apply(test::merge({ 1, 2, 3, 4, 5, 6 }));
  ASSERT_EQ(sim.groups().size(), 1u);
  const auto& g = sim.groups().begin()->second;
  EXPECT_EQ(g.size(), 18u);
  EXPECT_TRUE(check_ring_invariant(g).empty());
  ASSERT_EQ(out.notes.size(), 1u);
  EXPECT_EQ(std::count(out.notes[0].begin(), out.notes[0].end(), '['), 3);
}

TEST(Merge, FifteenGroupsOfSeven)
{
  Simulation sim(18);
  std::uint32_t next = 1;
  MembershipEvent e;
  e.kind = EventKind::Merge;
  for (std::uint32_t gid = 1; gid <= 15; gid++) {
    sim.add_group(GroupId{ gid }, test::range_ids(next, next + 6));
    e.groups.emplace_back(gid);
    next += 7;
  }
  const auto out = sim.apply(e);
  const auto& g = sim.groups().begin()->second;
  EXPECT_EQ(g.size(), 105u);
  EXPECT_TRUE(out.violations.empty());
  EXPECT_EQ(std::count(out.notes[0].begin(), out.notes[0].end(), '['), 4);
}

TEST(Merge, PairMatchesTwoGroupMultiMerge)
{
  Simulation pair(19);
  Simulation multi(19);
  for (auto* sim : { &pair, &multi }) {
    sim->add_group(g1, test::ids({ 1, 2, 3 }));
    sim->add_group(GroupId{ 2 }, test::ids({ 4, 5, 6, 7 }));
  }
  pair.apply(test::merge({ 1, 2 }, 1, 4));
  multi.apply(test::merge({ 1, 2 }));
  EXPECT_EQ(pair.group(g1).group_key, multi.group(g1).group_key);
  EXPECT_EQ(pair.group(g1).size(), 7u);
  EXPECT_TRUE(check_ring_invariant(multi.group(g1)).empty());
}

TEST(Network, ConservationAndTotals)
{
  Simulation sim(20);
  sim.add_group(g1, test::range_ids(1, 6));
  sim.apply(test::join(1, 7));
  sim.apply(test::leave(1, 3));
  sim.apply(test::partition(1, { 5, 6 }));
  const auto& net = sim.network();
  EXPECT_EQ(recount_bytes(net), net.totals().bytes);
  Counters sum;
  for (const auto& e : net.ledger().per_event) {
    sum += e.totals;
  }
  EXPECT_EQ(sum, net.totals());
}
