#include "support.hpp"

#include <gtest/gtest.h>

using namespace sgrs;

namespace {

constexpr GroupId g1{ 1 };

std::unique_ptr<Simulation>
run(std::uint64_t seed,
    Mutation mutation,
    std::vector<MemberId> members,
    const std::vector<MembershipEvent>& events)
{
  auto sim = std::make_unique<Simulation>(seed, SizeModel{}, mutation);
  sim->add_group(g1, std::move(members));
  for (const auto& e : events) {
    sim->apply(e);
  }
  return sim;
}

Verdict
check(Property p, const Simulation& sim)
{
  const Evidence ev(sim.network());
  return check_property(p, sim, ev);
}

void
expect_killed(const Verdict& v)
{
  ASSERT_FALSE(v.pass()) << property_name(v.property);
  ASSERT_FALSE(v.findings.empty());
  EXPECT_FALSE(v.findings[0].witness.empty());
  EXPECT_TRUE(v.findings[0].replayed);
}

} // namespace

TEST(Properties, NamesRoundTrip)
{
  for (auto p : all_properties) {
    EXPECT_EQ(parse_property(property_name(p)), p);
  }
  EXPECT_THROW(parse_property("secrecy"), ConfigError);
}

TEST(Properties, NoEventsIsVacuousPass)
{
  const auto sim = run(1, Mutation::None, test::range_ids(1, 5), {});
  for (const auto& v : check_properties(all_properties, *sim)) {
    EXPECT_TRUE(v.pass()) << property_name(v.property);
  }
}

TEST(Mutants, JoinKeyMixBreaksBackwardSecrecy)
{
  const std::vector<MembershipEvent> events{ test::join(1, 4, 3) };
  const auto good = run(21, Mutation::None, test::ids({ 1, 2, 3 }), events);
  EXPECT_TRUE(check(Property::BackwardSecrecy, *good).pass());
  const auto bad = run(21, Mutation::JoinKeyMix, test::ids({ 1, 2, 3 }), events);
  expect_killed(check(Property::BackwardSecrecy, *bad));
}

TEST(Mutants, LeaveRehashBreaksForwardSecrecy)
{
  // Without the rehash, N4 keeps n2 after N3 leaves and reads its own leave notice.
  const std::vector<MembershipEvent> events{ test::leave(1, 3, 1), test::leave(1, 4, 1) };
  const auto good = run(22, Mutation::None, test::range_ids(1, 6), events);
  EXPECT_TRUE(check(Property::ForwardSecrecy, *good).pass());
  const auto bad = run(22, Mutation::LeaveRehash, test::range_ids(1, 6), events);
  expect_killed(check(Property::ForwardSecrecy, *bad));
}

TEST(Mutants, PartitionGBreaksForwardSecrecy)
{
  const std::vector<MembershipEvent> events{ test::partition(1, { 2, 3 }, 5),
                                             test::leave(1, 4, 1) };
  const auto good = run(23, Mutation::None, test::range_ids(1, 6), events);
  EXPECT_TRUE(check(Property::ForwardSecrecy, *good).pass());
  const auto bad = run(23, Mutation::PartitionG, test::range_ids(1, 6), events);
  expect_killed(check(Property::ForwardSecrecy, *bad));
}

TEST(Mutants, MergeSponsorRehashChangesTheMergedState)
{
  Simulation good(7);
  Simulation bad(7, SizeModel{}, Mutation::MergeSponsorRehash);
  for (auto* sim : { &good, &bad }) {
    sim->add_group(g1, test::ids({ 1, 2, 3 }));
    sim->add_group(GroupId{ 2 }, test::ids({ 4, 5, 6 }));
    sim->apply(test::merge({ 1, 2 }, 2, 6));
  }
  EXPECT_NE(good.group(g1).shared_nonces.at(MemberId{ 2 }).value,
            bad.group(g1).shared_nonces.at(MemberId{ 2 }).value);
  EXPECT_TRUE(bad.outcomes().back().violations.empty());
}

TEST(Findings, JoinHandoffLetsSuccessorReadTheRequest)
{
  // The successor receives n_s in the hand-off, which opens the earlier request and
  // exposes the joiner's nonce, now its predecessor's. Its own leave notice is sealed
  // under exactly that nonce.
  const auto sim = run(24, Mutation::None, test::range_ids(1, 5),
                       { test::join(1, 6, 5), test::leave(1, 1, 3) });
  const auto v = check(Property::ForwardSecrecy, *sim);
  ASSERT_FALSE(v.pass());
  EXPECT_TRUE(v.findings[0].replayed);
}

TEST(Findings, TwoMemberJoinLeaksToKeyIndependence)
{
  // A two-member group hands n_s over under the bare group key.
  const auto sim = run(25, Mutation::None, test::ids({ 1, 2 }), { test::join(1, 3, 2) });
  const auto v = check(Property::KeyIndependence, *sim);
  ASSERT_FALSE(v.pass());
  EXPECT_TRUE(v.findings[0].replayed);
}

TEST(Findings, ThreeMemberJoinKeepsKeyIndependence)
{
  const auto sim = run(25, Mutation::None, test::ids({ 1, 2, 3 }), { test::join(1, 4, 2) });
  EXPECT_TRUE(check(Property::KeyIndependence, *sim).pass());
}
