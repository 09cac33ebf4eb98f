#pragma once

#include "sgrs/group.hpp"
#include "sgrs/simnet.hpp"

#include <optional>
#include <set>
#include <string_view>
#include <vector>

namespace sgrs {

// Planted faults, each removing one rekeying countermeasure.
enum class Mutation : std::uint8_t
{
  None,
  JoinKeyMix,         // join keeps the old group key
  LeaveRehash,        // leave skips both nonce rehashes
  MergeSponsorRehash, // merge skips the sponsor nonce update
  PartitionG,         // partition skips the block rehashes
};

std::string_view mutation_name(Mutation m);
Mutation parse_mutation(std::string_view name); // throws ConfigError

class AuthServerStub
{
public:
  explicit AuthServerStub(Digest mac_key)
    : _mac_key(mac_key)
  {
  }

  void enroll(MemberId id) { _registry.insert(id); }
  bool enrolled(MemberId id) const { return _registry.count(id) != 0; }

  Digest sign(std::span<const Nonce> nonces, MemberId subject) const;
  bool verify(std::span<const Nonce> nonces, MemberId subject, const Digest& mac) const;

private:
  Digest _mac_key;
  std::set<MemberId> _registry;
};

struct JoinTag
{
  MemberId joiner;
  MemberId sponsor;
  std::size_t state_box = 0;   // joiner's state vector under the next group key
  std::size_t request_box = 0; // signed nonce under the sponsor's multicast key
  std::uint64_t request_bytes = 0;

  // Handed to the joiner over the authentication channel.
  Nonce joiner_nonce;
  Digest credential;
};

struct ProtocolContext
{
  Network& net;
  SeededRng& rng;
  AuthServerStub& auth;
  Mutation mutation = Mutation::None;
};

JoinTag issue_join_tag(const GroupSnapshot& g,
                       MemberId joiner,
                       MemberId sponsor,
                       ProtocolContext& ctx);

GroupSnapshot run_join(const GroupSnapshot& g, const JoinTag& tag, ProtocolContext& ctx);

struct RemovalOutcome
{
  GroupSnapshot group;
  std::vector<MemberState> departed;
};

RemovalOutcome run_leave(const GroupSnapshot& g,
                         MemberId departing,
                         MemberId sponsor,
                         ProtocolContext& ctx);

RemovalOutcome run_partition(const GroupSnapshot& g,
                             const std::set<MemberId>& departing,
                             MemberId sponsor,
                             ProtocolContext& ctx);

// Ids whose nonces every survivor holds: the partition multicast index.
std::vector<MemberId> partition_index(const GroupRing& ring,
                                      const std::set<MemberId>& departing);

// Group a keeps its id and absorbs b; the merged key is b's key.
GroupSnapshot run_merge_pair(const GroupSnapshot& a,
                             const GroupSnapshot& b,
                             ProtocolContext& ctx,
                             std::optional<MemberId> sponsor_a = std::nullopt,
                             std::optional<MemberId> sponsor_b = std::nullopt);

struct MultiMergeOutcome
{
  GroupSnapshot group;
  std::size_t rounds = 0;
  std::vector<std::vector<std::pair<GroupId, GroupId>>> bracket;
};

MultiMergeOutcome run_merge_multi(std::vector<GroupSnapshot> groups, ProtocolContext& ctx);

MemberId default_leave_sponsor(const GroupSnapshot& g, MemberId departing);
MemberId default_partition_sponsor(const GroupSnapshot& g,
                                   const std::set<MemberId>& departing);

} // namespace sgrs
