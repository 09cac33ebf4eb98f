#pragma once

#include "sgrs/cascade.hpp"
#include "sgrs/protocols.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sgrs {

enum class EventKind : std::uint8_t
{
  Join,
  Leave,
  Merge,
  Partition,
  Spawn,
};

std::string_view event_kind_name(EventKind k);

struct MembershipEvent
{
  EventKind kind = EventKind::Join;
  GroupId group;                   // target group; unused for merge
  std::vector<MemberId> members;   // joiner, departing set, or spawned members
  std::vector<GroupId> groups;     // merge operands
  std::optional<MemberId> sponsor; // join, leave, partition, and merge side a
  std::optional<MemberId> sponsor_b;
};

std::string describe(const MembershipEvent& e);

// A group key (or supergroup key) as first established; keys are deduplicated by value.
struct Epoch
{
  std::optional<std::size_t> event; // nullopt for trusted setup before any event
  GroupId group;
  std::size_t level = 1;
  Digest key;
};

struct Departure
{
  std::size_t event = 0;
  GroupId group;
  std::vector<MemberState> members; // frozen at removal
  bool simultaneous = false;        // partition
};

// Who was admitted, and which keys they must never derive.
struct Admission
{
  std::size_t event = 0;
  GroupId group;
  std::string kind; // "join" or "merge"
  std::vector<MemberId> members;
  std::vector<Digest> forbidden;
};

struct EventOutcome
{
  std::size_t index = 0;
  std::string label;
  std::vector<std::string> notes;
  std::vector<Violation> violations;
};

class Simulation
{
public:
  explicit Simulation(std::uint64_t seed,
                      SizeModel sizes = {},
                      Mutation mutation = Mutation::None);

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  // Trusted setup before any event.
  void add_group(GroupId id, std::vector<MemberId> members);
  void build_cascade(std::size_t fanout);

  // Throws Refused / DomainError without touching group state.
  EventOutcome apply(const MembershipEvent& e);

  const Network& network() const { return _net; }
  const std::map<GroupId, GroupSnapshot>& groups() const { return _groups; }
  const GroupSnapshot& group(GroupId id) const;
  const std::optional<Supergroup>& cascade() const { return _cascade; }
  const std::vector<Epoch>& epochs() const { return _epochs; }
  const std::vector<Departure>& departures() const { return _departures; }
  const std::vector<Admission>& admissions() const { return _admissions; }
  const std::vector<EventOutcome>& outcomes() const { return _outcomes; }
  Mutation mutation() const { return _mutation; }
  std::uint64_t seed() const { return _seed; }

  // Current state of a live member, or its frozen state if it departed.
  std::optional<MemberState> find_member(MemberId id) const;
  bool ever_seen(MemberId id) const { return _seen.count(id) != 0; }
  MemberId next_free_id() const;
  GroupId next_free_group() const;

  std::vector<Violation> check_all() const;

private:
  ProtocolContext context();
  std::optional<std::size_t> event_slot() const;
  void record_epoch(GroupId group, std::size_t level, const Digest& key);
  void record_cascade_epochs();
  void claim_ids(const std::vector<MemberId>& ids);
  void guard_representatives(GroupId gid, const std::set<MemberId>& leaving) const;

  void do_join(const MembershipEvent& e, EventOutcome& out);
  void do_leave(const MembershipEvent& e, EventOutcome& out);
  void do_partition(const MembershipEvent& e, EventOutcome& out);
  void do_merge(const MembershipEvent& e, EventOutcome& out);
  void do_spawn(const MembershipEvent& e, EventOutcome& out);

  std::uint64_t _seed;
  SeededRng _rng;
  Network _net;
  AuthServerStub _auth;
  Mutation _mutation;
  std::map<GroupId, GroupSnapshot> _groups;
  std::optional<Supergroup> _cascade;
  std::vector<Epoch> _epochs;
  std::set<Digest> _epoch_keys;
  std::map<GroupId, std::vector<Digest>> _lineage;
  std::vector<Departure> _departures;
  std::vector<Admission> _admissions;
  std::vector<EventOutcome> _outcomes;
  std::set<MemberId> _seen;
};

} // namespace sgrs
