#pragma once

#include "sgrs/primitives.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace sgrs {

class GroupId
{
public:
  constexpr GroupId() = default;
  constexpr explicit GroupId(std::uint32_t value)
    : _value(value)
  {
  }

  constexpr std::uint32_t value() const { return _value; }
  constexpr auto operator<=>(const GroupId&) const = default;

private:
  std::uint32_t _value = 0;
};

std::string to_string(GroupId id);

// Logical circular list. The arrow pred(i) -> i means i does not hold pred's nonce.
class GroupRing
{
public:
  GroupRing() = default;
  explicit GroupRing(std::vector<MemberId> order);

  MemberId pred(MemberId id) const;
  MemberId succ(MemberId id) const;
  bool contains(MemberId id) const;
  std::size_t size() const { return _order.size(); }
  const std::vector<MemberId>& order() const { return _order; }

  void insert_after(MemberId anchor, std::span<const MemberId> ids);
  void remove(MemberId id);

  bool operator==(const GroupRing&) const = default;

private:
  std::size_t index_of(MemberId id) const;

  std::vector<MemberId> _order;
};

using StateVector = std::map<MemberId, Nonce>;

struct MemberState
{
  MemberId id;
  StateVector state;
  GroupRing ring;
  Digest group_key;
  std::optional<Digest> top_key; // set when the group sits under a supergroup

  // Perfect recall, used to seed the attacker when this member leaves or joins.
  std::set<Digest> recall;
  std::vector<std::size_t> private_boxes;

  const Nonce& own_nonce() const;
  const Nonce* find(MemberId origin) const;
  void hold(const Nonce& n);
  void set_key(const Digest& key);
  void remember(const Digest& value) { recall.insert(value); }
};

struct GroupSnapshot
{
  GroupId id;
  GroupRing ring;
  std::map<MemberId, MemberState> members;
  Digest group_key;
  MemberId sponsor;
  StateVector shared_nonces;

  MemberState& member(MemberId id);
  const MemberState& member(MemberId id) const;
  std::size_t size() const { return ring.size(); }
};

// Nonces of Y as held by m, or nullopt if m lacks any of them.
std::optional<std::vector<Nonce>> select_nonces(const MemberState& m,
                                                std::span<const MemberId> ids);

std::optional<Digest> derive_multicast_key(const MemberState& m,
                                           std::span<const MemberId> ids);

struct KeyCounts
{
  std::uint64_t w = 0;
  std::uint64_t z = 0;
};

KeyCounts count_keys_closed_form(std::uint32_t n);

struct BruteCounts
{
  std::uint64_t w_semantic = 0;
  std::map<MemberId, std::uint64_t> z_per_member;
};

inline constexpr std::size_t bruteforce_limit = 12;

BruteCounts count_keys_bruteforce(const GroupSnapshot& g);

struct Violation
{
  MemberId member;
  std::string what;
};

std::vector<Violation> check_ring_invariant(const GroupSnapshot& g);

// Trusted setup: fresh nonces, ascending ring, random initial key.
GroupSnapshot bootstrap_group(GroupId id,
                              std::vector<MemberId> members,
                              SeededRng& rng);

} // namespace sgrs
