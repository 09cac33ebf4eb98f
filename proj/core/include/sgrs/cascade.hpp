#pragma once

#include "sgrs/group.hpp"
#include "sgrs/protocols.hpp"

#include <map>
#include <optional>
#include <vector>

namespace sgrs {

// One node above the leaf groups. Each slot is a child (a leaf group or a lower
// node); the child's current key is that slot's nonce. The slot ring runs in
// descending child order, so the slot that lacks child i's key is child i-1.
struct SuperNode
{
  std::size_t level = 2;
  std::vector<std::uint32_t> children; // leaf group ids at level 2, node indices above
  std::optional<GroupSnapshot> slots;  // empty when the node has one child
  std::map<std::uint32_t, MemberId> representatives;
  std::optional<std::size_t> parent;
  std::uint32_t epoch = 0;
};

struct Supergroup
{
  std::vector<SuperNode> nodes;
  std::map<GroupId, std::size_t> leaf_parent;
  std::size_t root = 0;

  const Digest& top_key(const std::map<GroupId, GroupSnapshot>& leaves) const;
  std::size_t depth() const { return nodes.empty() ? 1 : nodes[root].level; }
};

// Trusted setup over existing leaf groups. fanout == 0 puts every leaf under one node.
Supergroup build_supergroup(std::map<GroupId, GroupSnapshot>& leaves,
                            std::size_t fanout,
                            SeededRng& rng);

// After leaf `changed` rekeyed: update every node on the path to the root,
// then hand the new top key to every leaf member.
void cascade_propagate(Supergroup& sg,
                       std::map<GroupId, GroupSnapshot>& leaves,
                       GroupId changed,
                       ProtocolContext& ctx);

std::vector<Violation> check_cascade(const Supergroup& sg,
                                     const std::map<GroupId, GroupSnapshot>& leaves);

} // namespace sgrs
