#include "sgrs/cascade.hpp"

#include <algorithm>
#include <array>

namespace sgrs {

namespace {

const Digest&
child_key(const Supergroup& sg,
          const SuperNode& node,
          std::uint32_t child,
          const std::map<GroupId, GroupSnapshot>& leaves)
{
  if (node.level == 2) {
    return leaves.at(GroupId{ child }).group_key;
  }
  const auto& below = sg.nodes.at(child);
  if (below.slots) {
    return below.slots->group_key;
  }
  return child_key(sg, below, below.children.front(), leaves);
}

MemberId
representative_of(const Supergroup& sg,
                  std::size_t level,
                  std::uint32_t child,
                  const std::map<GroupId, GroupSnapshot>& leaves)
{
  if (level == 2) {
    return leaves.at(GroupId{ child }).sponsor;
  }
  const auto& below = sg.nodes.at(child);
  return below.representatives.at(below.children.front());
}

GroupSnapshot
slot_group(const std::vector<std::uint32_t>& children,
           const std::vector<Digest>& keys,
           const Digest& super_key)
{
  GroupSnapshot g;
  g.id = GroupId{ 0 };
  std::vector<MemberId> order;
  for (auto it = children.rbegin(); it != children.rend(); ++it) {
    order.push_back(MemberId{ *it });
  }
  g.ring = GroupRing(order);
  g.sponsor = order.front();
  for (std::size_t i = 0; i < children.size(); i++) {
    g.shared_nonces[MemberId{ children[i] }] = { keys[i], MemberId{ children[i] }, 0 };
  }
  g.group_key = super_key;
  for (auto id : order) {
    MemberState st;
    st.id = id;
    st.ring = g.ring;
    const auto pred = g.ring.pred(id);
    for (const auto& [origin, n] : g.shared_nonces) {
      if (origin != pred) {
        st.hold(n);
      }
    }
    st.set_key(super_key);
    g.members.emplace(id, std::move(st));
  }
  return g;
}

void
distribute_top(Supergroup& sg, std::map<GroupId, GroupSnapshot>& leaves, ProtocolContext* ctx)
{
  const auto top = sg.top_key(leaves);
  // With a single child the top key is that child's key; nothing to send.
  const bool local = ctx == nullptr || !sg.nodes.at(sg.root).slots;
  for (auto& [gid, g] : leaves) {
    if (local) {
      for (auto& [id, m] : g.members) {
        m.top_key = top;
        m.remember(top);
      }
      continue;
    }
    const auto sender = sg.nodes.at(sg.leaf_parent.at(gid)).representatives.at(gid.value());
    if (g.member(sender).top_key == top) {
      continue;
    }
    auto& net = ctx->net;
    std::vector<MemberId> addressed;
    for (auto id : g.ring.order()) {
      if (id != sender) {
        addressed.push_back(id);
      }
    }
    const auto msg = net.send(Mode::Broadcast, sender, addressed, {},
                              { Item::key(top) }, g.group_key, "cascade.distribute");
    for (auto id : addressed) {
      auto& m = g.member(id);
      const auto payload = net.receive(msg, id, m.group_key);
      if (!payload) {
        throw ProtocolAbort("member " + to_string(id) + " missed the top key");
      }
      m.top_key = (*payload)[0].value;
      m.remember(*m.top_key);
    }
    auto& rep = g.member(sender);
    rep.top_key = top;
    rep.remember(top);
  }
}

} // namespace

const Digest&
Supergroup::top_key(const std::map<GroupId, GroupSnapshot>& leaves) const
{
  const auto& node = nodes.at(root);
  if (node.slots) {
    return node.slots->group_key;
  }
  return child_key(*this, node, node.children.front(), leaves);
}

Supergroup
build_supergroup(std::map<GroupId, GroupSnapshot>& leaves, std::size_t fanout, SeededRng& rng)
{
  if (leaves.empty()) {
    throw DomainError("a supergroup needs at least one child group");
  }

  Supergroup sg;
  std::vector<std::uint32_t> layer;
  for (const auto& [gid, g] : leaves) {
    layer.push_back(gid.value());
  }

  std::size_t level = 2;
  for (;;) {
    const auto width = fanout == 0 ? layer.size() : fanout;
    std::vector<std::uint32_t> next;
    for (std::size_t off = 0; off < layer.size(); off += width) {
      SuperNode node;
      node.level = level;
      node.children.assign(layer.begin() + static_cast<std::ptrdiff_t>(off),
                           layer.begin() + static_cast<std::ptrdiff_t>(
                                             std::min(layer.size(), off + width)));
      for (auto c : node.children) {
        node.representatives[c] = representative_of(sg, level, c, leaves);
      }
      if (node.children.size() > 1) {
        std::vector<Digest> keys;
        for (auto c : node.children) {
          keys.push_back(child_key(sg, node, c, leaves));
        }
        node.slots = slot_group(node.children, keys, rng.next_bytes());
      }
      const auto idx = sg.nodes.size();
      for (auto c : node.children) {
        if (level == 2) {
          sg.leaf_parent[GroupId{ c }] = idx;
        } else {
          sg.nodes[c].parent = idx;
        }
      }
      sg.nodes.push_back(std::move(node));
      next.push_back(static_cast<std::uint32_t>(idx));
    }
    if (next.size() == 1) {
      sg.root = next.front();
      break;
    }
    layer = std::move(next);
    level++;
  }

  distribute_top(sg, leaves, nullptr);
  return sg;
}

void
cascade_propagate(Supergroup& sg,
                  std::map<GroupId, GroupSnapshot>& leaves,
                  GroupId changed,
                  ProtocolContext& ctx)
{
  auto& net = ctx.net;
  std::optional<std::size_t> at = sg.leaf_parent.at(changed);
  std::uint32_t child = changed.value();

  while (at) {
    auto& node = sg.nodes[*at];
    if (!node.slots) {
      child = static_cast<std::uint32_t>(*at);
      at = node.parent;
      continue; // single-child node: its key is the child's key
    }

    auto& slots = *node.slots;
    const MemberId slot{ child };
    const auto fresh = child_key(sg, node, child, leaves);
    const auto old_nonce = slots.shared_nonces.at(slot);
    const Nonce next_nonce{ fresh, slot, old_nonce.version + 1 };
    const auto old_super = slots.group_key;
    const auto excluded = slots.ring.succ(slot); // lacks the changed child's key
    const std::array<MemberId, 1> index{ slot };
    const auto rep = [&](MemberId s) { return node.representatives.at(s.value()); };

    GroupSnapshot before = slots;
    auto& own = slots.member(slot);
    own.hold(next_nonce);
    own.set_key(net.hash(KdfLabel::SupergroupKey, old_super, fresh, "cascade.rekey"));

    std::vector<MemberId> addressed;
    for (auto id : slots.ring.order()) {
      if (id != slot && id != excluded) {
        addressed.push_back(id);
      }
    }
    if (!addressed.empty()) {
      std::vector<MemberId> reps;
      for (auto id : addressed) {
        reps.push_back(rep(id));
      }
      const auto k = net.multicast_key(before.member(slot), index, "cascade.update");
      Item item = Item::key(fresh);
      item.a = slot.value();
      item.b = next_nonce.version;
      const auto msg =
        net.send(Mode::Broadcast, rep(slot), reps, { slot }, { item }, *k, "cascade.update");
      for (auto id : addressed) {
        const auto rk = net.multicast_key(before.member(id), index, "cascade.update");
        const auto payload = rk ? net.receive(msg, rep(id), *rk) : std::nullopt;
        if (!payload) {
          throw ProtocolAbort("slot " + to_string(id) + " missed the child key update");
        }
        const auto& got = (*payload)[0];
        auto& m = slots.member(id);
        m.hold({ got.value, MemberId{ got.a }, got.b });
        m.set_key(net.hash(KdfLabel::SupergroupKey, old_super, got.value, "cascade.rekey"));
      }
    }

    if (excluded != slot) {
      // The slot lacking the child's key gets the new super key directly, under a
      // nonce both ends hold: the excluded slot lacks only n_slot.
      std::optional<MemberId> common;
      for (auto id : slots.ring.order()) {
        if (id != slot && id != slots.ring.pred(slot)) {
          common = id;
          break;
        }
      }
      std::vector<MemberId> hint;
      Digest k = old_super;
      Digest rk = old_super;
      if (common) {
        hint = { *common };
        k = *net.multicast_key(before.member(slot), hint, "cascade.deliver");
        rk = *net.multicast_key(before.member(excluded), hint, "cascade.deliver");
      }
      const auto msg = net.send(Mode::Unicast, rep(slot), { rep(excluded) }, hint,
                                { Item::key(own.group_key) }, k, "cascade.deliver");
      const auto payload = net.receive(msg, rep(excluded), rk);
      if (!payload) {
        throw ProtocolAbort("slot " + to_string(excluded) + " missed the super key");
      }
      slots.member(excluded).set_key((*payload)[0].value);
    }

    slots.shared_nonces[slot] = next_nonce;
    slots.group_key = kdf2(KdfLabel::SupergroupKey, old_super, fresh);
    node.epoch++;

    child = static_cast<std::uint32_t>(*at);
    at = node.parent;
  }

  distribute_top(sg, leaves, &ctx);
}

std::vector<Violation>
check_cascade(const Supergroup& sg, const std::map<GroupId, GroupSnapshot>& leaves)
{
  std::vector<Violation> out;
  for (std::size_t i = 0; i < sg.nodes.size(); i++) {
    const auto& node = sg.nodes[i];
    if (!node.slots) {
      continue;
    }
    for (auto& v : check_ring_invariant(*node.slots)) {
      v.what = "node " + std::to_string(i) + ": " + v.what;
      out.push_back(std::move(v));
    }
    for (auto c : node.children) {
      const auto& held = node.slots->shared_nonces.at(MemberId{ c }).value;
      if (held != child_key(sg, node, c, leaves)) {
        out.push_back({ MemberId{ c }, "node " + std::to_string(i) + " holds a stale child key" });
      }
    }
  }
  const auto& top = sg.top_key(leaves);
  for (const auto& [gid, g] : leaves) {
    for (const auto& [id, m] : g.members) {
      if (!m.top_key || *m.top_key != top) {
        out.push_back({ id, "top key disagrees in " + to_string(gid) });
      }
    }
  }
  return out;
}

} // namespace sgrs
