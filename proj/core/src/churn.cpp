#include "sgrs/churn.hpp"

#include <algorithm>

namespace sgrs {

namespace {

constexpr std::uint64_t churn_stream = 0x4348524e; // "CHRN"

template<typename T>
const T&
pick(SeededRng& rng, const std::vector<T>& xs)
{
  return xs[rng.uniform(xs.size())];
}

std::size_t
between(SeededRng& rng, std::size_t lo, std::size_t hi)
{
  return lo + rng.uniform(hi - lo + 1);
}

MemberId
other_than(SeededRng& rng, const GroupRing& ring, const std::set<MemberId>& skip)
{
  std::vector<MemberId> pool;
  for (auto id : ring.order()) {
    if (skip.count(id) == 0) {
      pool.push_back(id);
    }
  }
  return pick(rng, pool);
}

} // namespace

std::vector<MembershipEvent>
run_churn(Simulation& sim, const ChurnConfig& cfg)
{
  SeededRng rng(cfg.seed ^ churn_stream);
  std::vector<MemberId> first;
  const auto base = sim.next_free_id().value();
  for (std::size_t i = 0; i < cfg.initial_size; i++) {
    first.push_back(MemberId{ base + static_cast<std::uint32_t>(i) });
  }
  sim.add_group(GroupId{ 1 }, first);

  std::vector<MembershipEvent> applied;
  while (applied.size() < cfg.events) {
    std::vector<GroupId> joinable, leavable, partitionable;
    for (const auto& [gid, g] : sim.groups()) {
      if (g.size() < cfg.size_cap) {
        joinable.push_back(gid);
      }
      if (g.size() > cfg.min_size) {
        leavable.push_back(gid);
      }
      if (g.size() >= 4 && g.size() >= cfg.min_size + 2) {
        partitionable.push_back(gid);
      }
    }
    std::vector<GroupId> live;
    std::size_t total = 0;
    for (const auto& [gid, g] : sim.groups()) {
      live.push_back(gid);
      total += g.size();
    }

    // Weighted choice; options that do not apply fall through to a join.
    const auto roll = rng.uniform(100);
    MembershipEvent e;
    if (roll < 30 && !leavable.empty()) {
      const auto& g = sim.group(pick(rng, leavable));
      e.kind = EventKind::Leave;
      e.group = g.id;
      e.members = { pick(rng, g.ring.order()) };
      e.sponsor = other_than(rng, g.ring, { e.members.front() });
    } else if (roll < 42 && !partitionable.empty()) {
      const auto& g = sim.group(pick(rng, partitionable));
      const auto most = std::min(g.size() / 2, g.size() - cfg.min_size);
      auto order = g.ring.order();
      const auto count = between(rng, 2, most);
      for (std::size_t i = 0; i < count; i++) {
        std::swap(order[i], order[i + rng.uniform(order.size() - i)]);
      }
      e.kind = EventKind::Partition;
      e.group = g.id;
      e.members.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
      std::sort(e.members.begin(), e.members.end());
      e.sponsor = other_than(rng, g.ring, { e.members.begin(), e.members.end() });
    } else if (roll < 54 && live.size() >= 2 && total <= cfg.size_cap) {
      auto pool = live;
      const auto width = pool.size() >= 3 && rng.uniform(2) == 0 ? 3 : 2;
      for (std::size_t i = 0; i < pool.size(); i++) {
        std::swap(pool[i], pool[i + rng.uniform(pool.size() - i)]);
      }
      pool.resize(width);
      std::sort(pool.begin(), pool.end());
      e.kind = EventKind::Merge;
      e.groups = pool;
      if (width == 2) {
        e.sponsor = pick(rng, sim.group(pool[0]).ring.order());
        e.sponsor_b = pick(rng, sim.group(pool[1]).ring.order());
      }
    } else if (roll < 66 && live.size() < cfg.max_groups) {
      e.kind = EventKind::Spawn;
      e.group = sim.next_free_group();
      const auto size = between(rng, cfg.min_size, cfg.min_size + 2);
      const auto base = sim.next_free_id().value();
      for (std::size_t i = 0; i < size; i++) {
        e.members.push_back(MemberId{ base + static_cast<std::uint32_t>(i) });
      }
    } else if (!joinable.empty()) {
      const auto& g = sim.group(pick(rng, joinable));
      e.kind = EventKind::Join;
      e.group = g.id;
      e.members = { sim.next_free_id() };
      e.sponsor = pick(rng, g.ring.order());
    } else {
      continue;
    }
    sim.apply(e);
    applied.push_back(std::move(e));
  }
  return applied;
}

} // namespace sgrs
