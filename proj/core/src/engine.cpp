#include "sgrs/engine.hpp"

#include <algorithm>

namespace sgrs {

namespace {

constexpr std::uint32_t auth_key_domain = 0x41555448; // "AUTH"

std::string
join_ids(const std::vector<MemberId>& ids)
{
  std::string out = "{";
  for (std::size_t i = 0; i < ids.size(); i++) {
    out += (i ? "," : "") + std::to_string(ids[i].value());
  }
  return out + "}";
}

Digest
auth_key(std::uint64_t seed)
{
  SeededRng r(seed ^ auth_key_domain);
  return r.next_bytes();
}

} // namespace

std::string_view
event_kind_name(EventKind k)
{
  switch (k) {
    case EventKind::Join:
      return "join";
    case EventKind::Leave:
      return "leave";
    case EventKind::Merge:
      return "merge";
    case EventKind::Partition:
      return "partition";
    case EventKind::Spawn:
      return "spawn";
  }
  return "?";
}

std::string
describe(const MembershipEvent& e)
{
  std::string out(event_kind_name(e.kind));
  if (e.kind == EventKind::Merge) {
    out += " ";
    for (std::size_t i = 0; i < e.groups.size(); i++) {
      out += (i ? "+" : "") + to_string(e.groups[i]);
    }
    return out;
  }
  out += " " + to_string(e.group) + " " + join_ids(e.members);
  if (e.sponsor) {
    out += " sponsor " + to_string(*e.sponsor);
  }
  return out;
}

Simulation::Simulation(std::uint64_t seed, SizeModel sizes, Mutation mutation)
  : _seed(seed)
  , _rng(seed)
  , _net(sizes, static_cast<std::uint32_t>(seed))
  , _auth(auth_key(seed))
  , _mutation(mutation)
{
}

const GroupSnapshot&
Simulation::group(GroupId id) const
{
  const auto it = _groups.find(id);
  if (it == _groups.end()) {
    throw DomainError("unknown group " + to_string(id));
  }
  return it->second;
}

ProtocolContext
Simulation::context()
{
  return { _net, _rng, _auth, _mutation };
}

std::optional<std::size_t>
Simulation::event_slot() const
{
  if (!_net.in_event()) {
    return std::nullopt;
  }
  return _net.current_event();
}

void
Simulation::record_epoch(GroupId group, std::size_t level, const Digest& key)
{
  if (level == 1) {
    auto& lineage = _lineage[group];
    if (std::find(lineage.begin(), lineage.end(), key) == lineage.end()) {
      lineage.push_back(key);
    }
  }
  if (_epoch_keys.insert(key).second) {
    _epochs.push_back({ event_slot(), group, level, key });
  }
}

void
Simulation::record_cascade_epochs()
{
  if (!_cascade) {
    return;
  }
  for (std::size_t i = 0; i < _cascade->nodes.size(); i++) {
    const auto& node = _cascade->nodes[i];
    if (node.slots) {
      record_epoch(GroupId{ static_cast<std::uint32_t>(i) }, node.level,
                   node.slots->group_key);
    }
  }
}

void
Simulation::claim_ids(const std::vector<MemberId>& ids)
{
  for (auto id : ids) {
    if (_seen.count(id) != 0) {
      throw Refused("member id " + to_string(id) + " was already used");
    }
  }
  for (auto id : ids) {
    _seen.insert(id);
    _auth.enroll(id);
  }
}

void
Simulation::add_group(GroupId id, std::vector<MemberId> members)
{
  if (_groups.count(id) != 0) {
    throw DomainError("group " + to_string(id) + " already exists");
  }
  if (_cascade) {
    throw Refused("groups cannot be added once the cascade is built");
  }
  std::set<MemberId> distinct(members.begin(), members.end());
  if (distinct.size() != members.size()) {
    throw DomainError("duplicate member in " + to_string(id));
  }
  auto g = bootstrap_group(id, members, _rng);
  claim_ids(members);
  record_epoch(id, 1, g.group_key);
  _groups.emplace(id, std::move(g));
}

void
Simulation::build_cascade(std::size_t fanout)
{
  if (_cascade) {
    throw DomainError("cascade already built");
  }
  _cascade = build_supergroup(_groups, fanout, _rng);
  record_cascade_epochs();
}

std::optional<MemberState>
Simulation::find_member(MemberId id) const
{
  for (const auto& [gid, g] : _groups) {
    if (const auto it = g.members.find(id); it != g.members.end()) {
      return it->second;
    }
  }
  for (const auto& d : _departures) {
    for (const auto& m : d.members) {
      if (m.id == id) {
        return m;
      }
    }
  }
  return std::nullopt;
}

MemberId
Simulation::next_free_id() const
{
  return MemberId{ _seen.empty() ? 1 : _seen.rbegin()->value() + 1 };
}

GroupId
Simulation::next_free_group() const
{
  std::uint32_t top = 0;
  for (const auto& [gid, g] : _groups) {
    top = std::max(top, gid.value());
  }
  for (const auto& a : _admissions) {
    top = std::max(top, a.group.value());
  }
  for (const auto& d : _departures) {
    top = std::max(top, d.group.value());
  }
  return GroupId{ top + 1 };
}

void
Simulation::guard_representatives(GroupId gid, const std::set<MemberId>& leaving) const
{
  if (!_cascade) {
    return;
  }
  const auto& node = _cascade->nodes.at(_cascade->leaf_parent.at(gid));
  const auto rep = node.representatives.at(gid.value());
  if (leaving.count(rep) != 0) {
    throw Refused("member " + to_string(rep) + " represents " + to_string(gid) +
                  " in the cascade and cannot leave");
  }
}

std::vector<Violation>
Simulation::check_all() const
{
  std::vector<Violation> out;
  for (const auto& [gid, g] : _groups) {
    for (auto& v : check_ring_invariant(g)) {
      v.what = to_string(gid) + ": " + v.what;
      out.push_back(std::move(v));
    }
  }
  if (_cascade) {
    for (auto& v : check_cascade(*_cascade, _groups)) {
      v.what = "cascade: " + v.what;
      out.push_back(std::move(v));
    }
  }
  return out;
}

EventOutcome
Simulation::apply(const MembershipEvent& e)
{
  // Validate before the network opens an event, so a refusal leaves no trace.
  switch (e.kind) {
    case EventKind::Join:
    case EventKind::Leave:
    case EventKind::Partition:
      group(e.group);
      if (e.members.empty()) {
        throw DomainError(std::string(event_kind_name(e.kind)) + " names no member");
      }
      break;
    case EventKind::Merge:
      if (_cascade) {
        throw Refused("merge is not supported inside a cascade");
      }
      if (e.groups.size() < 2) {
        throw DomainError("merge needs at least 2 groups");
      }
      for (auto gid : e.groups) {
        group(gid);
      }
      if (std::set<GroupId>(e.groups.begin(), e.groups.end()).size() != e.groups.size()) {
        throw DomainError("merge names a group twice");
      }
      break;
    case EventKind::Spawn:
      if (_cascade) {
        throw Refused("spawn is not supported inside a cascade");
      }
      if (_groups.count(e.group) != 0) {
        throw DomainError("group " + to_string(e.group) + " already exists");
      }
      break;
  }

  EventOutcome out;
  out.label = describe(e);
  out.index = _net.begin_event(out.label);
  switch (e.kind) {
    case EventKind::Join:
      do_join(e, out);
      break;
    case EventKind::Leave:
      do_leave(e, out);
      break;
    case EventKind::Partition:
      do_partition(e, out);
      break;
    case EventKind::Merge:
      do_merge(e, out);
      break;
    case EventKind::Spawn:
      do_spawn(e, out);
      break;
  }

  if (_cascade && e.kind != EventKind::Merge && e.kind != EventKind::Spawn) {
    auto ctx = context();
    cascade_propagate(*_cascade, _groups, e.group, ctx);
    record_cascade_epochs();
  }

  out.violations = check_all();
  _outcomes.push_back(out);
  return out;
}

void
Simulation::do_join(const MembershipEvent& e, EventOutcome& out)
{
  const auto& g = group(e.group);
  if (e.members.size() != 1) {
    throw DomainError("join admits exactly one member");
  }
  const auto joiner = e.members.front();
  const auto sponsor = e.sponsor.value_or(g.sponsor);
  claim_ids({ joiner });

  auto ctx = context();
  const auto tag = issue_join_tag(g, joiner, sponsor, ctx);
  auto next = run_join(g, tag, ctx);

  _admissions.push_back({ out.index, e.group, "join", { joiner }, _lineage[e.group] });
  record_epoch(e.group, 1, next.group_key);
  _groups[e.group] = std::move(next);
}

void
Simulation::do_leave(const MembershipEvent& e, EventOutcome& out)
{
  const auto& g = group(e.group);
  if (e.members.size() != 1) {
    throw DomainError("leave removes exactly one member; use partition for more");
  }
  const auto d = e.members.front();
  if (!g.ring.contains(d)) {
    throw DomainError("member " + to_string(d) + " is not in " + to_string(e.group));
  }
  guard_representatives(e.group, { d });
  const auto sponsor = e.sponsor.value_or(default_leave_sponsor(g, d));

  auto ctx = context();
  auto result = run_leave(g, d, sponsor, ctx);
  _departures.push_back({ out.index, e.group, std::move(result.departed), false });
  record_epoch(e.group, 1, result.group.group_key);
  _groups[e.group] = std::move(result.group);
}

void
Simulation::do_partition(const MembershipEvent& e, EventOutcome& out)
{
  const auto& g = group(e.group);
  const std::set<MemberId> departing(e.members.begin(), e.members.end());
  for (auto id : departing) {
    if (!g.ring.contains(id)) {
      throw DomainError("member " + to_string(id) + " is not in " + to_string(e.group));
    }
  }
  guard_representatives(e.group, departing);
  const auto sponsor = e.sponsor.value_or(default_partition_sponsor(g, departing));

  std::string index = "partition index:";
  for (auto id : partition_index(g.ring, departing)) {
    index += " " + to_string(id);
  }
  out.notes.push_back(index);

  auto ctx = context();
  auto result = run_partition(g, departing, sponsor, ctx);
  _departures.push_back({ out.index, e.group, std::move(result.departed), true });
  record_epoch(e.group, 1, result.group.group_key);
  _groups[e.group] = std::move(result.group);
}

void
Simulation::do_merge(const MembershipEvent& e, EventOutcome& out)
{
  std::vector<GroupSnapshot> operands;
  for (auto gid : e.groups) {
    operands.push_back(group(gid));
  }

  auto ctx = context();
  GroupSnapshot merged;
  std::vector<std::vector<std::pair<GroupId, GroupId>>> bracket;
  if (operands.size() == 2 && (e.sponsor || e.sponsor_b)) {
    auto& a = operands[0].id < operands[1].id ? operands[0] : operands[1];
    auto& b = operands[0].id < operands[1].id ? operands[1] : operands[0];
    merged = run_merge_pair(a, b, ctx, e.sponsor, e.sponsor_b);
    bracket.push_back({ { a.id, b.id } });
  } else {
    auto result = run_merge_multi(operands, ctx);
    merged = std::move(result.group);
    bracket = std::move(result.bracket);
  }

  // Replay the bracket to name what each side must not learn.
  std::map<GroupId, std::vector<MemberId>> members;
  std::map<GroupId, Digest> keys;
  for (const auto& g : operands) {
    members[g.id] = g.ring.order();
    keys[g.id] = g.group_key;
  }
  std::string plan = "merge bracket:";
  for (const auto& round : bracket) {
    plan += " [";
    for (const auto& [a, b] : round) {
      plan += " " + to_string(a) + "<-" + to_string(b);
      std::vector<Digest> b_history;
      for (const auto& k : _lineage[b]) {
        if (k != keys[b]) {
          b_history.push_back(k);
        }
      }
      _admissions.push_back({ out.index, a, "merge", members[a], b_history });
      _admissions.push_back({ out.index, b, "merge", members[b], _lineage[a] });

      auto& la = _lineage[a];
      for (const auto& k : _lineage[b]) {
        if (std::find(la.begin(), la.end(), k) == la.end()) {
          la.push_back(k);
        }
      }
      members[a].insert(members[a].end(), members[b].begin(), members[b].end());
      keys[a] = keys[b];
      _lineage.erase(b);
    }
    plan += " ]";
  }
  out.notes.push_back(plan);

  for (auto gid : e.groups) {
    _groups.erase(gid);
  }
  record_epoch(merged.id, 1, merged.group_key);
  _groups[merged.id] = std::move(merged);
}

void
Simulation::do_spawn(const MembershipEvent& e, EventOutcome&)
{
  std::set<MemberId> distinct(e.members.begin(), e.members.end());
  if (distinct.size() != e.members.size()) {
    throw DomainError("duplicate member in " + to_string(e.group));
  }
  auto g = bootstrap_group(e.group, e.members, _rng);
  claim_ids(e.members);
  record_epoch(e.group, 1, g.group_key);
  _groups.emplace(e.group, std::move(g));
}

} // namespace sgrs
