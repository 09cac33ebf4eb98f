#include "sgrs/group.hpp"

#include <algorithm>

namespace sgrs {

std::string
to_string(GroupId id)
{
  return "G" + std::to_string(id.value());
}

GroupRing::GroupRing(std::vector<MemberId> order)
  : _order(std::move(order))
{
  auto sorted = _order;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("ring contains a duplicate id");
  }
}

std::size_t
GroupRing::index_of(MemberId id) const
{
  const auto it = std::find(_order.begin(), _order.end(), id);
  if (it == _order.end()) {
    throw DomainError("member " + to_string(id) + " is not in the ring");
  }
  return static_cast<std::size_t>(it - _order.begin());
}

MemberId
GroupRing::pred(MemberId id) const
{
  const auto i = index_of(id);
  return _order[(i + _order.size() - 1) % _order.size()];
}

MemberId
GroupRing::succ(MemberId id) const
{
  const auto i = index_of(id);
  return _order[(i + 1) % _order.size()];
}

bool
GroupRing::contains(MemberId id) const
{
  return std::find(_order.begin(), _order.end(), id) != _order.end();
}

void
GroupRing::insert_after(MemberId anchor, std::span<const MemberId> ids)
{
  for (auto id : ids) {
    if (contains(id)) {
      throw DomainError("member " + to_string(id) + " already in the ring");
    }
  }
  const auto pos = _order.begin() + static_cast<std::ptrdiff_t>(index_of(anchor) + 1);
  _order.insert(pos, ids.begin(), ids.end());
}

void
GroupRing::remove(MemberId id)
{
  _order.erase(_order.begin() + static_cast<std::ptrdiff_t>(index_of(id)));
}

const Nonce&
MemberState::own_nonce() const
{
  const auto* n = find(id);
  if (n == nullptr) {
    throw DomainError("member " + to_string(id) + " lost its own nonce");
  }
  return *n;
}

const Nonce*
MemberState::find(MemberId origin) const
{
  const auto it = state.find(origin);
  return it == state.end() ? nullptr : &it->second;
}

void
MemberState::hold(const Nonce& n)
{
  state[n.origin] = n;
  recall.insert(n.value);
}

void
MemberState::set_key(const Digest& key)
{
  group_key = key;
  recall.insert(key);
}

MemberState&
GroupSnapshot::member(MemberId id)
{
  const auto it = members.find(id);
  if (it == members.end()) {
    throw DomainError("no member " + to_string(id) + " in " + to_string(this->id));
  }
  return it->second;
}

const MemberState&
GroupSnapshot::member(MemberId id) const
{
  const auto it = members.find(id);
  if (it == members.end()) {
    throw DomainError("no member " + to_string(id) + " in " + to_string(this->id));
  }
  return it->second;
}

std::optional<std::vector<Nonce>>
select_nonces(const MemberState& m, std::span<const MemberId> ids)
{
  if (ids.empty()) {
    throw DomainError("multicast index set is empty");
  }
  std::vector<Nonce> out;
  out.reserve(ids.size());
  for (auto id : ids) {
    const auto* n = m.find(id);
    if (n == nullptr) {
      return std::nullopt;
    }
    out.push_back(*n);
  }
  return out;
}

std::optional<Digest>
derive_multicast_key(const MemberState& m, std::span<const MemberId> ids)
{
  const auto nonces = select_nonces(m, ids);
  if (!nonces) {
    return std::nullopt;
  }
  return kdf2(KdfLabel::MulticastKey, xor_combine(*nonces), m.group_key);
}

namespace {

std::uint64_t
binomial(std::uint32_t n, std::uint32_t k)
{
  if (k > n) {
    return 0;
  }
  std::uint64_t r = 1;
  for (std::uint32_t i = 1; i <= k; i++) {
    r = r * (n - k + i) / i;
  }
  return r;
}

} // namespace

KeyCounts
count_keys_closed_form(std::uint32_t n)
{
  if (n < 3) {
    throw DomainError("key count formulas need N >= 3");
  }
  if (n > 62) {
    throw DomainError("key count overflows 64 bits for N > 62");
  }

  // Odd branch sums to k = N-2 and adds 1 to Z; even branch sums to k = N-1.
  const bool odd = (n % 2) == 1;
  const auto last = odd ? n - 2 : n - 1;

  KeyCounts c;
  for (std::uint32_t k = 1; k <= last; k++) {
    c.w += binomial(n, k);
  }
  const auto z_last = odd ? n - 2 : n - 1;
  for (std::uint32_t k = 1; k <= z_last; k++) {
    c.z += binomial(n - 1, k);
  }
  if (odd) {
    c.z += 1;
  }
  return c;
}

BruteCounts
count_keys_bruteforce(const GroupSnapshot& g)
{
  const auto& ids = g.ring.order();
  const auto n = ids.size();
  if (n > bruteforce_limit) {
    throw DomainError("brute-force key enumeration is limited to 12 members");
  }

  BruteCounts out;
  for (auto id : ids) {
    out.z_per_member[id] = 0;
  }

  std::vector<MemberId> subset;
  for (std::uint32_t mask = 1; mask < (1u << n); mask++) {
    subset.clear();
    for (std::size_t b = 0; b < n; b++) {
      if (mask & (1u << b)) {
        subset.push_back(ids[b]);
      }
    }

    std::optional<Digest> agreed;
    std::size_t holders = 0;
    for (auto id : ids) {
      const auto key = derive_multicast_key(g.member(id), subset);
      if (!key) {
        continue;
      }
      if (agreed && *agreed != *key) {
        throw ProtocolAbort("multicast key disagreement in " + to_string(g.id));
      }
      agreed = key;
      holders++;
      out.z_per_member[id]++;
    }
    if (holders >= 2) {
      out.w_semantic++;
    }
  }
  return out;
}

std::vector<Violation>
check_ring_invariant(const GroupSnapshot& g)
{
  std::vector<Violation> out;
  if (g.ring.size() < 2) {
    out.push_back({ MemberId{}, "ring has fewer than 2 members" });
  }
  if (g.members.size() != g.ring.size()) {
    out.push_back({ MemberId{}, "member table and ring disagree in size" });
  }

  for (auto id : g.ring.order()) {
    const auto it = g.members.find(id);
    if (it == g.members.end()) {
      out.push_back({ id, "ring member has no state" });
      continue;
    }
    const auto& m = it->second;
    const auto pred = g.ring.pred(id);

    if (m.state.count(pred) != 0) {
      out.push_back({ id, "holds predecessor " + to_string(pred) + "'s nonce" });
    }
    if (m.find(id) == nullptr) {
      out.push_back({ id, "missing own nonce" });
    }
    for (auto other : g.ring.order()) {
      if (other == pred) {
        continue;
      }
      const auto* held = m.find(other);
      if (held == nullptr) {
        out.push_back({ id, "missing nonce of " + to_string(other) });
        continue;
      }
      const auto truth = g.shared_nonces.find(other);
      if (truth == g.shared_nonces.end() || truth->second != *held) {
        out.push_back({ id, "stale nonce of " + to_string(other) });
      }
    }
    for (const auto& [origin, nonce] : m.state) {
      if (!g.ring.contains(origin)) {
        out.push_back({ id, "holds nonce of non-member " + to_string(origin) });
      }
    }
    if (m.group_key != g.group_key) {
      out.push_back({ id, "group key disagrees" });
    }
    if (m.ring != g.ring) {
      out.push_back({ id, "ring view disagrees" });
    }
  }
  return out;
}

GroupSnapshot
bootstrap_group(GroupId id, std::vector<MemberId> members, SeededRng& rng)
{
  if (members.size() < 2) {
    throw Refused("a group needs at least 2 members");
  }
  std::sort(members.begin(), members.end());

  GroupSnapshot g;
  g.id = id;
  g.ring = GroupRing(members);
  g.sponsor = members.front();
  for (auto m : members) {
    g.shared_nonces[m] = next_nonce(rng, m);
  }
  g.group_key = rng.next_bytes();

  for (auto m : members) {
    MemberState st;
    st.id = m;
    st.ring = g.ring;
    const auto pred = g.ring.pred(m);
    for (const auto& [origin, n] : g.shared_nonces) {
      if (origin != pred) {
        st.hold(n);
      }
    }
    st.set_key(g.group_key);
    g.members.emplace(m, std::move(st));
  }
  return g;
}

} // namespace sgrs
