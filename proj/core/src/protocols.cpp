#include "sgrs/protocols.hpp"

#include <algorithm>
#include <array>

namespace sgrs {

namespace {

void
require_member(const GroupSnapshot& g, MemberId id, std::string_view role)
{
  if (!g.ring.contains(id)) {
    throw DomainError(std::string(role) + " " + to_string(id) + " is not in " +
                      to_string(g.id));
  }
}

std::vector<MemberId>
all_except(const GroupRing& ring, std::initializer_list<MemberId> skip)
{
  std::vector<MemberId> out;
  for (auto id : ring.order()) {
    if (std::find(skip.begin(), skip.end(), id) == skip.end()) {
      out.push_back(id);
    }
  }
  return out;
}

void
refresh_views(GroupSnapshot& g)
{
  for (auto& [id, m] : g.members) {
    m.ring = g.ring;
  }
}

MemberId
survivor_successor(const GroupRing& ring, MemberId from, const std::set<MemberId>& gone)
{
  auto cur = ring.succ(from);
  while (gone.count(cur) != 0) {
    cur = ring.succ(cur);
  }
  return cur;
}

// Payload from a message addressed to `who`, opened with the key `who` derives.
std::optional<Payload>
receive_multicast(Network& net,
                  std::size_t msg,
                  const MemberState& who,
                  std::span<const MemberId> index,
                  std::string_view step)
{
  const auto key = net.multicast_key(who, index, step);
  if (!key) {
    return std::nullopt;
  }
  return net.receive(msg, who.id, *key);
}

} // namespace

GroupSnapshot
run_join(const GroupSnapshot& g, const JoinTag& tag, ProtocolContext& ctx)
{
  auto& net = ctx.net;
  const auto s = tag.sponsor;
  const auto j = tag.joiner;
  require_member(g, s, "sponsor");
  if (g.ring.contains(j)) {
    throw Refused("member " + to_string(j) + " is already in " + to_string(g.id));
  }
  if (g.size() < 2) {
    throw Refused("join needs a group of at least 2");
  }

  GroupSnapshot out = g;
  const auto o = g.ring.succ(s);
  const auto p = g.ring.pred(s);
  const auto old_key = g.group_key;
  const std::array<MemberId, 1> sponsor_index{ s };

  // 1: the joiner forwards the signed request; everyone holding n_s can open it.
  const auto msg1 = net.forward(Mode::Broadcast, j, all_except(g.ring, { o }),
                                { s }, net.private_boxes().at(tag.request_box).box,
                                net.sealing_key({ true, tag.request_box }),
                                tag.request_bytes, "join.request");

  Digest next_key;
  Digest credential;
  Nonce joiner_nonce;
  for (auto id : all_except(g.ring, { o })) {
    auto& m = out.member(id);
    const auto payload = receive_multicast(net, msg1, g.member(id), sponsor_index,
                                           "join.request");
    if (!payload || payload->size() != 2) {
      throw ProtocolAbort("member " + to_string(id) + " could not read the join request");
    }
    joiner_nonce = (*payload)[0].as_nonce();
    credential = (*payload)[1].value;
    net.count_auth("join.request");
    const std::array<Nonce, 1> signed_part{ joiner_nonce };
    if (joiner_nonce.origin != j || !ctx.auth.verify(signed_part, j, credential)) {
      throw ProtocolAbort("join request signature does not verify");
    }

    // 2: rekey with the sponsor's nonce.
    next_key = ctx.mutation == Mutation::JoinKeyMix
                 ? old_key
                 : net.hash(KdfLabel::GroupKeyJoin, old_key, m.find(s)->value,
                            "join.rekey");
    m.hold(joiner_nonce);
    m.remember(credential);
    m.set_key(next_key);
  }

  // 3: sponsor -> joiner, under a key only the request holders and the joiner know.
  const auto welcome_key =
    net.hash(KdfLabel::MulticastKey, joiner_nonce.value, credential, "join.welcome");
  Payload welcome{ Item::key(next_key) };
  for (auto id : g.ring.order()) {
    welcome.push_back(Item::id(id));
  }
  const auto msg3 =
    net.send(Mode::Unicast, s, { j }, {}, welcome, welcome_key, "join.welcome");

  MemberState joiner;
  joiner.id = j;
  joiner.hold(tag.joiner_nonce);
  joiner.remember(tag.credential);
  joiner.private_boxes = { tag.state_box, tag.request_box };
  {
    const auto k = net.hash(KdfLabel::MulticastKey, tag.joiner_nonce.value,
                            tag.credential, "join.welcome");
    const auto payload = net.receive(msg3, j, k);
    if (!payload) {
      throw ProtocolAbort("joiner could not open the welcome message");
    }
    joiner.set_key((*payload)[0].value);
    const auto state = net.open_private(tag.state_box, joiner.group_key);
    if (!state) {
      throw ProtocolAbort("joiner could not open its state vector");
    }
    for (const auto& item : *state) {
      joiner.hold(item.as_nonce());
    }
  }

  // 4: pred(s) hands n_s to the old successor, which can then rekey itself.
  {
    const bool pair = (p == o);
    const auto sender = pair ? s : p;
    const Payload handoff{ Item::nonce(*out.member(sender).find(s)), Item::id(j) };
    std::optional<Digest> key;
    std::vector<MemberId> hint;
    if (pair) {
      // No nonce is shared by both ends of a 2-ring; fall back to the bare key.
      key = old_key;
    } else {
      hint = { p };
      key = net.multicast_key(g.member(p), hint, "join.handoff");
    }
    const auto msg4 =
      net.send(Mode::Unicast, sender, { o }, hint, handoff, *key, "join.handoff");

    const auto recv_key =
      pair ? std::optional<Digest>(old_key)
           : net.multicast_key(g.member(o), hint, "join.handoff");
    const auto payload = recv_key ? net.receive(msg4, o, *recv_key) : std::nullopt;
    if (!payload) {
      throw ProtocolAbort("successor could not open the sponsor nonce hand-off");
    }
    auto& m = out.member(o);
    const auto sponsor_nonce = (*payload)[0].as_nonce();
    m.hold(sponsor_nonce);
    // 5
    m.set_key(ctx.mutation == Mutation::JoinKeyMix
                ? old_key
                : net.hash(KdfLabel::GroupKeyJoin, old_key, sponsor_nonce.value,
                           "join.handoff"));
  }

  // Ground truth, computed independently of what members derived.
  out.shared_nonces[j] = tag.joiner_nonce;
  out.group_key = ctx.mutation == Mutation::JoinKeyMix
                    ? old_key
                    : kdf2(KdfLabel::GroupKeyJoin, old_key, g.shared_nonces.at(s).value);
  const std::array<MemberId, 1> ins{ j };
  out.ring.insert_after(s, ins);
  out.members.emplace(j, std::move(joiner));
  refresh_views(out);
  return out;
}

MemberId
default_leave_sponsor(const GroupSnapshot& g, MemberId departing)
{
  const auto p = g.ring.pred(departing);
  const auto s = g.ring.succ(departing);
  auto sorted = g.ring.order();
  std::sort(sorted.begin(), sorted.end());
  for (auto id : sorted) {
    if (id != departing && id != p && id != s) {
      return id;
    }
  }
  return std::min(p, s);
}

RemovalOutcome
run_leave(const GroupSnapshot& g, MemberId departing, MemberId sponsor, ProtocolContext& ctx)
{
  auto& net = ctx.net;
  require_member(g, departing, "departing member");
  require_member(g, sponsor, "sponsor");
  if (sponsor == departing) {
    throw Refused("the departing member cannot sponsor its own leave");
  }
  if (g.size() < 3) {
    throw Refused("leave would shrink " + to_string(g.id) + " below 2 members");
  }

  const bool skip = ctx.mutation == Mutation::LeaveRehash;
  const auto d = departing;
  const auto p = g.ring.pred(d);
  const std::array<MemberId, 1> index{ p };
  const std::set<MemberId> gone{ d };
  const auto r = ctx.rng.next_bytes();

  GroupSnapshot out = g;
  RemovalOutcome result;
  result.departed.push_back(g.member(d));
  out.members.erase(d);
  out.ring.remove(d);

  const auto survivors = out.ring.order();
  const auto old_index_key = net.multicast_key(g.member(sponsor), index, "leave.notice");
  if (!old_index_key) {
    throw ProtocolAbort("sponsor cannot derive the leave multicast key");
  }

  // 1: n_random to the survivors under K_{pred(departing)}.
  std::vector<MemberId> addressed;
  for (auto id : survivors) {
    if (id != sponsor) {
      addressed.push_back(id);
    }
  }
  const Payload notice{ Item::random(r), Item::id(d) };
  const auto msg1 = net.send(Mode::Broadcast, sponsor, addressed, { p }, notice,
                             *old_index_key, "leave.notice");

  // 2: each survivor updates n_{pred}, then the sponsor nonce, then the key.
  for (auto id : survivors) {
    auto& m = out.member(id);
    Digest got;
    if (id == sponsor) {
      got = r;
      m.remember(r);
    } else {
      const auto payload = receive_multicast(net, msg1, g.member(id), index, "leave.notice");
      if (!payload) {
        throw ProtocolAbort("survivor " + to_string(id) + " missed the leave notice");
      }
      got = (*payload)[0].value;
      m.remember(got);
    }

    if (m.find(p) != nullptr) {
      if (m.find(d) != nullptr) {
        if (!skip) {
          m.hold(net.rehash(*m.find(p), m.find(d)->value, "leave.pred-rehash"));
        }
      } else {
        m.state.erase(p); // the new successor of p cannot follow the update
      }
    }
    m.state.erase(d);

    if (m.find(sponsor) != nullptr) {
      const auto sponsor_nonce =
        skip ? *m.find(sponsor)
             : net.rehash(*m.find(sponsor), got, "leave.sponsor-rehash");
      m.hold(sponsor_nonce);
      m.set_key(net.hash(KdfLabel::GroupKeyLeave, sponsor_nonce.value, got, "leave.rekey"));
    }
  }

  // 3: the sponsor's successor cannot derive the key; send it with the surviving
  // membership under the old index key.
  const auto next = survivor_successor(g.ring, sponsor, gone);
  const auto& key = out.member(sponsor).group_key;
  if (next != sponsor) {
    Payload deliver{ Item::key(key) };
    for (auto id : survivors) {
      deliver.push_back(Item::id(id));
    }
    const auto msg3 = net.send(Mode::Unicast, sponsor, { next }, { p }, deliver,
                               *old_index_key, "leave.deliver");
    const auto payload = receive_multicast(net, msg3, g.member(next), index, "leave.deliver");
    if (!payload) {
      throw ProtocolAbort("sponsor successor could not open the new key");
    }
    out.member(next).set_key((*payload)[0].value);
  }

  auto& truth = out.shared_nonces;
  if (!skip) {
    truth[p] = rehash(truth.at(p), g.shared_nonces.at(d).value);
    truth[sponsor] = rehash(truth.at(sponsor), r);
  }
  truth.erase(d);
  out.group_key = kdf2(KdfLabel::GroupKeyLeave, truth.at(sponsor).value, r);
  out.sponsor = sponsor;
  refresh_views(out);
  result.group = std::move(out);
  return result;
}

std::vector<MemberId>
partition_index(const GroupRing& ring, const std::set<MemberId>& departing)
{
  std::set<MemberId> preds;
  for (auto id : ring.order()) {
    if (departing.count(id) == 0) {
      preds.insert(ring.pred(id));
    }
  }
  std::vector<MemberId> out;
  for (auto id : ring.order()) {
    if (preds.count(id) == 0) {
      out.push_back(id);
    }
  }
  return out;
}

MemberId
default_partition_sponsor(const GroupSnapshot& g, const std::set<MemberId>& departing)
{
  auto sorted = g.ring.order();
  std::sort(sorted.begin(), sorted.end());
  for (auto id : sorted) {
    if (departing.count(id) == 0) {
      return id;
    }
  }
  throw Refused("no surviving member to sponsor the partition");
}

namespace {

struct Block
{
  MemberId pred; // surviving member before the block
  MemberId tail; // departing member adjacent to the next survivor
};

std::vector<Block>
departing_blocks(const GroupRing& ring, const std::set<MemberId>& departing)
{
  std::vector<Block> out;
  for (auto id : ring.order()) {
    if (departing.count(id) != 0 || departing.count(ring.succ(id)) == 0) {
      continue;
    }
    auto tail = ring.succ(id);
    while (departing.count(ring.succ(tail)) != 0) {
      tail = ring.succ(tail);
    }
    out.push_back({ id, tail });
  }
  return out;
}

} // namespace

RemovalOutcome
run_partition(const GroupSnapshot& g,
              const std::set<MemberId>& departing,
              MemberId sponsor,
              ProtocolContext& ctx)
{
  auto& net = ctx.net;
  if (departing.empty()) {
    throw DomainError("partition with no departing members");
  }
  for (auto id : departing) {
    require_member(g, id, "departing member");
  }
  require_member(g, sponsor, "sponsor");
  if (departing.count(sponsor) != 0) {
    throw Refused("the sponsor cannot be part of the departing set");
  }
  if (g.size() - departing.size() < 2) {
    throw Refused("partition would leave fewer than 2 members in " + to_string(g.id));
  }

  const bool skip_g = ctx.mutation == Mutation::PartitionG;
  const auto index = partition_index(g.ring, departing);
  const auto blocks = departing_blocks(g.ring, departing);
  const auto r = ctx.rng.next_bytes();

  GroupSnapshot out = g;
  RemovalOutcome result;
  for (auto id : g.ring.order()) {
    if (departing.count(id) != 0) {
      result.departed.push_back(g.member(id));
      out.members.erase(id);
      out.ring.remove(id);
    }
  }
  const auto survivors = out.ring.order();

  const auto old_index_key = net.multicast_key(g.member(sponsor), index, "partition.notice");
  if (!old_index_key) {
    throw ProtocolAbort("sponsor cannot derive the partition multicast key");
  }

  Payload notice{ Item::random(r) };
  for (auto id : departing) {
    notice.push_back(Item::id(id));
  }
  std::vector<MemberId> addressed;
  for (auto id : survivors) {
    if (id != sponsor) {
      addressed.push_back(id);
    }
  }
  const auto msg1 = net.send(Mode::Broadcast, sponsor, addressed, index, notice,
                             *old_index_key, "partition.notice");

  for (auto id : survivors) {
    auto& m = out.member(id);
    Digest got;
    if (id == sponsor) {
      got = r;
    } else {
      const auto payload =
        receive_multicast(net, msg1, g.member(id), index, "partition.notice");
      if (!payload) {
        throw ProtocolAbort("survivor " + to_string(id) + " missed the partition notice");
      }
      got = (*payload)[0].value;
    }
    m.remember(got);

    // Function G: one rehash per departing block.
    for (const auto& b : blocks) {
      if (m.find(b.pred) == nullptr) {
        continue;
      }
      if (m.find(b.tail) == nullptr) {
        m.state.erase(b.pred);
      } else if (!skip_g) {
        m.hold(net.rehash(*m.find(b.pred), m.find(b.tail)->value, "partition.g"));
      }
    }
    for (auto dep : departing) {
      m.state.erase(dep);
    }

    if (m.find(sponsor) != nullptr) {
      const auto sponsor_nonce =
        net.rehash(*m.find(sponsor), got, "partition.sponsor-rehash");
      m.hold(sponsor_nonce);
      m.set_key(
        net.hash(KdfLabel::GroupKeyLeave, sponsor_nonce.value, got, "partition.rekey"));
    }
  }

  const auto next = survivor_successor(g.ring, sponsor, departing);
  if (next != sponsor) {
    const auto msg3 = net.send(Mode::Unicast, sponsor, { next }, index,
                               { Item::key(out.member(sponsor).group_key) },
                               *old_index_key, "partition.deliver");
    const auto payload =
      receive_multicast(net, msg3, g.member(next), index, "partition.deliver");
    if (!payload) {
      throw ProtocolAbort("sponsor successor could not open the new key");
    }
    out.member(next).set_key((*payload)[0].value);
  }

  auto& truth = out.shared_nonces;
  if (!skip_g) {
    for (const auto& b : blocks) {
      truth[b.pred] = rehash(truth.at(b.pred), g.shared_nonces.at(b.tail).value);
    }
  }
  truth[sponsor] = rehash(truth.at(sponsor), r);
  for (auto dep : departing) {
    truth.erase(dep);
  }
  out.group_key = kdf2(KdfLabel::GroupKeyLeave, truth.at(sponsor).value, r);
  out.sponsor = sponsor;
  refresh_views(out);
  result.group = std::move(out);
  return result;
}

GroupSnapshot
run_merge_pair(const GroupSnapshot& a,
               const GroupSnapshot& b,
               ProtocolContext& ctx,
               std::optional<MemberId> sponsor_a,
               std::optional<MemberId> sponsor_b)
{
  auto& net = ctx.net;
  for (auto id : b.ring.order()) {
    if (a.ring.contains(id)) {
      throw Refused("merge id collision on member " + to_string(id));
    }
  }
  if (a.size() < 2 || b.size() < 2) {
    throw Refused("merge needs two groups of at least 2");
  }

  const auto sa = sponsor_a.value_or(a.sponsor);
  const auto sb = sponsor_b.value_or(b.sponsor);
  require_member(a, sa, "sponsor");
  require_member(b, sb, "sponsor");

  const bool skip = ctx.mutation == Mutation::MergeSponsorRehash;
  const auto pa = a.ring.pred(sa);
  const auto qa = a.ring.succ(sa);
  const auto tb = b.ring.succ(sb); // tail of b, becomes sa's successor
  const auto ub = b.ring.succ(tb);
  const auto ka = a.group_key;
  const auto kb = b.group_key;

  // b's nonces in ring order starting at the tail; carries the ring order too.
  std::vector<Nonce> b_nonces;
  std::vector<MemberId> b_order;
  for (auto cur = tb;;) {
    b_order.push_back(cur);
    b_nonces.push_back(b.shared_nonces.at(cur));
    cur = b.ring.succ(cur);
    if (cur == tb) {
      break;
    }
  }

  // Ticket from the authentication stub.
  std::vector<MemberId> sa_index = all_except(a.ring, { pa });
  std::vector<Nonce> sa_index_nonces;
  for (auto id : sa_index) {
    sa_index_nonces.push_back(a.shared_nonces.at(id));
  }
  const auto ticket_key =
    net.multicast_key(sa_index_nonces, ka, "auth.merge", Counting::Uncounted);
  Payload ticket{ Item::key(kb) };
  for (const auto& n : b_nonces) {
    ticket.push_back(Item::nonce(n));
  }
  ticket.push_back(Item::mac(ctx.auth.sign(b_nonces, sb)));
  const auto ticket_box = net.deliver_private(ticket, ticket_key, "auth.merge.ticket");

  // n_{pred(sa)} reaches every b member under two b-side index keys.
  std::vector<std::size_t> pred_boxes;
  for (auto holder : { tb, ub }) {
    const std::array<Nonce, 1> idx{ b.shared_nonces.at(holder) };
    const auto k = net.multicast_key(idx, kb, "auth.merge", Counting::Uncounted);
    pred_boxes.push_back(net.deliver_private({ Item::nonce(a.shared_nonces.at(pa)) }, k,
                                             "auth.merge.pred"));
    if (tb == ub) {
      break;
    }
  }

  GroupSnapshot out = a;
  for (const auto& [id, m] : b.members) {
    out.members.emplace(id, m);
  }
  out.member(sb).private_boxes.push_back(ticket_box);
  for (auto id : b.ring.order()) {
    auto& m = out.member(id);
    for (std::size_t i = 0; i < pred_boxes.size(); i++) {
      m.private_boxes.push_back(pred_boxes[i]);
    }
    for (std::size_t i = 0; i < pred_boxes.size(); i++) {
      const std::array<MemberId, 1> idx{ i == 0 ? tb : ub };
      const auto k = net.multicast_key(b.member(id), idx, "merge.ticket");
      if (!k) {
        continue;
      }
      if (const auto p = net.open_private(pred_boxes[i], *k)) {
        m.hold((*p)[0].as_nonce());
        break;
      }
    }
    if (m.find(pa) == nullptr) {
      throw ProtocolAbort("b member " + to_string(id) + " did not learn n_pred(sa)");
    }
  }

  // 1: sb forwards the ticket; only sa holds every nonce of the index.
  const auto msg1 =
    net.forward(Mode::Unicast, sb, { sa }, sa_index, net.private_boxes().at(ticket_box).box,
                ticket_key, net.sizes().abstract_size(ticket, sa_index.size()),
                "merge.request");
  Digest got_kb;
  std::vector<Nonce> got_b;
  {
    const auto payload = receive_multicast(net, msg1, a.member(sa), sa_index, "merge.request");
    if (!payload) {
      throw ProtocolAbort("sponsor could not open the merge ticket");
    }
    got_kb = (*payload)[0].value;
    for (std::size_t i = 1; i + 1 < payload->size(); i++) {
      got_b.push_back((*payload)[i].as_nonce());
    }
    net.count_auth("merge.request");
    if (!ctx.auth.verify(got_b, sb, payload->back().value)) {
      throw ProtocolAbort("merge ticket signature does not verify");
    }
  }

  auto& sponsor = out.member(sa);
  const auto old_sa_nonce = sponsor.own_nonce();
  const auto new_sa_nonce =
    skip ? old_sa_nonce : net.rehash(old_sa_nonce, ka, "merge.sponsor-rehash");
  sponsor.hold(new_sa_nonce);
  const std::array<MemberId, 1> sa_only{ sa };

  // 2: the rest of a (bar qa) applies the same update.
  const auto a_rest = all_except(a.ring, { sa, qa });
  if (!a_rest.empty()) {
    const auto k = net.multicast_key(a.member(sa), sa_only, "merge.update");
    const auto msg2 = net.send(Mode::Broadcast, sa, a_rest, { sa }, { Item::id(sa) }, *k,
                               "merge.update");
    for (auto id : a_rest) {
      auto& m = out.member(id);
      const auto payload = receive_multicast(net, msg2, a.member(id), sa_only, "merge.update");
      if (!payload) {
        throw ProtocolAbort("member " + to_string(id) + " missed the merge update");
      }
      if (!skip) {
        m.hold(net.rehash(*m.find(sa), ka, "merge.update"));
      }
    }
  }

  std::vector<Nonce> sa_state;
  for (const auto& [origin, n] : sponsor.state) {
    if (a.ring.contains(origin)) {
      sa_state.push_back(n);
    }
  }

  auto b_nonce = [&](MemberId id) -> const Nonce& {
    for (const auto& n : got_b) {
      if (n.origin == id) {
        return n;
      }
    }
    throw ProtocolAbort("merge ticket lacks the nonce of " + to_string(id));
  };

  // 3: sa's state to b minus its tail, under b's index key on sb.
  {
    const auto addressed = all_except(b.ring, { tb });
    const std::array<Nonce, 1> idx{ b_nonce(sb) };
    const auto k = net.multicast_key(idx, got_kb, "merge.share");
    Payload p;
    for (const auto& n : sa_state) {
      p.push_back(Item::nonce(n));
    }
    const auto msg3 = net.send(Mode::Broadcast, sa, addressed, { sb }, p, k, "merge.share");
    const std::array<MemberId, 1> sb_only{ sb };
    for (auto id : addressed) {
      const auto payload = receive_multicast(net, msg3, b.member(id), sb_only, "merge.share");
      if (!payload) {
        throw ProtocolAbort("b member " + to_string(id) + " missed sa's state");
      }
      for (const auto& item : *payload) {
        out.member(id).hold(item.as_nonce());
      }
    }
  }

  // 4: the tail learns n_sb and sa's state without n_sa.
  {
    const std::array<Nonce, 1> idx{ b_nonce(tb) };
    const auto k = net.multicast_key(idx, got_kb, "merge.link");
    Payload p{ Item::nonce(b_nonce(sb)) };
    for (const auto& n : sa_state) {
      if (n.origin != sa) {
        p.push_back(Item::nonce(n));
      }
    }
    const auto msg4 = net.send(Mode::Unicast, sa, { tb }, { tb }, p, k, "merge.link");
    const std::array<MemberId, 1> tb_only{ tb };
    const auto payload = receive_multicast(net, msg4, b.member(tb), tb_only, "merge.link");
    if (!payload) {
      throw ProtocolAbort("b tail could not open the link message");
    }
    for (const auto& item : *payload) {
      out.member(tb).hold(item.as_nonce());
    }
  }

  // 5: b's nonces and key to a minus qa. Sealed under the sponsor nonce as it was
  // before the update: qa receives only the updated value and must not open this.
  {
    Payload p{ Item::key(got_kb) };
    for (const auto& n : got_b) {
      p.push_back(Item::nonce(n));
    }
    if (!a_rest.empty()) {
      const auto k = net.multicast_key(a.member(sa), sa_only, "merge.adopt");
      const auto msg5 =
        net.send(Mode::Broadcast, sa, a_rest, { sa }, p, *k, "merge.adopt");
      for (auto id : a_rest) {
        auto& m = out.member(id);
        const auto payload =
          receive_multicast(net, msg5, a.member(id), sa_only, "merge.adopt");
        if (!payload) {
          throw ProtocolAbort("member " + to_string(id) + " missed b's key");
        }
        for (std::size_t i = 1; i < payload->size(); i++) {
          m.hold((*payload)[i].as_nonce());
        }
        m.set_key((*payload)[0].value);
      }
    }
    for (const auto& n : got_b) {
      sponsor.hold(n);
    }
  }

  // 6: pred(sa) gives qa the new n_sa, b's nonces bar n_sb, and b's key.
  {
    Payload p{ Item::nonce(new_sa_nonce) };
    for (const auto& n : got_b) {
      if (n.origin != sb) {
        p.push_back(Item::nonce(n));
      }
    }
    p.push_back(Item::key(got_kb));

    const bool pair = (pa == qa);
    const auto sender = pair ? sa : pa;
    std::vector<MemberId> hint;
    std::optional<Digest> k;
    std::optional<Digest> recv;
    if (pair) {
      k = ka; // a 2-ring shares no nonce
      recv = ka;
    } else {
      hint = { pa };
      k = net.multicast_key(a.member(pa), hint, "merge.bridge");
      recv = net.multicast_key(a.member(qa), hint, "merge.bridge");
    }
    const auto msg6 = net.send(Mode::Unicast, sender, { qa }, hint, p, *k, "merge.bridge");
    const auto payload = recv ? net.receive(msg6, qa, *recv) : std::nullopt;
    if (!payload) {
      throw ProtocolAbort("a successor could not open the bridge message");
    }
    auto& m = out.member(qa);
    for (std::size_t i = 0; i + 1 < payload->size(); i++) {
      m.hold((*payload)[i].as_nonce());
    }
    m.set_key(payload->back().value);
  }
  sponsor.set_key(got_kb);

  // Ground truth.
  out.ring.insert_after(sa, b_order);
  for (const auto& [id, n] : b.shared_nonces) {
    out.shared_nonces[id] = n;
  }
  if (!skip) {
    out.shared_nonces[sa] = rehash(a.shared_nonces.at(sa), ka);
  }
  out.group_key = kb;
  out.sponsor = sa;
  refresh_views(out);
  return out;
}

MultiMergeOutcome
run_merge_multi(std::vector<GroupSnapshot> groups, ProtocolContext& ctx)
{
  if (groups.size() < 2) {
    throw DomainError("multi-merge needs at least 2 groups");
  }
  std::sort(groups.begin(), groups.end(),
            [](const auto& x, const auto& y) { return x.id < y.id; });

  MultiMergeOutcome out;
  while (groups.size() > 1) {
    std::vector<GroupSnapshot> next;
    std::vector<std::pair<GroupId, GroupId>> round;
    for (std::size_t i = 0; i + 1 < groups.size(); i += 2) {
      round.emplace_back(groups[i].id, groups[i + 1].id);
      next.push_back(run_merge_pair(groups[i], groups[i + 1], ctx));
    }
    if (groups.size() % 2 == 1) {
      next.push_back(std::move(groups.back()));
    }
    out.bracket.push_back(std::move(round));
    groups = std::move(next);
    out.rounds++;
  }
  out.group = std::move(groups.front());
  return out;
}

} // namespace sgrs
