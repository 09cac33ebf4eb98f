#include "sgrs/simnet.hpp"

#include <algorithm>

namespace sgrs {

std::string_view
mode_name(Mode m)
{
  return m == Mode::Unicast ? "UC" : "BC";
}

Item
Item::nonce(const Nonce& n)
{
  return { ItemKind::Nonce, n.value, n.origin.value(), n.version };
}

Item
Item::id(MemberId m)
{
  return { ItemKind::Id, {}, m.value(), 0 };
}

Item
Item::random(const Digest& r)
{
  return { ItemKind::Random, r, 0, 0 };
}

Item
Item::count(std::uint32_t c)
{
  return { ItemKind::Count, {}, c, 0 };
}

Item
Item::key(const Digest& k)
{
  return { ItemKind::Key, k, 0, 0 };
}

Item
Item::mac(const Digest& m)
{
  return { ItemKind::Mac, m, 0, 0 };
}

Item
Item::credential(const Digest& c)
{
  return { ItemKind::Credential, c, 0, 0 };
}

Nonce
Item::as_nonce() const
{
  if (kind != ItemKind::Nonce) {
    throw DomainError("payload item is not a nonce");
  }
  return { value, MemberId{ a }, b };
}

bool
Item::carries_value() const
{
  return kind != ItemKind::Id && kind != ItemKind::Count;
}

namespace {

constexpr std::size_t item_wire_size = 1 + 4 + 4 + digest_size;

void
put_u32(Bytes& out, std::uint32_t v)
{
  for (int i = 0; i < 4; i++) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

std::uint32_t
get_u32(const std::uint8_t* p)
{
  std::uint32_t v = 0;
  for (int i = 0; i < 4; i++) {
    v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  }
  return v;
}

} // namespace

Bytes
encode_payload(const Payload& p)
{
  Bytes out;
  out.reserve(p.size() * item_wire_size);
  for (const auto& item : p) {
    out.push_back(static_cast<std::uint8_t>(item.kind));
    put_u32(out, item.a);
    put_u32(out, item.b);
    out.insert(out.end(), item.value.bytes.begin(), item.value.bytes.end());
  }
  return out;
}

std::optional<Payload>
decode_payload(std::span<const std::uint8_t> data)
{
  if (data.size() % item_wire_size != 0) {
    return std::nullopt;
  }
  Payload out;
  for (std::size_t off = 0; off < data.size(); off += item_wire_size) {
    const auto* p = data.data() + off;
    if (p[0] > static_cast<std::uint8_t>(ItemKind::Credential)) {
      return std::nullopt;
    }
    Item item;
    item.kind = static_cast<ItemKind>(p[0]);
    item.a = get_u32(p + 1);
    item.b = get_u32(p + 5);
    item.value = Digest::from({ p + 9, digest_size });
    out.push_back(item);
  }
  return out;
}

std::uint64_t
SizeModel::item_size(ItemKind k) const
{
  switch (k) {
    case ItemKind::Nonce:
    case ItemKind::Id:
    case ItemKind::Random:
    case ItemKind::Count:
      return int_bytes;
    case ItemKind::Key:
    case ItemKind::Mac:
    case ItemKind::Credential:
      return key_bytes;
  }
  return 0;
}

std::uint64_t
SizeModel::abstract_size(const Payload& p, std::size_t hint_len) const
{
  std::uint64_t total = static_cast<std::uint64_t>(hint_len) * int_bytes;
  for (const auto& item : p) {
    total += item_size(item.kind);
  }
  return total;
}

Counters&
Counters::operator+=(const Counters& o)
{
  uc += o.uc;
  bc += o.bc;
  bytes += o.bytes;
  physical_bytes += o.physical_bytes;
  hash_ops += o.hash_ops;
  mk_hash_ops += o.mk_hash_ops;
  crypt_ops += o.crypt_ops;
  auth_ops += o.auth_ops;
  return *this;
}

Network::Network(SizeModel sizes, std::uint32_t iv_domain)
  : _sizes(sizes)
  , _ivs(iv_domain)
{
  if (_sizes.int_bytes == 0 || _sizes.key_bytes == 0) {
    throw ConfigError("size model entries must be positive");
  }
}

std::size_t
Network::begin_event(std::string label)
{
  EventLedger e;
  e.index = _ledger.per_event.size();
  e.label = std::move(label);
  _ledger.per_event.push_back(std::move(e));
  return _ledger.per_event.back().index;
}

std::size_t
Network::current_event() const
{
  if (_ledger.per_event.empty()) {
    throw DomainError("no event is active");
  }
  return _ledger.per_event.back().index;
}

void
Network::add(std::string_view tag, const Counters& delta)
{
  if (_ledger.per_event.empty()) {
    return; // setup work outside any event is not part of the cost model
  }
  auto& e = _ledger.per_event.back();
  e.totals += delta;
  e.by_step[std::string(tag)] += delta;
  _ledger.totals += delta;
}

void
Network::log_kdf(KdfLabel label, const Digest& a, const Digest& b, const Digest& out)
{
  if (_seen_kdf.insert(out).second) {
    _kdf.push_back({ label, a, b, out });
  }
}

Digest
Network::hash(KdfLabel label,
              const Digest& a,
              const Digest& b,
              std::string_view step,
              Counting c)
{
  const auto out = kdf2(label, a, b);
  log_kdf(label, a, b, out);
  if (c == Counting::Counted) {
    Counters d;
    (label == KdfLabel::MulticastKey ? d.mk_hash_ops : d.hash_ops) = 1;
    add(step, d);
  }
  return out;
}

Nonce
Network::rehash(const Nonce& n, const Digest& with, std::string_view step, Counting c)
{
  return { hash(KdfLabel::NonceRehash, n.value, with, step, c), n.origin, n.version + 1 };
}

Digest
Network::xor_of(std::span<const Nonce> nonces)
{
  const auto out = xor_combine(nonces);
  if (nonces.size() > 1 && _seen_xor.insert(out).second) {
    XorRecord r;
    r.out = out;
    for (const auto& n : nonces) {
      r.inputs.push_back(n.value);
    }
    _xor.push_back(std::move(r));
  }
  return out;
}

std::optional<Digest>
Network::multicast_key(const MemberState& m,
                       std::span<const MemberId> ids,
                       std::string_view step,
                       Counting c)
{
  const auto nonces = select_nonces(m, ids);
  if (!nonces) {
    return std::nullopt;
  }
  return multicast_key(*nonces, m.group_key, step, c);
}

Digest
Network::multicast_key(std::span<const Nonce> nonces,
                       const Digest& group_key,
                       std::string_view step,
                       Counting c)
{
  return hash(KdfLabel::MulticastKey, xor_of(nonces), group_key, step, c);
}

std::size_t
Network::send(Mode mode,
              MemberId sender,
              std::vector<MemberId> recipients,
              std::vector<MemberId> key_hint,
              const Payload& payload,
              const Digest& key,
              std::string step_tag)
{
  if (payload.empty()) {
    throw DomainError("refusing to send an empty payload (" + step_tag + ")");
  }
  const auto pt = encode_payload(payload);
  Bytes ad(step_tag.begin(), step_tag.end());
  auto box = seal(key, ad, pt, _ivs.next());
  const auto bytes = _sizes.abstract_size(payload, key_hint.size());

  const auto idx = forward(mode, sender, std::move(recipients), std::move(key_hint),
                           box, key, bytes, step_tag);
  Counters d;
  d.crypt_ops = 1;
  add(step_tag, d);
  return idx;
}

std::size_t
Network::forward(Mode mode,
                 MemberId sender,
                 std::vector<MemberId> recipients,
                 std::vector<MemberId> key_hint,
                 const SealedBox& box,
                 const Digest& key,
                 std::uint64_t abstract_bytes,
                 std::string step_tag)
{
  if (recipients.empty()) {
    throw DomainError("message without recipients (" + step_tag + ")");
  }
  if (mode == Mode::Unicast && recipients.size() != 1) {
    throw DomainError("unicast must address exactly one member");
  }

  Message m;
  m.mode = mode;
  m.sender = sender;
  m.recipients = std::move(recipients);
  m.key_hint = std::move(key_hint);
  m.box = box;
  m.step_tag = std::move(step_tag);
  m.event = in_event() ? current_event() : 0;
  m.abstract_bytes = abstract_bytes;

  Counters d;
  (mode == Mode::Unicast ? d.uc : d.bc) = 1;
  d.bytes = abstract_bytes;
  d.physical_bytes = box.physical_size() + 4 * m.key_hint.size();
  add(m.step_tag, d);

  _messages.push_back(std::move(m));
  _message_keys.push_back(key);
  return _messages.size() - 1;
}

std::optional<Payload>
Network::receive(std::size_t message, MemberId who, const Digest& key)
{
  auto& m = _messages.at(message);
  if (std::find(m.recipients.begin(), m.recipients.end(), who) == m.recipients.end()) {
    throw DomainError("member " + to_string(who) + " is not addressed by " + m.step_tag);
  }
  const auto pt = open(key, m.box);
  if (!pt) {
    return std::nullopt;
  }
  auto payload = decode_payload(*pt);
  if (!payload) {
    return std::nullopt;
  }
  m.opened_by.push_back(who);
  Counters d;
  d.crypt_ops = 1;
  add(m.step_tag, d);
  return payload;
}

std::size_t
Network::deliver_private(const Payload& payload, const Digest& key, std::string step_tag)
{
  const auto pt = encode_payload(payload);
  Bytes ad(step_tag.begin(), step_tag.end());
  PrivateBox p;
  p.box = seal(key, ad, pt, _ivs.next());
  p.step_tag = std::move(step_tag);
  p.event = in_event() ? current_event() : 0;
  _private.push_back(std::move(p));
  _private_keys.push_back(key);
  return _private.size() - 1;
}

std::optional<Payload>
Network::open_private(std::size_t box, const Digest& key)
{
  const auto pt = open(key, _private.at(box).box);
  if (!pt) {
    return std::nullopt;
  }
  return decode_payload(*pt);
}

void
Network::count_auth(std::string_view step, std::uint64_t n)
{
  Counters d;
  d.auth_ops = n;
  add(step, d);
}

const Digest&
Network::sealing_key(BoxRef ref) const
{
  return ref.is_private ? _private_keys.at(ref.index) : _message_keys.at(ref.index);
}

const EventLedger&
Network::ledger_for_event(std::size_t index) const
{
  if (index >= _ledger.per_event.size()) {
    throw DomainError("unknown event index " + std::to_string(index));
  }
  return _ledger.per_event[index];
}

void
Network::write_transcript(std::ostream& out) const
{
  out << "event\tstep\tmode\tsender\trecipients\tbytes\n";
  for (const auto& m : _messages) {
    out << m.event << '\t' << m.step_tag << '\t' << mode_name(m.mode) << '\t'
        << m.sender.value() << '\t';
    for (std::size_t i = 0; i < m.recipients.size(); i++) {
      out << (i ? "," : "") << m.recipients[i].value();
    }
    out << '\t' << m.abstract_bytes << '\n';
  }
}

std::uint64_t
recount_bytes(const Network& net)
{
  std::uint64_t total = 0;
  const auto& msgs = net.transcript();
  for (std::size_t i = 0; i < msgs.size(); i++) {
    const auto pt = open(net.sealing_key({ false, i }), msgs[i].box);
    if (!pt) {
      throw DomainError("transcript message " + std::to_string(i) + " does not open");
    }
    const auto payload = decode_payload(*pt);
    if (!payload) {
      throw DomainError("transcript message " + std::to_string(i) + " is malformed");
    }
    total += net.sizes().abstract_size(*payload, msgs[i].key_hint.size());
  }
  return total;
}

} // namespace sgrs
