#pragma once

#include "sgrs/group.hpp"

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace sgrs {

enum class Mode : std::uint8_t
{
  Unicast,
  Broadcast,
};

std::string_view mode_name(Mode m);

// Typed payload entries. The kind decides the abstract size.
enum class ItemKind : std::uint8_t
{
  Nonce,
  Id,
  Random,
  Count,
  Key,
  Mac,
  Credential,
};

struct Item
{
  ItemKind kind = ItemKind::Id;
  Digest value;
  std::uint32_t a = 0; // id, origin, or count
  std::uint32_t b = 0; // nonce version

  static Item nonce(const Nonce& n);
  static Item id(MemberId m);
  static Item random(const Digest& r);
  static Item count(std::uint32_t c);
  static Item key(const Digest& k);
  static Item mac(const Digest& m);
  static Item credential(const Digest& c);

  Nonce as_nonce() const;
  MemberId as_id() const { return MemberId{ a }; }
  bool carries_value() const;

  bool operator==(const Item&) const = default;
};

using Payload = std::vector<Item>;

Bytes encode_payload(const Payload& p);
std::optional<Payload> decode_payload(std::span<const std::uint8_t> data);

struct SizeModel
{
  std::uint32_t int_bytes = 4;
  std::uint32_t key_bytes = 32;

  std::uint64_t item_size(ItemKind k) const;
  std::uint64_t abstract_size(const Payload& p, std::size_t hint_len) const;
};

struct Counters
{
  std::uint64_t uc = 0;
  std::uint64_t bc = 0;
  std::uint64_t bytes = 0;
  std::uint64_t physical_bytes = 0;
  std::uint64_t hash_ops = 0;    // group-key, rehash and supergroup derivations
  std::uint64_t mk_hash_ops = 0; // multicast-key derivations
  std::uint64_t crypt_ops = 0;
  std::uint64_t auth_ops = 0;    // tag verifications, kept apart from crypt_ops

  std::uint64_t messages() const { return uc + bc; }
  std::uint64_t all_hash_ops() const { return hash_ops + mk_hash_ops; }
  Counters& operator+=(const Counters& o);
  bool operator==(const Counters&) const = default;
};

struct EventLedger
{
  std::size_t index = 0;
  std::string label;
  Counters totals;
  std::map<std::string, Counters> by_step;
};

struct CostLedger
{
  Counters totals;
  std::vector<EventLedger> per_event;
};

struct Message
{
  Mode mode = Mode::Unicast;
  MemberId sender;
  std::vector<MemberId> recipients; // addressed set
  std::vector<MemberId> key_hint;   // the Y index list, empty for non-multicast keys
  SealedBox box;
  std::string step_tag;
  std::size_t event = 0;
  std::uint64_t abstract_bytes = 0;
  std::vector<MemberId> opened_by;
};

// Sealed values handed out by the authentication stub or trusted setup.
struct PrivateBox
{
  SealedBox box;
  std::string step_tag;
  std::size_t event = 0;
};

struct KdfRecord
{
  KdfLabel label;
  Digest a;
  Digest b;
  Digest out;
};

struct XorRecord
{
  std::vector<Digest> inputs;
  Digest out;
};

// Every sealing key the engine used, indexed for the attacker model.
struct BoxRef
{
  bool is_private = false;
  std::size_t index = 0;
};

enum class Counting : std::uint8_t
{
  Counted,
  Uncounted,
};

class Network
{
public:
  explicit Network(SizeModel sizes = {}, std::uint32_t iv_domain = 0);

  const SizeModel& sizes() const { return _sizes; }

  std::size_t begin_event(std::string label);
  std::size_t current_event() const;
  bool in_event() const { return !_ledger.per_event.empty(); }

  // Protocol-context derivations: counted and logged for the attacker.
  Digest hash(KdfLabel label,
              const Digest& a,
              const Digest& b,
              std::string_view step,
              Counting c = Counting::Counted);
  Nonce rehash(const Nonce& n, const Digest& with, std::string_view step,
               Counting c = Counting::Counted);
  Digest xor_of(std::span<const Nonce> nonces);

  // Multicast key as computed by member m, or nullopt if m cannot.
  std::optional<Digest> multicast_key(const MemberState& m,
                                      std::span<const MemberId> ids,
                                      std::string_view step,
                                      Counting c = Counting::Counted);
  // Same derivation from an explicit nonce list (stub and sponsor-side use).
  Digest multicast_key(std::span<const Nonce> nonces,
                       const Digest& group_key,
                       std::string_view step,
                       Counting c = Counting::Counted);

  std::size_t send(Mode mode,
                   MemberId sender,
                   std::vector<MemberId> recipients,
                   std::vector<MemberId> key_hint,
                   const Payload& payload,
                   const Digest& key,
                   std::string step_tag);

  // Forward an already sealed box (join tag parts). Counts the message, not a seal.
  std::size_t forward(Mode mode,
                      MemberId sender,
                      std::vector<MemberId> recipients,
                      std::vector<MemberId> key_hint,
                      const SealedBox& box,
                      const Digest& key,
                      std::uint64_t abstract_bytes,
                      std::string step_tag);

  // Recipient-side open; counts one E on success.
  std::optional<Payload> receive(std::size_t message, MemberId who, const Digest& key);

  std::size_t deliver_private(const Payload& payload,
                              const Digest& key,
                              std::string step_tag);
  std::optional<Payload> open_private(std::size_t box, const Digest& key);

  void count_auth(std::string_view step, std::uint64_t n = 1);

  const std::vector<Message>& transcript() const { return _messages; }
  const std::vector<PrivateBox>& private_boxes() const { return _private; }
  const std::vector<KdfRecord>& kdf_records() const { return _kdf; }
  const std::vector<XorRecord>& xor_records() const { return _xor; }
  const Digest& sealing_key(BoxRef ref) const;

  const CostLedger& ledger() const { return _ledger; }
  const EventLedger& ledger_for_event(std::size_t index) const;
  Counters totals() const { return _ledger.totals; }

  void write_transcript(std::ostream& out) const;

private:
  Counters& step(std::string_view tag);
  void add(std::string_view tag, const Counters& delta);
  void log_kdf(KdfLabel label, const Digest& a, const Digest& b, const Digest& out);

  SizeModel _sizes;
  IvSequence _ivs;
  CostLedger _ledger;
  std::vector<Message> _messages;
  std::vector<Digest> _message_keys;
  std::vector<PrivateBox> _private;
  std::vector<Digest> _private_keys;
  std::vector<KdfRecord> _kdf;
  std::vector<XorRecord> _xor;
  std::unordered_set<Digest, DigestHash> _seen_kdf;
  std::unordered_set<Digest, DigestHash> _seen_xor;
};

// Recomputes abstract bytes by opening every message and re-sizing its payload.
std::uint64_t recount_bytes(const Network& net);

} // namespace sgrs
