#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sgrs {

using Bytes = std::vector<std::uint8_t>;

struct Error : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

// Precondition violated on a value (empty set, unknown id, ...).
struct DomainError : Error
{
  using Error::Error;
};

struct ConfigError : Error
{
  using Error::Error;
};

struct AuthRefused : Error
{
  using Error::Error;
};

// A protocol run could not proceed; the group is left unchanged.
struct ProtocolAbort : Error
{
  using Error::Error;
};

// The requested membership change is not allowed (e.g. group would get too small).
struct Refused : Error
{
  using Error::Error;
};

inline constexpr std::size_t digest_size = 32;

struct Digest
{
  std::array<std::uint8_t, digest_size> bytes{};

  auto operator<=>(const Digest&) const = default;

  std::string hex() const;
  std::string short_hex() const; // first 4 bytes, for reports
  std::span<const std::uint8_t> view() const { return bytes; }

  static Digest from(std::span<const std::uint8_t> data);
};

using SymKey = Digest;

struct DigestHash
{
  std::size_t operator()(const Digest& d) const noexcept;
};

class MemberId
{
public:
  constexpr MemberId() = default;
  constexpr explicit MemberId(std::uint32_t value)
    : _value(value)
  {
  }

  constexpr std::uint32_t value() const { return _value; }
  constexpr auto operator<=>(const MemberId&) const = default;

private:
  std::uint32_t _value = 0;
};

std::string to_string(MemberId id);

struct Nonce
{
  Digest value;
  MemberId origin;
  std::uint32_t version = 0;

  auto operator<=>(const Nonce&) const = default;
};

enum class KdfLabel : std::uint8_t
{
  GroupKeyJoin,
  GroupKeyLeave,
  NonceRehash,
  MulticastKey,
  SupergroupKey,
};

std::string_view label_name(KdfLabel label);
KdfLabel parse_label(std::string_view name); // throws ConfigError

Digest kdf2(KdfLabel label, const Digest& a, const Digest& b);
Digest kdf2(std::string_view label, const Digest& a, const Digest& b);

// Rehash a nonce with an extra input; bumps the version.
Nonce rehash(const Nonce& n, const Digest& with);

Digest xor_combine(std::span<const Nonce> nonces);

using Iv = std::array<std::uint8_t, 12>;

struct SealedBox
{
  Iv iv{};
  Bytes ciphertext;
  Bytes tag;
  Bytes ad;

  bool operator==(const SealedBox&) const = default;
  std::size_t physical_size() const;
};

// Deterministic IV source; one per network so IVs never repeat under a key.
class IvSequence
{
public:
  explicit IvSequence(std::uint32_t domain = 0)
    : _domain(domain)
  {
  }
  Iv next();

private:
  std::uint32_t _domain;
  std::uint64_t _counter = 0;
};

SealedBox seal(const Digest& key,
               std::span<const std::uint8_t> ad,
               std::span<const std::uint8_t> plaintext,
               const Iv& iv);
std::optional<Bytes> open(const Digest& key, const SealedBox& box);

class SeededRng
{
public:
  explicit SeededRng(std::uint64_t seed)
    : _seed(seed)
  {
  }

  Digest next_bytes();
  std::uint64_t next_u64();
  std::uint64_t uniform(std::uint64_t bound); // [0, bound)

  std::uint64_t seed() const { return _seed; }
  std::uint64_t counter() const { return _counter; }

private:
  std::uint64_t _seed;
  std::uint64_t _counter = 0;
};

Nonce next_nonce(SeededRng& rng, MemberId origin);

Digest hmac(const Digest& key, std::span<const std::uint8_t> data);

inline constexpr std::string_view hash_name = "SHA-256";
inline constexpr std::string_view cipher_name = "ChaCha20-Poly1305-IETF";

} // namespace sgrs

template<>
struct std::hash<sgrs::MemberId>
{
  std::size_t operator()(sgrs::MemberId id) const noexcept
  {
    return std::hash<std::uint32_t>{}(id.value());
  }
};
