#include "sgrs/primitives.hpp"

#include <sodium.h>

#include <algorithm>
#include <cstring>
#include <set>
#include <utility>

namespace sgrs {

namespace {

void
ensure_sodium()
{
  static const bool ready = [] { return sodium_init() >= 0; }();
  if (!ready) {
    throw ConfigError("libsodium failed to initialize");
  }
}

constexpr std::array<std::pair<KdfLabel, std::string_view>, 5> label_table{ {
  { KdfLabel::GroupKeyJoin, "GK-join" },
  { KdfLabel::GroupKeyLeave, "GK-leave" },
  { KdfLabel::NonceRehash, "NR" },
  { KdfLabel::MulticastKey, "MK" },
  { KdfLabel::SupergroupKey, "SG" },
} };

void
put_le64(std::uint8_t* out, std::uint64_t v)
{
  for (int i = 0; i < 8; i++) {
    out[i] = static_cast<std::uint8_t>(v >> (8 * i));
  }
}

} // namespace

std::string
Digest::hex() const
{
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * bytes.size());
  for (auto b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

std::string
Digest::short_hex() const
{
  return hex().substr(0, 8);
}

Digest
Digest::from(std::span<const std::uint8_t> data)
{
  if (data.size() != digest_size) {
    throw DomainError("digest must be exactly 32 bytes");
  }
  Digest d;
  std::copy(data.begin(), data.end(), d.bytes.begin());
  return d;
}

std::size_t
DigestHash::operator()(const Digest& d) const noexcept
{
  std::size_t h = 0;
  std::memcpy(&h, d.bytes.data(), sizeof(h));
  return h;
}

std::string
to_string(MemberId id)
{
  return std::to_string(id.value());
}

std::string_view
label_name(KdfLabel label)
{
  for (const auto& [l, name] : label_table) {
    if (l == label) {
      return name;
    }
  }
  throw ConfigError("unregistered kdf label");
}

KdfLabel
parse_label(std::string_view name)
{
  for (const auto& [l, n] : label_table) {
    if (n == name) {
      return l;
    }
  }
  throw ConfigError("unregistered kdf label: " + std::string(name));
}

Digest
kdf2(KdfLabel label, const Digest& a, const Digest& b)
{
  ensure_sodium();
  const auto name = label_name(label);

  crypto_hash_sha256_state st;
  crypto_hash_sha256_init(&st);
  const auto len = static_cast<std::uint8_t>(name.size());
  crypto_hash_sha256_update(&st, &len, 1);
  crypto_hash_sha256_update(
    &st, reinterpret_cast<const unsigned char*>(name.data()), name.size());
  crypto_hash_sha256_update(&st, a.bytes.data(), a.bytes.size());
  crypto_hash_sha256_update(&st, b.bytes.data(), b.bytes.size());

  Digest out;
  crypto_hash_sha256_final(&st, out.bytes.data());
  return out;
}

Digest
kdf2(std::string_view label, const Digest& a, const Digest& b)
{
  return kdf2(parse_label(label), a, b);
}

Nonce
rehash(const Nonce& n, const Digest& with)
{
  return { kdf2(KdfLabel::NonceRehash, n.value, with), n.origin, n.version + 1 };
}

Digest
xor_combine(std::span<const Nonce> nonces)
{
  if (nonces.empty()) {
    throw DomainError("xor_combine of an empty set");
  }

  std::set<std::pair<MemberId, std::uint32_t>> seen;
  Digest out;
  for (const auto& n : nonces) {
    if (!seen.emplace(n.origin, n.version).second) {
      throw DomainError("xor_combine: duplicate nonce (origin " +
                        to_string(n.origin) + ")");
    }
    for (std::size_t i = 0; i < digest_size; i++) {
      out.bytes[i] ^= n.value.bytes[i];
    }
  }
  return out;
}

std::size_t
SealedBox::physical_size() const
{
  return iv.size() + ciphertext.size() + tag.size();
}

Iv
IvSequence::next()
{
  Iv iv{};
  for (int i = 0; i < 4; i++) {
    iv[i] = static_cast<std::uint8_t>(_domain >> (8 * i));
  }
  put_le64(iv.data() + 4, _counter++);
  return iv;
}

SealedBox
seal(const Digest& key,
     std::span<const std::uint8_t> ad,
     std::span<const std::uint8_t> plaintext,
     const Iv& iv)
{
  ensure_sodium();

  SealedBox box;
  box.iv = iv;
  box.ad.assign(ad.begin(), ad.end());
  box.ciphertext.resize(plaintext.size());
  box.tag.resize(crypto_aead_chacha20poly1305_ietf_ABYTES);

  unsigned long long tag_len = 0;
  crypto_aead_chacha20poly1305_ietf_encrypt_detached(box.ciphertext.data(),
                                                     box.tag.data(),
                                                     &tag_len,
                                                     plaintext.data(),
                                                     plaintext.size(),
                                                     box.ad.data(),
                                                     box.ad.size(),
                                                     nullptr,
                                                     box.iv.data(),
                                                     key.bytes.data());
  box.tag.resize(tag_len);
  return box;
}

std::optional<Bytes>
open(const Digest& key, const SealedBox& box)
{
  ensure_sodium();
  if (box.tag.size() != crypto_aead_chacha20poly1305_ietf_ABYTES) {
    return std::nullopt;
  }

  Bytes pt(box.ciphertext.size());
  const auto rv =
    crypto_aead_chacha20poly1305_ietf_decrypt_detached(pt.data(),
                                                       nullptr,
                                                       box.ciphertext.data(),
                                                       box.ciphertext.size(),
                                                       box.tag.data(),
                                                       box.ad.data(),
                                                       box.ad.size(),
                                                       box.iv.data(),
                                                       key.bytes.data());
  if (rv != 0) {
    return std::nullopt;
  }
  return pt;
}

Digest
SeededRng::next_bytes()
{
  ensure_sodium();
  std::array<std::uint8_t, 16> in{};
  put_le64(in.data(), _seed);
  put_le64(in.data() + 8, _counter++);

  Digest out;
  crypto_hash_sha256(out.bytes.data(), in.data(), in.size());
  return out;
}

std::uint64_t
SeededRng::next_u64()
{
  const auto d = next_bytes();
  std::uint64_t v = 0;
  for (int i = 0; i < 8; i++) {
    v |= static_cast<std::uint64_t>(d.bytes[i]) << (8 * i);
  }
  return v;
}

std::uint64_t
SeededRng::uniform(std::uint64_t bound)
{
  if (bound == 0) {
    throw DomainError("uniform: empty range");
  }
  // Rejection sampling keeps the draw unbiased.
  const auto limit = UINT64_MAX - (UINT64_MAX % bound);
  for (;;) {
    const auto v = next_u64();
    if (v < limit) {
      return v % bound;
    }
  }
}

Nonce
next_nonce(SeededRng& rng, MemberId origin)
{
  return { rng.next_bytes(), origin, 0 };
}

Digest
hmac(const Digest& key, std::span<const std::uint8_t> data)
{
  ensure_sodium();
  Digest out;
  crypto_auth_hmacsha256_state st;
  crypto_auth_hmacsha256_init(&st, key.bytes.data(), key.bytes.size());
  crypto_auth_hmacsha256_update(&st, data.data(), data.size());
  crypto_auth_hmacsha256_final(&st, out.bytes.data());
  return out;
}

} // namespace sgrs
