#pragma once

#include "sgrs/scenario.hpp"

#include <sodium.h>

#include <string>

namespace sgrs::test {

// Plain SHA-256 over u8 len(label) || label || a || b, written without the library helpers.
inline Digest
oracle_kdf2(const std::string& label, const Digest& a, const Digest& b)
{
  Bytes input;
  input.push_back(static_cast<std::uint8_t>(label.size()));
  input.insert(input.end(), label.begin(), label.end());
  input.insert(input.end(), a.bytes.begin(), a.bytes.end());
  input.insert(input.end(), b.bytes.begin(), b.bytes.end());
  Digest out;
  crypto_hash_sha256(out.bytes.data(), input.data(), input.size());
  return out;
}

inline Digest
oracle_xor(std::initializer_list<Digest> values)
{
  Digest out{};
  for (const auto& v : values) {
    for (std::size_t i = 0; i < out.bytes.size(); i++) {
      out.bytes[i] ^= v.bytes[i];
    }
  }
  return out;
}

// Opens the nth message carrying `step` with the key the network recorded for it.
inline Payload
open_step(const Network& net, const std::string& step, std::size_t nth = 0)
{
  const auto& msgs = net.transcript();
  for (std::size_t i = 0; i < msgs.size(); i++) {
    if (msgs[i].step_tag == step && nth-- == 0) {
      const auto pt = open(net.sealing_key({ false, i }), msgs[i].box);
      if (!pt) {
        throw std::runtime_error("recorded key does not open " + step);
      }
      return decode_payload(*pt).value();
    }
  }
  throw std::runtime_error("no message tagged " + step);
}

inline std::size_t
count_step(const Network& net, const std::string& step)
{
  std::size_t n = 0;
  for (const auto& m : net.transcript()) {
    n += m.step_tag == step ? 1 : 0;
  }
  return n;
}

inline std::vector<MemberId>
ids(std::initializer_list<std::uint32_t> values)
{
  std::vector<MemberId> out;
  for (auto v : values) {
    out.emplace_back(v);
  }
  return out;
}

inline MembershipEvent
join(std::uint32_t group, std::uint32_t member, std::optional<std::uint32_t> sponsor = {})
{
  MembershipEvent e;
  e.kind = EventKind::Join;
  e.group = GroupId{ group };
  e.members = { MemberId{ member } };
  if (sponsor) {
    e.sponsor = MemberId{ *sponsor };
  }
  return e;
}

inline MembershipEvent
leave(std::uint32_t group, std::uint32_t member, std::optional<std::uint32_t> sponsor = {})
{
  auto e = join(group, member, sponsor);
  e.kind = EventKind::Leave;
  return e;
}

inline MembershipEvent
partition(std::uint32_t group,
          std::initializer_list<std::uint32_t> members,
          std::optional<std::uint32_t> sponsor = {})
{
  MembershipEvent e;
  e.kind = EventKind::Partition;
  e.group = GroupId{ group };
  e.members = ids(members);
  if (sponsor) {
    e.sponsor = MemberId{ *sponsor };
  }
  return e;
}

inline MembershipEvent
merge(std::initializer_list<std::uint32_t> groups,
      std::optional<std::uint32_t> sponsor = {},
      std::optional<std::uint32_t> sponsor_b = {})
{
  MembershipEvent e;
  e.kind = EventKind::Merge;
  for (auto g : groups) {
    e.groups.emplace_back(g);
  }
  if (sponsor) {
    e.sponsor = MemberId{ *sponsor };
  }
  if (sponsor_b) {
    e.sponsor_b = MemberId{ *sponsor_b };
  }
  return e;
}

inline std::vector<MemberId>
range_ids(std::uint32_t first, std::uint32_t last)
{
  std::vector<MemberId> out;
  for (auto i = first; i <= last; i++) {
    out.emplace_back(i);
  }
  return out;
}

} // namespace sgrs::test
