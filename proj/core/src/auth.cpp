#include "sgrs/protocols.hpp"

#include <array>

namespace sgrs {

namespace {

constexpr std::array<std::pair<Mutation, std::string_view>, 5> mutation_table{ {
  { Mutation::None, "none" },
  { Mutation::JoinKeyMix, "join-key-mix" },
  { Mutation::LeaveRehash, "leave-rehash" },
  { Mutation::MergeSponsorRehash, "merge-sponsor-rehash" },
  { Mutation::PartitionG, "partition-g" },
} };

Bytes
mac_input(std::span<const Nonce> nonces, MemberId subject)
{
  Bytes data;
  for (int i = 0; i < 4; i++) {
    data.push_back(static_cast<std::uint8_t>(subject.value() >> (8 * i)));
  }
  for (const auto& n : nonces) {
    data.insert(data.end(), n.value.bytes.begin(), n.value.bytes.end());
  }
  return data;
}

} // namespace

std::string_view
mutation_name(Mutation m)
{
  for (const auto& [k, name] : mutation_table) {
    if (k == m) {
      return name;
    }
  }
  return "none";
}

Mutation
parse_mutation(std::string_view name)
{
  for (const auto& [k, n] : mutation_table) {
    if (n == name) {
      return k;
    }
  }
  throw ConfigError("unknown mutation: " + std::string(name));
}

Digest
AuthServerStub::sign(std::span<const Nonce> nonces, MemberId subject) const
{
  return hmac(_mac_key, mac_input(nonces, subject));
}

bool
AuthServerStub::verify(std::span<const Nonce> nonces,
                       MemberId subject,
                       const Digest& mac) const
{
  return sign(nonces, subject) == mac;
}

JoinTag
issue_join_tag(const GroupSnapshot& g,
               MemberId joiner,
               MemberId sponsor,
               ProtocolContext& ctx)
{
  if (!ctx.auth.enrolled(joiner)) {
    throw AuthRefused("member " + to_string(joiner) + " is not enrolled");
  }
  if (g.ring.contains(joiner)) {
    throw Refused("member " + to_string(joiner) + " is already in " + to_string(g.id));
  }
  if (!g.ring.contains(sponsor)) {
    throw DomainError("sponsor " + to_string(sponsor) + " is not in " + to_string(g.id));
  }

  auto& net = ctx.net;
  const auto& sponsor_nonce = g.shared_nonces.at(sponsor);

  JoinTag tag;
  tag.joiner = joiner;
  tag.sponsor = sponsor;
  tag.joiner_nonce = next_nonce(ctx.rng, joiner);

  const auto next_key =
    ctx.mutation == Mutation::JoinKeyMix
      ? g.group_key
      : net.hash(KdfLabel::GroupKeyJoin, g.group_key, sponsor_nonce.value, "auth.tag",
                 Counting::Uncounted);

  Payload state;
  for (const auto& [origin, n] : g.shared_nonces) {
    if (origin != sponsor) {
      state.push_back(Item::nonce(n));
    }
  }
  state.push_back(Item::nonce(tag.joiner_nonce));
  tag.state_box = net.deliver_private(state, next_key, "auth.tag.state");

  // The signature doubles as the joiner's credential for the welcome key.
  const std::array<Nonce, 1> signed_part{ tag.joiner_nonce };
  tag.credential = ctx.auth.sign(signed_part, joiner);
  const Payload request{ Item::nonce(tag.joiner_nonce), Item::mac(tag.credential) };
  const std::array<Nonce, 1> index{ sponsor_nonce };
  const auto request_key =
    net.multicast_key(index, g.group_key, "auth.tag", Counting::Uncounted);
  tag.request_box = net.deliver_private(request, request_key, "auth.tag.request");
  tag.request_bytes = net.sizes().abstract_size(request, 1);
  return tag;
}

} // namespace sgrs
