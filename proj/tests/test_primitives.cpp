#include "support.hpp"

#include <gtest/gtest.h>

using namespace sgrs;
using sgrs::test::oracle_kdf2;

namespace {

Digest
filled(std::uint8_t v)
{
  Digest d;
  d.bytes.fill(v);
  return d;
}

} // namespace

TEST(Kdf, MatchesPlainSha256Framing)
{
  const auto a = filled(0x11);
  const auto b = filled(0x22);
  EXPECT_EQ(kdf2(KdfLabel::GroupKeyJoin, a, b), oracle_kdf2("GK-join", a, b));
  EXPECT_EQ(kdf2(KdfLabel::GroupKeyLeave, a, b), oracle_kdf2("GK-leave", a, b));
  EXPECT_EQ(kdf2(KdfLabel::NonceRehash, a, b), oracle_kdf2("NR", a, b));
  EXPECT_EQ(kdf2(KdfLabel::MulticastKey, a, b), oracle_kdf2("MK", a, b));
  EXPECT_EQ(kdf2(KdfLabel::SupergroupKey, a, b), oracle_kdf2("SG", a, b));
}

TEST(Kdf, LabelsSeparateDomains)
{
  const auto a = filled(1);
  const auto b = filled(2);
  EXPECT_NE(kdf2(KdfLabel::GroupKeyJoin, a, b), kdf2(KdfLabel::GroupKeyLeave, a, b));
  EXPECT_NE(kdf2(KdfLabel::NonceRehash, a, b), kdf2(KdfLabel::NonceRehash, b, a));
}

TEST(Kdf, UnknownLabelIsAConfigError)
{
  EXPECT_THROW(parse_label("nope"), ConfigError);
  EXPECT_EQ(parse_label("SG"), KdfLabel::SupergroupKey);
}

TEST(Nonces, RehashBumpsVersionAndUsesNr)
{
  const Nonce n{ filled(3), MemberId{ 4 }, 0 };
  const auto with = filled(9);
  const auto r = rehash(n, with);
  EXPECT_EQ(r.version, 1u);
  EXPECT_EQ(r.origin, MemberId{ 4 });
  EXPECT_EQ(r.value, oracle_kdf2("NR", n.value, with));
}

TEST(Nonces, XorCombineOverValues)
{
  const std::array<Nonce, 3> ns{ Nonce{ filled(0x0f), MemberId{ 1 }, 0 },
                                 Nonce{ filled(0xf0), MemberId{ 2 }, 0 },
                                 Nonce{ filled(0x33), MemberId{ 3 }, 0 } };
  EXPECT_EQ(xor_combine(ns), test::oracle_xor({ filled(0x0f), filled(0xf0), filled(0x33) }));
}

TEST(Seal, RoundTripAndWrongKey)
{
  IvSequence ivs(7);
  const Bytes msg{ 1, 2, 3, 4, 5 };
  const Bytes ad{ 9 };
  const auto box = seal(filled(1), ad, msg, ivs.next());
  ASSERT_TRUE(open(filled(1), box).has_value());
  EXPECT_EQ(*open(filled(1), box), msg);
  EXPECT_FALSE(open(filled(2), box).has_value());

  auto tampered = box;
  tampered.ciphertext[0] ^= 1;
  EXPECT_FALSE(open(filled(1), tampered).has_value());
}

TEST(Rng, SameSeedSameStream)
{
  SeededRng a(42);
  SeededRng b(42);
  SeededRng c(43);
  for (int i = 0; i < 10; i++) {
    const auto x = a.next_bytes();
    EXPECT_EQ(x, b.next_bytes());
    EXPECT_NE(x, c.next_bytes());
  }
  for (int i = 0; i < 100; i++) {
    EXPECT_LT(a.uniform(7), 7u);
  }
}

TEST(Payload, EncodeDecodeRoundTrip)
{
  const Payload p{ Item::nonce({ filled(5), MemberId{ 9 }, 2 }), Item::id(MemberId{ 3 }),
                   Item::key(filled(8)), Item::count(12) };
  const auto decoded = decode_payload(encode_payload(p));
  ASSERT_TRUE(decoded.has_value());
  EXPECT_EQ(*decoded, p);
  EXPECT_FALSE(decode_payload(Bytes{ 1, 2, 3 }).has_value());
}

TEST(Payload, AbstractSizesFollowTheSizeModel)
{
  const SizeModel sizes{ 4, 32 };
  const Payload p{ Item::nonce({ filled(5), MemberId{ 9 }, 0 }), Item::id(MemberId{ 3 }),
                   Item::key(filled(8)) };
  EXPECT_EQ(sizes.abstract_size(p, 0), 4u + 4u + 32u);
  EXPECT_EQ(sizes.abstract_size(p, 2), 4u + 4u + 32u + 8u);
  const SizeModel wide{ 8, 64 };
  EXPECT_EQ(wide.abstract_size(p, 1), 8u + 8u + 64u + 8u);
}
