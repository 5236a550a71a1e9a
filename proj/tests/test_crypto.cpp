#include <gtest/gtest.h>

#include "gkm/crypto.hpp"
#include "gkm/derivation_log.hpp"

using namespace gkm;
using namespace gkm::crypto;

namespace {

Key counting_key(std::size_t n) {
    Key k;
    for (std::size_t i = 0; i < n; ++i) {
        k.bits.push_back(static_cast<std::uint8_t>(i));
    }
    return k;
}

} // namespace

TEST(Crypto, BlindKnownAnswer) {
    EXPECT_EQ(to_hex(blind(counting_key(16)).bits), "d1835c9a284929eeb45e60b4e2e37ed4");
    EXPECT_EQ(to_hex(blind(counting_key(32)).bits),
              "42c5d8cc396ff327e66ae8dd827cfb075782711c33ce4fcf941817117ecac474");
}

TEST(Crypto, MixKnownAnswerAndOrder) {
    BlindedKey a{Bytes(16, 0xaa)};
    BlindedKey b{Bytes(16, 0x55)};
    EXPECT_EQ(to_hex(mix(a, b).bits), "0cfbcd9fde56c5b239d526ea1762c0a3");
    EXPECT_EQ(to_hex(mix(b, a).bits), "5f3524cfe9f8ad1b9d545eaf78e233d4");
}

TEST(Crypto, RefreshKnownAnswer) {
    Nonce r{Bytes(16, 0x0f)};
    EXPECT_EQ(to_hex(refresh_key(counting_key(16), r).bits), "0e32db0d75b5737a1f36f1732ab55faa");
    EXPECT_EQ(to_hex(refresh_blinded(BlindedKey{Bytes(16, 0xaa)}, r).bits), "0fea3afeb2069395eb7f1a23dffb5e94");
    EXPECT_EQ(refresh_blinded(blind(counting_key(16)), r).bits, blind_bytes(xor_bytes(blind(counting_key(16)).bits, r.bits)));
}

TEST(Crypto, KeyIdKnownAnswer) { EXPECT_EQ(key_id(counting_key(16).bits), 0x21a05bc60782ee18ULL); }

TEST(Crypto, RngIsSeeded) {
    Rng a(42);
    Rng b(42);
    EXPECT_EQ(to_hex(a.bytes(8)), "d6e2e56e7ddf51c1");
    b.bytes(8);
    EXPECT_EQ(a.next(), b.next());
    Rng c(7);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_LT(c.uniform(13), 13u);
    }
}

TEST(Crypto, KeyWidthBounds) {
    EXPECT_EQ(KeyWidth{}.bits(), 128u);
    EXPECT_EQ(KeyWidth{64}.bytes(), 8u);
    EXPECT_THROW(KeyWidth{63}, Error);
    EXPECT_THROW(KeyWidth{264}, Error);
    Rng rng(1);
    EXPECT_EQ(gen_key(rng, KeyWidth{256}).bits.size(), 32u);
    EXPECT_EQ(blind(gen_key(rng, KeyWidth{64})).bits.size(), 8u);
}

TEST(Crypto, EncryptRoundTrip) {
    Rng rng(3);
    const Key k = gen_key(rng, KeyWidth{});
    const Payload p{{PayloadKind::blinded_node_key, 17}, Bytes(16, 0x42)};
    const auto c = encrypt(k, p, rng);
    EXPECT_EQ(c.key_id, key_id(k.bits));
    EXPECT_EQ(decrypt(k, c), p);
}

TEST(Crypto, WrongKeyRejected) {
    Rng rng(4);
    const Key k = gen_key(rng, KeyWidth{});
    const Key other = gen_key(rng, KeyWidth{});
    const auto c = encrypt(k, Payload{{PayloadKind::node_key, 1}, Bytes(16, 1)}, rng);
    EXPECT_THROW(decrypt(other, c), WrongKey);
}

TEST(Crypto, TamperedDescriptorRejected) {
    Rng rng(5);
    const Key k = gen_key(rng, KeyWidth{});
    auto c = encrypt(k, Payload{{PayloadKind::node_key, 1}, Bytes(16, 1)}, rng);
    c.descriptor.subject = 2;
    EXPECT_THROW(decrypt(k, c), WrongKey);
    auto d = encrypt(k, Payload{{PayloadKind::node_key, 1}, Bytes(16, 1)}, rng);
    d.body[0] ^= 1;
    EXPECT_THROW(decrypt(k, d), WrongKey);
}

TEST(Crypto, XorWidthMismatch) { EXPECT_THROW(xor_bytes(Bytes(8, 0), Bytes(16, 0)), Error); }

TEST(DerivationLog, RecordsAndDeduplicates) {
    DerivationLog log;
    RecordingCrypto rc(&log);
    const Key k = counting_key(16);
    const auto b = rc.blind(k);
    rc.blind(k);
    EXPECT_EQ(log.size(), 1u);
    EXPECT_EQ(log.entries()[0].output, b.bits);
    rc.mix(b, b);
    rc.refresh_key(k, Nonce{Bytes(16, 3)});
    EXPECT_EQ(log.size(), 4u); // mix, xor, blind
}
