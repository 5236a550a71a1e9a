#include "gkm/crypto.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstring>
#include <limits>
#include <memory>

namespace gkm::crypto {

namespace {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::initializer_list<std::span<const std::uint8_t>> parts) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw Error("sha256: init failed");
    }
    for (auto part : parts) {
        if (EVP_DigestUpdate(ctx.get(), part.data(), part.size()) != 1) {
            throw Error("sha256: update failed");
        }
    }
    Digest out{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != out.size()) {
        throw Error("sha256: final failed");
    }
    return out;
}

std::span<const std::uint8_t> tag_of(const char* t) {
    return {reinterpret_cast<const std::uint8_t*>(t), std::strlen(t)};
}

Bytes truncate(const Digest& d, std::size_t n) { return Bytes(d.begin(), d.begin() + static_cast<long>(n)); }

constexpr std::size_t kIvBytes = 12;
constexpr std::size_t kTagBytes = 16;

std::array<std::uint8_t, 9> descriptor_aad(const PayloadDescriptor& d) {
    std::array<std::uint8_t, 9> aad{};
    aad[0] = static_cast<std::uint8_t>(d.kind);
    for (int i = 0; i < 8; ++i) {
        aad[1 + i] = static_cast<std::uint8_t>(d.subject >> (8 * (7 - i)));
    }
    return aad;
}

using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)>;

} // namespace

KeyWidth::KeyWidth(std::size_t bits) : bits_(bits) {
    if (bits < 64 || bits > 256 || bits % 8 != 0) {
        throw Error("key width must be a multiple of 8 in [64, 256], got " + std::to_string(bits));
    }
}

Bytes Rng::bytes(std::size_t n) {
    Bytes out(n);
    std::size_t i = 0;
    while (i < n) {
        std::uint64_t w = engine_();
        for (int b = 0; b < 8 && i < n; ++b, ++i) {
            out[i] = static_cast<std::uint8_t>(w >> (8 * b));
        }
    }
    return out;
}

std::uint64_t Rng::uniform(std::uint64_t bound) {
    if (bound == 0) {
        throw Error("Rng::uniform: empty range");
    }
    // Rejection sampling keeps the sequence identical across standard libraries.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v = 0;
    do {
        v = engine_();
    } while (v >= limit);
    return v % bound;
}

Key gen_key(Rng& rng, KeyWidth width, KeyOrigin origin) {
    Key k;
    k.bits = rng.bytes(width.bytes());
    k.origin = origin;
    return k;
}

Nonce gen_nonce(Rng& rng, KeyWidth width) { return Nonce{rng.bytes(width.bytes())}; }

Bytes blind_bytes(std::span<const std::uint8_t> v) { return truncate(sha256({tag_of("g"), v}), v.size()); }

Bytes mix_bytes(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    if (a.size() != b.size()) {
        throw Error("mix: width mismatch");
    }
    return truncate(sha256({tag_of("f"), a, b}), a.size());
}

BlindedKey blind(const Key& k) { return BlindedKey{blind_bytes(k.bits)}; }

Key mix(const BlindedKey& left, const BlindedKey& right) {
    Key k;
    k.bits = mix_bytes(left.bits, right.bits);
    k.origin = KeyOrigin::derived;
    return k;
}

Bytes xor_bytes(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    if (a.size() != b.size()) {
        throw Error("xor: width mismatch");
    }
    Bytes out(a.size());
    std::transform(a.begin(), a.end(), b.begin(), out.begin(), [](auto x, auto y) { return x ^ y; });
    return out;
}

Key refresh_key(const Key& k, const Nonce& r) {
    Key out;
    out.bits = blind_bytes(xor_bytes(k.bits, r.bits));
    out.origin = KeyOrigin::derived;
    return out;
}

BlindedKey refresh_blinded(const BlindedKey& b, const Nonce& r) { return BlindedKey{blind_bytes(xor_bytes(b.bits, r.bits))}; }

std::uint64_t key_id(std::span<const std::uint8_t> key) {
    const Digest d = sha256({tag_of("kid"), key});
    std::uint64_t id = 0;
    for (int i = 0; i < 8; ++i) {
        id = (id << 8) | d[i];
    }
    return id;
}

std::string to_string(PayloadKind kind) {
    switch (kind) {
    case PayloadKind::node_key: return "node_key";
    case PayloadKind::blinded_node_key: return "blinded_key";
    case PayloadKind::nonce: return "nonce";
    }
    return "?";
}

Ciphertext encrypt(std::span<const std::uint8_t> key, const Payload& payload, Rng& rng) {
    const Digest aes_key = sha256({tag_of("e"), key});
    Ciphertext c;
    c.descriptor = payload.descriptor;
    c.key_id = key_id(key);
    c.iv = rng.bytes(kIvBytes);
    c.body.resize(payload.bytes.size());
    c.tag.resize(kTagBytes);

    const auto aad = descriptor_aad(payload.descriptor);
    CipherCtx ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
    int len = 0;
    if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, aes_key.data(), c.iv.data()) != 1 ||
        EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1 ||
        EVP_EncryptUpdate(ctx.get(), c.body.data(), &len, payload.bytes.data(), static_cast<int>(payload.bytes.size())) != 1 ||
        EVP_EncryptFinal_ex(ctx.get(), c.body.data() + len, &len) != 1 ||
        EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagBytes, c.tag.data()) != 1) {
        throw Error("encrypt: AES-GCM failure");
    }
    return c;
}

Payload decrypt(std::span<const std::uint8_t> key, const Ciphertext& c) {
    if (key_id(key) != c.key_id) {
        throw WrongKey("decrypt: key identifier mismatch");
    }
    const Digest aes_key = sha256({tag_of("e"), key});
    Payload p;
    p.descriptor = c.descriptor;
    p.bytes.resize(c.body.size());

    const auto aad = descriptor_aad(c.descriptor);
    Bytes tag = c.tag;
    CipherCtx ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
    int len = 0;
    if (!ctx || EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, aes_key.data(), c.iv.data()) != 1 ||
        EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1 ||
        EVP_DecryptUpdate(ctx.get(), p.bytes.data(), &len, c.body.data(), static_cast<int>(c.body.size())) != 1 ||
        EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, static_cast<int>(tag.size()), tag.data()) != 1) {
        throw Error("decrypt: AES-GCM setup failure");
    }
    if (EVP_DecryptFinal_ex(ctx.get(), p.bytes.data() + len, &len) != 1) {
        throw WrongKey("decrypt: authentication failed");
    }
    return p;
}

std::string to_hex(std::span<const std::uint8_t> v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(v.size() * 2);
    for (auto b : v) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

std::size_t BytesHash::operator()(const Bytes& b) const noexcept {
    // Atoms are hash outputs or random draws; FNV over the bytes is plenty.
    std::size_t h = 1469598103934665603ull;
    for (auto x : b) {
        h = (h ^ x) * 1099511628211ull;
    }
    return h;
}

} // namespace gkm::crypto
