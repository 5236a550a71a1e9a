#pragma once

// Symbolic-but-real primitives shared by every scheme:
//   blind(k)             = SHA-256("g" || k), truncated to the key width
//   mix(a, b)            = SHA-256("f" || a || b), truncated
//   refresh_key(k,r)     = blind(k XOR r)
//   refresh_blinded(b,r) = blind(b XOR r)
// and an AES-256-GCM layer whose key is SHA-256("e" || k).

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gkm/errors.hpp"

namespace gkm::crypto {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::size_t kDefaultKeyBits = 128;

/// Key width in bits; a multiple of 8 between 64 and 256.
class KeyWidth {
public:
    constexpr KeyWidth() = default;
    explicit KeyWidth(std::size_t bits);

    std::size_t bits() const { return bits_; }
    std::size_t bytes() const { return bits_ / 8; }

    friend bool operator==(KeyWidth, KeyWidth) = default;

private:
    std::size_t bits_ = kDefaultKeyBits;
};

enum class KeyOrigin : std::uint8_t { individual, node, group, derived };

/// Fixed-width secret value. Tag distinguishes keys, blinded keys and nonces
/// at the type level; all three share the same width so XOR composes.
template <class Tag>
struct Secret {
    Bytes bits;

    std::size_t width_bits() const { return bits.size() * 8; }
    friend bool operator==(const Secret&, const Secret&) = default;
    friend auto operator<=>(const Secret&, const Secret&) = default;
};

struct KeyTag {};
struct BlindedTag {};
struct NonceTag {};

struct Key : Secret<KeyTag> {
    KeyOrigin origin = KeyOrigin::node;

    // Identity is the bit string; origin is bookkeeping only.
    friend bool operator==(const Key& a, const Key& b) { return a.bits == b.bits; }
};
using BlindedKey = Secret<BlindedTag>;
using Nonce = Secret<NonceTag>;

/// Seedable deterministic randomness source.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    Bytes bytes(std::size_t n);
    std::uint64_t next() { return engine_(); }
    std::uint64_t uniform(std::uint64_t bound); // [0, bound)

private:
    std::mt19937_64 engine_;
};

Key gen_key(Rng& rng, KeyWidth width, KeyOrigin origin = KeyOrigin::node);
Nonce gen_nonce(Rng& rng, KeyWidth width);

BlindedKey blind(const Key& k);
Key mix(const BlindedKey& left, const BlindedKey& right);
Key refresh_key(const Key& k, const Nonce& r);
BlindedKey refresh_blinded(const BlindedKey& b, const Nonce& r);

Bytes xor_bytes(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

/// Raw hash helpers over untyped atoms (used by the adversary's closure).
Bytes blind_bytes(std::span<const std::uint8_t> v);
Bytes mix_bytes(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

/// 8-byte public key identifier carried by ciphertexts.
std::uint64_t key_id(std::span<const std::uint8_t> key);

enum class PayloadKind : std::uint8_t { node_key, blinded_node_key, nonce };

std::string to_string(PayloadKind kind);

/// What a ciphertext carries. `subject` is the node (or member) the secret
/// belongs to; it is authenticated as associated data.
struct PayloadDescriptor {
    PayloadKind kind = PayloadKind::node_key;
    std::uint64_t subject = 0;

    friend bool operator==(const PayloadDescriptor&, const PayloadDescriptor&) = default;
};

struct Payload {
    PayloadDescriptor descriptor;
    Bytes bytes;

    friend bool operator==(const Payload&, const Payload&) = default;
};

struct Ciphertext {
    PayloadDescriptor descriptor;
    std::uint64_t key_id = 0;
    Bytes iv;
    Bytes body;
    Bytes tag;
};

Ciphertext encrypt(std::span<const std::uint8_t> key, const Payload& payload, Rng& rng);
inline Ciphertext encrypt(const Key& k, const Payload& payload, Rng& rng) { return encrypt(k.bits, payload, rng); }

/// Throws WrongKey when authentication fails.
Payload decrypt(std::span<const std::uint8_t> key, const Ciphertext& c);
inline Payload decrypt(const Key& k, const Ciphertext& c) { return decrypt(k.bits, c); }

std::string to_hex(std::span<const std::uint8_t> v);

struct BytesHash {
    std::size_t operator()(const Bytes& b) const noexcept;
};

} // namespace gkm::crypto
