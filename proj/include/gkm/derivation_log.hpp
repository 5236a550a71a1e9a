#pragma once

#include <cstddef>
#include <string>
#include <unordered_set>
#include <vector>

#include "gkm/crypto.hpp"

namespace gkm {

enum class DerivationOp : std::uint8_t { blind, mix, xor_ };

std::string to_string(DerivationOp op);

/// One server-side computation: output = op(inputs...).
struct Derivation {
    DerivationOp op = DerivationOp::blind;
    std::vector<crypto::Bytes> inputs;
    crypto::Bytes output;
};

/// Record of every one-way / mixing / XOR computation performed while a
/// scenario runs. The adversary treats these values as its atom universe.
class DerivationLog {
public:
    void record_blind(const crypto::Bytes& in, const crypto::Bytes& out);
    void record_mix(const crypto::Bytes& left, const crypto::Bytes& right, const crypto::Bytes& out);
    void record_xor(const crypto::Bytes& a, const crypto::Bytes& b, const crypto::Bytes& out);

    const std::vector<Derivation>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

private:
    void add(Derivation d);

    std::vector<Derivation> entries_;
    std::unordered_set<std::string> seen_;
};

/// Primitives that also log themselves when a log is attached.
class RecordingCrypto {
public:
    explicit RecordingCrypto(DerivationLog* log = nullptr) : log_(log) {}

    void attach(DerivationLog* log) { log_ = log; }
    DerivationLog* log() const { return log_; }

    crypto::BlindedKey blind(const crypto::Key& k) const;
    crypto::Key mix(const crypto::BlindedKey& left, const crypto::BlindedKey& right) const;
    crypto::BlindedKey refresh_blinded(const crypto::BlindedKey& b, const crypto::Nonce& r) const;
    /// Node key refresh: blind(k XOR r).
    crypto::Key refresh_key(const crypto::Key& k, const crypto::Nonce& r) const;

private:
    DerivationLog* log_ = nullptr;
};

} // namespace gkm
