#include "gkm/derivation_log.hpp"

namespace gkm {

std::string to_string(DerivationOp op) {
    switch (op) {
    case DerivationOp::blind: return "blind";
    case DerivationOp::mix: return "mix";
    case DerivationOp::xor_: return "xor";
    }
    return "?";
}

void DerivationLog::add(Derivation d) {
    std::string fingerprint(1, static_cast<char>(d.op));
    for (const auto& in : d.inputs) {
        fingerprint.append(in.begin(), in.end());
        fingerprint.push_back('|');
    }
    if (seen_.insert(std::move(fingerprint)).second) {
        entries_.push_back(std::move(d));
    }
}

void DerivationLog::record_blind(const crypto::Bytes& in, const crypto::Bytes& out) {
    add({DerivationOp::blind, {in}, out});
}

void DerivationLog::record_mix(const crypto::Bytes& left, const crypto::Bytes& right, const crypto::Bytes& out) {
    add({DerivationOp::mix, {left, right}, out});
}

void DerivationLog::record_xor(const crypto::Bytes& a, const crypto::Bytes& b, const crypto::Bytes& out) {
    add({DerivationOp::xor_, {a, b}, out});
}

crypto::BlindedKey RecordingCrypto::blind(const crypto::Key& k) const {
    auto out = crypto::blind(k);
    if (log_) {
        log_->record_blind(k.bits, out.bits);
    }
    return out;
}

crypto::Key RecordingCrypto::mix(const crypto::BlindedKey& left, const crypto::BlindedKey& right) const {
    auto out = crypto::mix(left, right);
    if (log_) {
        log_->record_mix(left.bits, right.bits, out.bits);
    }
    return out;
}

crypto::BlindedKey RecordingCrypto::refresh_blinded(const crypto::BlindedKey& b, const crypto::Nonce& r) const {
    const auto x = crypto::xor_bytes(b.bits, r.bits);
    auto out = crypto::BlindedKey{crypto::blind_bytes(x)};
    if (log_) {
        log_->record_xor(b.bits, r.bits, x);
        log_->record_blind(x, out.bits);
    }
    return out;
}

crypto::Key RecordingCrypto::refresh_key(const crypto::Key& k, const crypto::Nonce& r) const {
    const auto x = crypto::xor_bytes(k.bits, r.bits);
    crypto::Key out;
    out.bits = crypto::blind_bytes(x);
    out.origin = crypto::KeyOrigin::derived;
    if (log_) {
        log_->record_xor(k.bits, r.bits, x);
        log_->record_blind(x, out.bits);
    }
    return out;
}

} // namespace gkm
