#pragma once

#include <optional>

#include "gkm/schemes_classic.hpp"

namespace gkm {

/// What the last eviction touched: the root child holding the promoted
/// sibling (affected), the other root child (unaffected) and its nonce.
struct EvictionPlan {
    NodeId affected;
    NodeId unaffected;
    NodeId sibling;
    crypto::Nonce nonce;
};

/// OFT whose eviction also refreshes the unaffected half of the tree, so a
/// departed member's blinded keys cannot be combined with later ones.
class SecureOftScheme : public OftScheme {
public:
    explicit SecureOftScheme(SchemeConfig config) : OftScheme(SchemeKind::oft_secure, config) {}

    RekeyBatch leave(MemberId id) override;

    const std::optional<EvictionPlan>& last_plan() const { return last_plan_; }

private:
    std::optional<EvictionPlan> last_plan_;
};

/// LKH variant that sends the root key to the untouched half first and
/// skips the joiner's separate key bundle.
class BottomUpLkhScheme : public LkhScheme {
public:
    explicit BottomUpLkhScheme(SchemeConfig config) : LkhScheme(SchemeKind::lkh_bottomup, config) {}

    RekeyBatch join(MemberId id, std::optional<MemberId> beside = std::nullopt) override;
    RekeyBatch leave(MemberId id) override;
};

} // namespace gkm
