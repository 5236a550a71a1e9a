#pragma once

#include <vector>

#include "gkm/scheme.hpp"

namespace gkm {

/// Star baseline: one group key, re-sent under every member's individual
/// key on each membership change.
class SimpleScheme : public Scheme {
public:
    /// Pseudo node that names the group key in descriptors and layouts.
    static constexpr NodeId kGroupNode{1};

    explicit SimpleScheme(SchemeConfig config) : Scheme(SchemeKind::simple, config) {}

    RekeyBatch join(MemberId id, std::optional<MemberId> beside = std::nullopt) override;
    RekeyBatch leave(MemberId id) override;
    void initialize(std::span<const MemberId> ids) override;
    MemberState enroll(MemberId id) const override;

    bool contains(MemberId id) const override;
    std::size_t member_count() const override { return members_.size(); }
    std::vector<MemberId> members() const override { return members_; }
    MemberLayout layout_of(MemberId id) const override;
    std::optional<crypto::Key> group_key() const override { return group_key_; }
    int member_depth(MemberId) const override { return 0; }

private:
    RekeyMessage send_group_key(MemberId to, Delivery delivery);

    std::vector<MemberId> members_;
    std::optional<crypto::Key> group_key_;
};

} // namespace gkm
