#pragma once

#include <vector>

#include "gkm/scheme.hpp"

namespace gkm {

/// Logical key hierarchy: every key on a changed path is replaced by a fresh
/// random key and sent down under both children.
class LkhScheme : public TreeScheme {
public:
    explicit LkhScheme(SchemeConfig config) : LkhScheme(SchemeKind::lkh, config) {}

    RekeyBatch join(MemberId id, std::optional<MemberId> beside = std::nullopt) override;
    RekeyBatch leave(MemberId id) override;
    void initialize(std::span<const MemberId> ids) override;
    MemberState enroll(MemberId id) const override;

protected:
    LkhScheme(SchemeKind kind, SchemeConfig config) : TreeScheme(kind, config) {}

    /// Handles the first join and bootstrap; returns the inserted leaf.
    InsertResult place(MemberId id, std::optional<MemberId> beside, RekeyBatch& batch);
    /// Fresh keys for `changed` (bottom-up, ending at the root).
    void renew(const std::vector<NodeId>& changed, RekeyBatch& batch);
    /// Sends each changed key under both children, bottom-up. The message
    /// encrypted under `lead` (when set) goes first.
    void distribute(const std::vector<NodeId>& changed, NodeId lead, RekeyBatch& batch);
    /// Root child not containing `node`, or kNoNode when `node` is the root.
    NodeId unaffected_child(NodeId node) const;
    Delivery delivery_under(NodeId node) const;
};

/// One-way function tree: internal keys are mix(blind(left), blind(right)).
class OftScheme : public TreeScheme {
public:
    explicit OftScheme(SchemeConfig config) : OftScheme(SchemeKind::oft, config) {}

    RekeyBatch join(MemberId id, std::optional<MemberId> beside = std::nullopt) override;
    RekeyBatch leave(MemberId id) override;
    void initialize(std::span<const MemberId> ids) override;
    MemberState enroll(MemberId id) const override;
    std::string check_invariants() const override;

protected:
    OftScheme(SchemeKind kind, SchemeConfig config) : TreeScheme(kind, config) {}

    /// Blinded key of a node as published to its sibling subtree.
    crypto::BlindedKey blinded_of(NodeId node) const;

    /// Recomputes every proper ancestor of `from` up to (and including) `stop`,
    /// or up to the root when `stop` is absent.
    void recompute_up(NodeId from, RekeyBatch& batch, NodeId stop = kNoNode);
    /// K' = blind(K ^ r) and B' = blind(B ^ r) on the subtree root and every
    /// internal node below it.
    void refresh_subtree(NodeId root, const crypto::Nonce& r, RekeyBatch& batch);
    /// New key for the sibling of a departed or arrived leaf.
    void rekey_sibling(NodeId node, RekeyBatch& batch);
    /// g(K_V) under K_sibling(V) for V from `from` upward, through the root
    /// child or stopping just below it. `grouped` bundles the messages into
    /// one transmission.
    void publish_path(NodeId from, bool through_root_child, bool grouped, RekeyBatch& batch);

    RekeyBatch classic_leave(MemberId id);
};

} // namespace gkm
