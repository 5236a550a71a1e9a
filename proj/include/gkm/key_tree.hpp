#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gkm/crypto.hpp"

namespace gkm {

template <class Tag, class Rep>
struct StrongId {
    Rep value{};

    constexpr StrongId() = default;
    constexpr explicit StrongId(Rep v) : value(v) {}

    friend constexpr auto operator<=>(StrongId, StrongId) = default;
};

using NodeId = StrongId<struct NodeIdTag, std::uint64_t>;
using MemberId = StrongId<struct MemberIdTag, std::uint32_t>;

inline constexpr NodeId kNoNode{};

/// (level, position): leaves of a perfect tree sit on level 0, the root on
/// level h; positions are 1-based, left to right within a level.
struct LocationIndex {
    int level = 0;
    std::uint64_t position = 1;

    friend auto operator<=>(const LocationIndex&, const LocationIndex&) = default;
};

std::string to_string(const LocationIndex& loc);

struct PathReport {
    std::vector<NodeId> path;   // leaf .. root
    std::vector<NodeId> copath; // sibling of path[i], for i < path.size() - 1
};

struct InsertResult {
    NodeId leaf;
    std::optional<NodeId> parent; // freshly created internal node
    std::optional<NodeId> split;  // node that became the new leaf's sibling
};

struct RemoveResult {
    NodeId removed_leaf;
    std::optional<NodeId> removed_parent;
    std::optional<NodeId> promoted; // sibling subtree now occupying the parent's slot
    PathReport former_path;
};

/// Refresh bookkeeping for nodes whose key was replaced by blind(key ^ r)
/// and whose blinded key by blind(blinded ^ r), instead of being recomputed
/// from the children.
struct NodeRefresh {
    crypto::Key previous;
    crypto::BlindedKey previous_blinded;
    crypto::Nonce nonce;
};

/// Balanced binary key tree. Node ids are never reused; dead nodes stay
/// addressable for transcript references but are not part of the tree.
class KeyTree {
public:
    struct Node {
        NodeId id;
        NodeId parent = kNoNode;
        NodeId left = kNoNode;
        NodeId right = kNoNode;
        std::optional<MemberId> member;
        crypto::Key key;
        std::optional<crypto::BlindedKey> blinded; // set only after a refresh
        std::optional<NodeRefresh> refresh;
        bool alive = true;
    };

    KeyTree();

    bool empty() const { return root_ == kNoNode; }
    std::size_t member_count() const { return leaves_.size(); }
    NodeId root() const { return root_; }
    int height() const;

    bool contains(MemberId m) const { return leaves_.contains(m.value); }
    NodeId leaf_of(MemberId m) const;
    std::vector<MemberId> members() const; // left to right

    const Node& node(NodeId id) const;
    Node& node(NodeId id);
    bool is_leaf(NodeId id) const;
    bool is_alive(NodeId id) const;
    NodeId sibling(NodeId id) const;
    int depth(NodeId id) const;
    LocationIndex location(NodeId id) const;

    const crypto::Key& key(NodeId id) const { return node(id).key; }
    /// blind(key) unless a refresh assigned the blinded key separately.
    crypto::BlindedKey blinded(NodeId id) const;
    void set_key(NodeId id, crypto::Key k);

    /// Splits the slot chosen by the placement policy (or the leaf of
    /// `beside`, when given) and hangs the new member as its right sibling.
    InsertResult insert_leaf(MemberId m, std::optional<MemberId> beside = std::nullopt);
    RemoveResult remove_leaf(MemberId m);

    /// Replaces the tree with the shape produced by inserting `ids` in order.
    void build_in_order(std::span<const MemberId> ids);

    PathReport path_report(MemberId m) const;
    std::vector<NodeId> path(NodeId from) const;
    std::vector<std::pair<LocationIndex, NodeId>> copath(MemberId m) const;
    /// Internal nodes whose keys a membership change at `node` compromises.
    std::vector<NodeId> affected_path(NodeId node) const;

    std::vector<MemberId> members_under(NodeId id) const;
    std::vector<NodeId> subtree(NodeId id) const; // pre-order
    /// Root child containing `id` (or `id` itself when it is a root child).
    NodeId root_child_containing(NodeId id) const;

    /// "level,position,node_id,kind[,member_id]" per line, root first.
    std::string dump() const;

    /// Empty string when every structural invariant holds.
    std::string check_invariants() const;

private:
    NodeId new_node();
    NodeId choose_split() const;
    void replace_child(NodeId parent, NodeId old_child, NodeId new_child);
    NodeId build_range(std::span<const MemberId> ids);

    std::vector<Node> nodes_; // index == NodeId value; slot 0 unused
    std::unordered_map<std::uint32_t, NodeId> leaves_;
    NodeId root_ = kNoNode;
    mutable std::optional<int> height_cache_;
};

} // namespace gkm

template <class Tag, class Rep>
struct std::hash<gkm::StrongId<Tag, Rep>> {
    std::size_t operator()(gkm::StrongId<Tag, Rep> id) const noexcept { return std::hash<Rep>{}(id.value); }
};
