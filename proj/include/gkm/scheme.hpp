#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gkm/crypto.hpp"
#include "gkm/derivation_log.hpp"
#include "gkm/key_tree.hpp"

namespace gkm {

enum class SchemeKind { simple, lkh, oft, oft_secure, lkh_bottomup };

inline constexpr SchemeKind kAllSchemes[] = {SchemeKind::simple, SchemeKind::lkh, SchemeKind::oft, SchemeKind::oft_secure,
                                             SchemeKind::lkh_bottomup};

std::string to_string(SchemeKind kind);
std::optional<SchemeKind> parse_scheme(std::string_view name);
bool is_oft_family(SchemeKind kind);

enum class Delivery : std::uint8_t { unicast, multicast };

/// The key a message is encrypted under: a member's individual key or the
/// current key of a tree node.
struct KeyRef {
    enum class Kind : std::uint8_t { individual, node };
    Kind kind = Kind::node;
    MemberId member;
    NodeId node;
    LocationIndex location; // node location at send time
};

struct RekeyMessage {
    std::uint64_t seq = 0;   // assigned by the transcript
    std::uint64_t epoch = 0; // assigned by the transcript
    std::uint32_t transmission = 0;
    Delivery delivery = Delivery::multicast;
    std::vector<MemberId> targets;
    KeyRef key;
    crypto::Ciphertext ciphertext;
    LocationIndex payload_location;

    NodeId payload_node() const { return NodeId{ciphertext.descriptor.subject}; }
    crypto::PayloadKind payload_kind() const { return ciphertext.descriptor.kind; }
};

/// Out-of-band delivery of a joiner's individual key; never counted.
struct Bootstrap {
    MemberId member;
    crypto::Key individual_key;
};

struct RekeyBatch {
    std::vector<RekeyMessage> messages;
    std::vector<NodeId> changed_nodes;
    std::optional<Bootstrap> bootstrap;
    std::vector<std::string> notes;

    /// Appends a message as its own transmission, or bundled into the
    /// previous message's transmission.
    void add(RekeyMessage m, bool same_transmission = false);

    std::size_t count(Delivery d) const;
    std::size_t encryptions() const { return messages.size(); }
    std::size_t transmissions() const;
};

/// Public tree structure as seen by one member.
struct LayoutStep {
    NodeId node;
    LocationIndex location;
    bool leaf = false;
};

struct MemberLayout {
    std::vector<LayoutStep> path;    // own leaf .. root
    std::vector<LayoutStep> copath;  // copath[i] is the sibling of path[i]
    std::vector<bool> sibling_left;  // copath[i] sits left of path[i]
};

class MemberState {
public:
    MemberState(MemberId id, SchemeKind kind, crypto::Key individual_key);

    MemberId id() const { return id_; }
    SchemeKind kind() const { return kind_; }
    const crypto::Key& individual_key() const { return individual_key_; }
    const MemberLayout& layout() const { return layout_; }

    /// Adopt the current public tree structure; drops keys for nodes that
    /// left this member's path or copath.
    void relocate(MemberLayout layout);

    /// Throws WrongKey if this member does not hold the encrypting key.
    void apply(const RekeyMessage& msg);

    std::optional<crypto::Key> group_key() const;

    std::optional<crypto::Key> path_key(NodeId node) const;
    std::optional<crypto::BlindedKey> copath_blinded(NodeId node) const;
    std::size_t path_key_count() const { return path_keys_.size(); }
    std::size_t blinded_key_count() const { return copath_.size(); }

    /// Every blinded key this member holds or can compute directly, indexed by
    /// location: blinded copath keys plus blinded internal path keys.
    std::map<LocationIndex, crypto::BlindedKey> blinded_view() const;

    /// All secret values the member holds (adversary seed material).
    std::vector<crypto::Bytes> knowledge() const;

    /// Out-of-band enrollment used by bulk initialization.
    void install_path_key(NodeId node, crypto::Key k);
    void install_copath_blinded(NodeId node, crypto::BlindedKey b);
    void install_path_blinded(NodeId node, crypto::BlindedKey b);

private:
    std::optional<crypto::Key> decryption_key(const KeyRef& ref) const;
    std::optional<std::size_t> path_index(NodeId node) const;
    std::optional<std::size_t> copath_index(NodeId node) const;
    std::optional<crypto::BlindedKey> own_blinded(std::size_t index) const;
    void recompute_from(std::size_t index);
    void apply_refresh(std::size_t subtree_index, const crypto::Nonce& r);

    MemberId id_;
    SchemeKind kind_;
    crypto::Key individual_key_;
    MemberLayout layout_;
    std::unordered_map<NodeId, crypto::Key> path_keys_;
    std::unordered_map<NodeId, crypto::BlindedKey> copath_;
    std::unordered_map<NodeId, crypto::BlindedKey> path_blinded_; // refreshed path nodes only
};

struct SchemeConfig {
    crypto::KeyWidth width;
    std::uint64_t seed = 0x5eed;
};

/// Common contract of every rekeying scheme: the server side of joins and
/// leaves, producing the messages members need to stay consistent.
class Scheme {
public:
    Scheme(SchemeKind kind, SchemeConfig config);
    virtual ~Scheme() = default;

    Scheme(const Scheme&) = delete;
    Scheme& operator=(const Scheme&) = delete;

    SchemeKind kind() const { return kind_; }
    crypto::KeyWidth width() const { return config_.width; }

    virtual RekeyBatch join(MemberId id, std::optional<MemberId> beside = std::nullopt) = 0;
    virtual RekeyBatch leave(MemberId id) = 0;

    /// Bulk, out-of-band set-up of a group with members in left-to-right order.
    virtual void initialize(std::span<const MemberId> ids) = 0;
    /// Full key state handed to a member of a bulk-initialized group.
    virtual MemberState enroll(MemberId id) const = 0;

    virtual bool contains(MemberId id) const = 0;
    virtual std::size_t member_count() const = 0;
    virtual std::vector<MemberId> members() const = 0;
    virtual MemberLayout layout_of(MemberId id) const = 0;
    virtual std::optional<crypto::Key> group_key() const = 0;

    /// Depth of a member's leaf, the h used by the cost formulas.
    virtual int member_depth(MemberId id) const = 0;

    /// Structural / key-derivation self check; empty string when sound.
    virtual std::string check_invariants() const { return {}; }

    void attach_log(DerivationLog* log) { crypto_.attach(log); }
    const crypto::Key& individual_key(MemberId id) const;

protected:
    crypto::Key issue_individual_key(MemberId id);
    void forget_individual_key(MemberId id);

    RekeyMessage seal(Delivery delivery, KeyRef ref, const crypto::Key& key, crypto::PayloadKind kind, NodeId subject,
                      LocationIndex subject_location, const crypto::Bytes& payload, std::vector<MemberId> targets);

    SchemeKind kind_;
    SchemeConfig config_;
    crypto::Rng rng_;
    RecordingCrypto crypto_;
    std::unordered_map<MemberId, crypto::Key> individual_keys_;
};

/// Base for the four tree-backed schemes.
class TreeScheme : public Scheme {
public:
    using Scheme::Scheme;

    bool contains(MemberId id) const override { return tree_.contains(id); }
    std::size_t member_count() const override { return tree_.member_count(); }
    std::vector<MemberId> members() const override { return tree_.members(); }
    MemberLayout layout_of(MemberId id) const override;
    std::optional<crypto::Key> group_key() const override;
    int member_depth(MemberId id) const override { return tree_.depth(tree_.leaf_of(id)); }
    std::string check_invariants() const override { return tree_.check_invariants(); }

    const KeyTree& tree() const { return tree_; }

protected:
    KeyRef node_ref(NodeId node) const;
    KeyRef individual_ref(MemberId m) const;

    /// Encrypt `payload` (describing `subject`) under the current key of
    /// `under`, addressed to every member below `under`.
    RekeyMessage to_node(Delivery delivery, NodeId under, crypto::PayloadKind kind, NodeId subject,
                         const crypto::Bytes& payload);
    RekeyMessage to_individual(MemberId m, crypto::PayloadKind kind, NodeId subject, const crypto::Bytes& payload);

    KeyTree tree_;
};

std::unique_ptr<Scheme> make_scheme(SchemeKind kind, SchemeConfig config = {});

} // namespace gkm
