#include "gkm/scheme.hpp"

#include <algorithm>
#include <set>

#include "gkm/schemes_classic.hpp"
#include "gkm/schemes_proposed.hpp"
#include "gkm/simple_scheme.hpp"

namespace gkm {

std::string to_string(SchemeKind kind) {
    switch (kind) {
    case SchemeKind::simple: return "simple";
    case SchemeKind::lkh: return "lkh";
    case SchemeKind::oft: return "oft";
    case SchemeKind::oft_secure: return "oft-secure";
    case SchemeKind::lkh_bottomup: return "lkh-bottomup";
    }
    return "?";
}

std::optional<SchemeKind> parse_scheme(std::string_view name) {
    for (SchemeKind k : kAllSchemes) {
        if (to_string(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

bool is_oft_family(SchemeKind kind) { return kind == SchemeKind::oft || kind == SchemeKind::oft_secure; }

std::size_t RekeyBatch::count(Delivery d) const {
    return static_cast<std::size_t>(
        std::count_if(messages.begin(), messages.end(), [d](const RekeyMessage& m) { return m.delivery == d; }));
}

void RekeyBatch::add(RekeyMessage m, bool same_transmission) {
    if (messages.empty()) {
        m.transmission = 0;
    } else {
        m.transmission = messages.back().transmission + (same_transmission ? 0 : 1);
    }
    messages.push_back(std::move(m));
}

std::size_t RekeyBatch::transmissions() const {
    std::set<std::uint32_t> ids;
    for (const auto& m : messages) {
        ids.insert(m.transmission);
    }
    return ids.size();
}

// ---------------------------------------------------------------------------
// MemberState

MemberState::MemberState(MemberId id, SchemeKind kind, crypto::Key individual_key)
    : id_(id), kind_(kind), individual_key_(std::move(individual_key)) {
    individual_key_.origin = crypto::KeyOrigin::individual;
}

void MemberState::relocate(MemberLayout layout) {
    const bool first = layout_.path.empty();
    layout_ = std::move(layout);

    std::erase_if(path_keys_, [this](const auto& kv) { return !path_index(kv.first); });
    std::erase_if(copath_, [this](const auto& kv) { return !copath_index(kv.first); });
    std::erase_if(path_blinded_, [this](const auto& kv) { return !path_index(kv.first); });

    // LKH leaves start out keyed with the individual key.
    if (first && !layout_.path.empty() && (kind_ == SchemeKind::lkh || kind_ == SchemeKind::lkh_bottomup)) {
        path_keys_.try_emplace(layout_.path.front().node, individual_key_);
    }
}

std::optional<std::size_t> MemberState::path_index(NodeId node) const {
    for (std::size_t i = 0; i < layout_.path.size(); ++i) {
        if (layout_.path[i].node == node) {
            return i;
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> MemberState::copath_index(NodeId node) const {
    for (std::size_t i = 0; i < layout_.copath.size(); ++i) {
        if (layout_.copath[i].node == node) {
            return i;
        }
    }
    return std::nullopt;
}

std::optional<crypto::Key> MemberState::decryption_key(const KeyRef& ref) const {
    if (ref.kind == KeyRef::Kind::individual) {
        if (ref.member != id_) {
            return std::nullopt;
        }
        return individual_key_;
    }
    return path_key(ref.node);
}

std::optional<crypto::Key> MemberState::path_key(NodeId node) const {
    auto it = path_keys_.find(node);
    if (it == path_keys_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<crypto::BlindedKey> MemberState::copath_blinded(NodeId node) const {
    auto it = copath_.find(node);
    if (it == copath_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<crypto::BlindedKey> MemberState::own_blinded(std::size_t index) const {
    const NodeId node = layout_.path[index].node;
    if (auto it = path_blinded_.find(node); it != path_blinded_.end()) {
        return it->second;
    }
    if (auto k = path_key(node)) {
        return crypto::blind(*k);
    }
    return std::nullopt;
}

void MemberState::recompute_from(std::size_t index) {
    for (std::size_t t = std::max<std::size_t>(index, 1); t < layout_.path.size(); ++t) {
        const NodeId node = layout_.path[t].node;
        path_blinded_.erase(node);
        const auto own = own_blinded(t - 1);
        auto sib = copath_.find(layout_.copath[t - 1].node);
        if (!own || sib == copath_.end()) {
            path_keys_.erase(node);
            continue;
        }
        path_keys_[node] = layout_.sibling_left[t - 1] ? crypto::mix(sib->second, *own) : crypto::mix(*own, sib->second);
    }
}

void MemberState::apply_refresh(std::size_t subtree_index, const crypto::Nonce& r) {
    // Internal nodes of the refreshed subtree, plus its root even when that
    // root is a leaf. Leaf-level copath keys are left alone.
    for (std::size_t i = 0; i <= subtree_index; ++i) {
        if (i == subtree_index || i >= 1) {
            const NodeId node = layout_.path[i].node;
            auto it = path_keys_.find(node);
            if (it != path_keys_.end()) {
                path_blinded_[node] = crypto::refresh_blinded(*own_blinded(i), r);
                it->second = crypto::refresh_key(it->second, r);
            }
        }
        if (i < subtree_index && !layout_.copath[i].leaf) {
            auto it = copath_.find(layout_.copath[i].node);
            if (it != copath_.end()) {
                it->second = crypto::refresh_blinded(it->second, r);
            }
        }
    }
    recompute_from(subtree_index + 1);
}

void MemberState::apply(const RekeyMessage& msg) {
    auto key = decryption_key(msg.key);
    if (!key) {
        throw WrongKey("member " + std::to_string(id_.value) + " does not hold the key of message " +
                       std::to_string(msg.seq));
    }
    const crypto::Payload payload = crypto::decrypt(*key, msg.ciphertext);
    const NodeId subject{payload.descriptor.subject};

    switch (payload.descriptor.kind) {
    case crypto::PayloadKind::node_key: {
        auto idx = path_index(subject);
        if (!idx) {
            return;
        }
        crypto::Key k;
        k.bits = payload.bytes;
        path_keys_[subject] = std::move(k);
        path_blinded_.erase(subject);
        if (is_oft_family(kind_)) {
            recompute_from(*idx + 1);
        }
        return;
    }
    case crypto::PayloadKind::blinded_node_key: {
        auto idx = copath_index(subject);
        if (!idx) {
            return;
        }
        copath_[subject] = crypto::BlindedKey{payload.bytes};
        recompute_from(*idx + 1);
        return;
    }
    case crypto::PayloadKind::nonce: {
        auto idx = path_index(subject);
        if (!idx) {
            return;
        }
        apply_refresh(*idx, crypto::Nonce{payload.bytes});
        return;
    }
    }
}

std::optional<crypto::Key> MemberState::group_key() const {
    if (layout_.path.empty()) {
        return std::nullopt;
    }
    return path_key(layout_.path.back().node);
}

std::map<LocationIndex, crypto::BlindedKey> MemberState::blinded_view() const {
    std::map<LocationIndex, crypto::BlindedKey> view;
    for (const auto& step : layout_.copath) {
        if (auto b = copath_blinded(step.node)) {
            view[step.location] = *b;
        }
    }
    for (std::size_t i = 1; i < layout_.path.size(); ++i) {
        if (auto b = own_blinded(i)) {
            view[layout_.path[i].location] = *b;
        }
    }
    return view;
}

std::vector<crypto::Bytes> MemberState::knowledge() const {
    std::vector<crypto::Bytes> out{individual_key_.bits};
    for (const auto& [node, k] : path_keys_) {
        out.push_back(k.bits);
    }
    for (const auto& [node, b] : copath_) {
        out.push_back(b.bits);
    }
    for (const auto& [node, b] : path_blinded_) {
        out.push_back(b.bits);
    }
    return out;
}

void MemberState::install_path_key(NodeId node, crypto::Key k) { path_keys_[node] = std::move(k); }

void MemberState::install_copath_blinded(NodeId node, crypto::BlindedKey b) { copath_[node] = std::move(b); }

void MemberState::install_path_blinded(NodeId node, crypto::BlindedKey b) { path_blinded_[node] = std::move(b); }

// ---------------------------------------------------------------------------
// Scheme

Scheme::Scheme(SchemeKind kind, SchemeConfig config) : kind_(kind), config_(config), rng_(config.seed) {}

const crypto::Key& Scheme::individual_key(MemberId id) const {
    auto it = individual_keys_.find(id);
    if (it == individual_keys_.end()) {
        throw UnknownMember("no individual key for member " + std::to_string(id.value));
    }
    return it->second;
}

crypto::Key Scheme::issue_individual_key(MemberId id) {
    auto k = crypto::gen_key(rng_, config_.width, crypto::KeyOrigin::individual);
    individual_keys_[id] = k;
    return k;
}

void Scheme::forget_individual_key(MemberId id) { individual_keys_.erase(id); }

RekeyMessage Scheme::seal(Delivery delivery, KeyRef ref, const crypto::Key& key, crypto::PayloadKind kind, NodeId subject,
                          LocationIndex subject_location, const crypto::Bytes& payload, std::vector<MemberId> targets) {
    RekeyMessage m;
    m.delivery = delivery;
    m.key = ref;
    m.targets = std::move(targets);
    std::sort(m.targets.begin(), m.targets.end());
    m.payload_location = subject_location;
    m.ciphertext = crypto::encrypt(key, crypto::Payload{{kind, subject.value}, payload}, rng_);
    return m;
}

// ---------------------------------------------------------------------------
// TreeScheme

MemberLayout TreeScheme::layout_of(MemberId id) const {
    MemberLayout layout;
    const auto report = tree_.path_report(id);
    for (NodeId n : report.path) {
        layout.path.push_back({n, tree_.location(n), tree_.is_leaf(n)});
    }
    for (std::size_t i = 0; i < report.copath.size(); ++i) {
        const NodeId s = report.copath[i];
        layout.copath.push_back({s, tree_.location(s), tree_.is_leaf(s)});
        layout.sibling_left.push_back(tree_.node(tree_.node(s).parent).left == s);
    }
    return layout;
}

std::optional<crypto::Key> TreeScheme::group_key() const {
    if (tree_.empty()) {
        return std::nullopt;
    }
    return tree_.key(tree_.root());
}

KeyRef TreeScheme::node_ref(NodeId node) const {
    KeyRef r;
    r.kind = KeyRef::Kind::node;
    r.node = node;
    r.location = tree_.location(node);
    if (const auto& m = tree_.node(node).member) {
        r.member = *m;
    }
    return r;
}

KeyRef TreeScheme::individual_ref(MemberId m) const {
    KeyRef r;
    r.kind = KeyRef::Kind::individual;
    r.member = m;
    if (tree_.contains(m)) {
        r.node = tree_.leaf_of(m);
        r.location = tree_.location(r.node);
    }
    return r;
}

RekeyMessage TreeScheme::to_node(Delivery delivery, NodeId under, crypto::PayloadKind kind, NodeId subject,
                                 const crypto::Bytes& payload) {
    const LocationIndex loc = tree_.is_alive(subject) ? tree_.location(subject) : LocationIndex{};
    return seal(delivery, node_ref(under), tree_.key(under), kind, subject, loc, payload, tree_.members_under(under));
}

RekeyMessage TreeScheme::to_individual(MemberId m, crypto::PayloadKind kind, NodeId subject, const crypto::Bytes& payload) {
    const LocationIndex loc = tree_.is_alive(subject) ? tree_.location(subject) : LocationIndex{};
    return seal(Delivery::unicast, individual_ref(m), individual_key(m), kind, subject, loc, payload, {m});
}

std::unique_ptr<Scheme> make_scheme(SchemeKind kind, SchemeConfig config) {
    switch (kind) {
    case SchemeKind::simple: return std::make_unique<SimpleScheme>(config);
    case SchemeKind::lkh: return std::make_unique<LkhScheme>(config);
    case SchemeKind::oft: return std::make_unique<OftScheme>(config);
    case SchemeKind::oft_secure: return std::make_unique<SecureOftScheme>(config);
    case SchemeKind::lkh_bottomup: return std::make_unique<BottomUpLkhScheme>(config);
    }
    throw Error("unknown scheme");
}

} // namespace gkm
