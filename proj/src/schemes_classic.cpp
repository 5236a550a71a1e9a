#include "gkm/schemes_classic.hpp"

#include <algorithm>
#include <sstream>

namespace gkm {

namespace {

std::string missing(MemberId id) { return "member " + std::to_string(id.value) + " is not in the group"; }

} // namespace

// ---------------------------------------------------------------------------
// LKH

Delivery LkhScheme::delivery_under(NodeId node) const {
    return tree_.is_leaf(node) ? Delivery::unicast : Delivery::multicast;
}

InsertResult LkhScheme::place(MemberId id, std::optional<MemberId> beside, RekeyBatch& batch) {
    if (tree_.contains(id)) {
        throw DuplicateMember("member " + std::to_string(id.value) + " is already in the group");
    }
    if (beside && !tree_.contains(*beside)) {
        throw UnknownMember("placement target " + std::to_string(beside->value) + " is not in the group");
    }
    auto k = issue_individual_key(id);
    batch.bootstrap = Bootstrap{id, k};
    auto ins = tree_.insert_leaf(id, beside);
    tree_.set_key(ins.leaf, k);
    return ins;
}

void LkhScheme::renew(const std::vector<NodeId>& changed, RekeyBatch& batch) {
    for (NodeId n : changed) {
        tree_.set_key(n, crypto::gen_key(rng_, config_.width));
        batch.changed_nodes.push_back(n);
    }
}

void LkhScheme::distribute(const std::vector<NodeId>& changed, NodeId lead, RekeyBatch& batch) {
    std::vector<std::pair<NodeId, NodeId>> sends; // (subject, encrypting child)
    for (NodeId n : changed) {
        const auto& node = tree_.node(n);
        sends.emplace_back(n, node.left);
        sends.emplace_back(n, node.right);
    }
    if (lead != kNoNode) {
        auto it = std::find_if(sends.begin(), sends.end(), [&](const auto& s) { return s.second == lead; });
        if (it != sends.end()) {
            std::rotate(sends.begin(), it, it + 1);
        }
    }
    for (const auto& [subject, under] : sends) {
        batch.add(to_node(delivery_under(under), under, crypto::PayloadKind::node_key, subject, tree_.key(subject).bits));
    }
}

NodeId LkhScheme::unaffected_child(NodeId node) const {
    if (node == tree_.root()) {
        return kNoNode;
    }
    return tree_.sibling(tree_.root_child_containing(node));
}

RekeyBatch LkhScheme::join(MemberId id, std::optional<MemberId> beside) {
    RekeyBatch batch;
    const auto ins = place(id, beside, batch);
    if (!ins.parent) {
        // First member: its leaf is the root; hand it a group key of its own.
        tree_.set_key(ins.leaf, crypto::gen_key(rng_, config_.width, crypto::KeyOrigin::group));
        batch.changed_nodes.push_back(ins.leaf);
        batch.add(to_individual(id, crypto::PayloadKind::node_key, ins.leaf, tree_.key(ins.leaf).bits));
        return batch;
    }
    const auto changed = tree_.path(*ins.parent);
    renew(changed, batch);
    for (NodeId n : changed) {
        batch.add(to_individual(id, crypto::PayloadKind::node_key, n, tree_.key(n).bits));
    }
    distribute(changed, kNoNode, batch);
    return batch;
}

RekeyBatch LkhScheme::leave(MemberId id) {
    if (!tree_.contains(id)) {
        throw UnknownMember(missing(id));
    }
    const auto rm = tree_.remove_leaf(id);
    forget_individual_key(id);
    RekeyBatch batch;
    if (!rm.promoted) {
        return batch;
    }
    const NodeId s = *rm.promoted;
    if (s == tree_.root()) {
        if (tree_.is_leaf(s)) {
            const MemberId last = *tree_.node(s).member;
            tree_.set_key(s, crypto::gen_key(rng_, config_.width, crypto::KeyOrigin::group));
            batch.changed_nodes.push_back(s);
            batch.add(to_individual(last, crypto::PayloadKind::node_key, s, tree_.key(s).bits));
        }
        return batch;
    }
    const auto changed = tree_.affected_path(s);
    renew(changed, batch);
    distribute(changed, kNoNode, batch);
    return batch;
}

void LkhScheme::initialize(std::span<const MemberId> ids) {
    tree_.build_in_order(ids);
    individual_keys_.clear();
    for (MemberId m : ids) {
        tree_.set_key(tree_.leaf_of(m), issue_individual_key(m));
    }
    for (NodeId n : tree_.subtree(tree_.root())) {
        if (!tree_.is_leaf(n)) {
            tree_.set_key(n, crypto::gen_key(rng_, config_.width));
        }
    }
    if (ids.size() == 1) {
        tree_.set_key(tree_.root(), crypto::gen_key(rng_, config_.width, crypto::KeyOrigin::group));
    }
}

MemberState LkhScheme::enroll(MemberId id) const {
    MemberState state(id, kind_, individual_key(id));
    state.relocate(layout_of(id));
    for (NodeId n : tree_.path(tree_.leaf_of(id))) {
        state.install_path_key(n, tree_.key(n));
    }
    return state;
}

// ---------------------------------------------------------------------------
// OFT

crypto::BlindedKey OftScheme::blinded_of(NodeId node) const {
    const auto& n = tree_.node(node);
    return n.blinded ? *n.blinded : crypto_.blind(n.key);
}

void OftScheme::recompute_up(NodeId from, RekeyBatch& batch, NodeId stop) {
    for (NodeId cur = tree_.node(from).parent; cur != kNoNode; cur = tree_.node(cur).parent) {
        const auto& n = tree_.node(cur);
        auto k = crypto_.mix(blinded_of(n.left), blinded_of(n.right));
        tree_.set_key(cur, std::move(k));
        batch.changed_nodes.push_back(cur);
        if (cur == stop) {
            break;
        }
    }
}

void OftScheme::refresh_subtree(NodeId root, const crypto::Nonce& r, RekeyBatch& batch) {
    for (NodeId id : tree_.subtree(root)) {
        if (id != root && tree_.is_leaf(id)) {
            continue;
        }
        auto b = blinded_of(id);
        auto& n = tree_.node(id);
        auto fresh = crypto_.refresh_key(n.key, r);
        auto fresh_b = crypto_.refresh_blinded(b, r);
        n.refresh = NodeRefresh{n.key, std::move(b), r};
        n.key = std::move(fresh);
        n.blinded = std::move(fresh_b);
        batch.changed_nodes.push_back(id);
    }
}

void OftScheme::rekey_sibling(NodeId node, RekeyBatch& batch) {
    if (tree_.is_leaf(node)) {
        tree_.set_key(node, crypto::gen_key(rng_, config_.width));
        batch.changed_nodes.push_back(node);
        batch.add(to_individual(*tree_.node(node).member, crypto::PayloadKind::node_key, node, tree_.key(node).bits));
        return;
    }
    const auto r = crypto::gen_nonce(rng_, config_.width);
    batch.add(to_node(Delivery::multicast, node, crypto::PayloadKind::nonce, node, r.bits));
    refresh_subtree(node, r, batch);
}

void OftScheme::publish_path(NodeId from, bool through_root_child, bool grouped, RekeyBatch& batch) {
    bool first = true;
    for (NodeId v = from; v != tree_.root(); v = tree_.node(v).parent) {
        if (!through_root_child && tree_.node(v).parent == tree_.root()) {
            break;
        }
        const NodeId sib = tree_.sibling(v);
        batch.add(to_node(Delivery::multicast, sib, crypto::PayloadKind::blinded_node_key, v,
                          blinded_of(v).bits),
                  grouped && !first);
        first = false;
    }
}

RekeyBatch OftScheme::join(MemberId id, std::optional<MemberId> beside) {
    if (tree_.contains(id)) {
        throw DuplicateMember("member " + std::to_string(id.value) + " is already in the group");
    }
    if (beside && !tree_.contains(*beside)) {
        throw UnknownMember("placement target " + std::to_string(beside->value) + " is not in the group");
    }
    RekeyBatch batch;
    batch.bootstrap = Bootstrap{id, issue_individual_key(id)};
    const auto ins = tree_.insert_leaf(id, beside);
    tree_.set_key(ins.leaf, crypto::gen_key(rng_, config_.width));
    batch.changed_nodes.push_back(ins.leaf);
    batch.add(to_individual(id, crypto::PayloadKind::node_key, ins.leaf, tree_.key(ins.leaf).bits));
    if (!ins.parent) {
        return batch;
    }
    rekey_sibling(*ins.split, batch);
    recompute_up(ins.leaf, batch);
    for (NodeId sib : tree_.path_report(id).copath) {
        batch.add(to_individual(id, crypto::PayloadKind::blinded_node_key, sib, blinded_of(sib).bits));
    }
    publish_path(ins.leaf, true, false, batch);
    return batch;
}

RekeyBatch OftScheme::classic_leave(MemberId id) {
    if (!tree_.contains(id)) {
        throw UnknownMember(missing(id));
    }
    const auto rm = tree_.remove_leaf(id);
    forget_individual_key(id);
    RekeyBatch batch;
    if (!rm.promoted) {
        return batch;
    }
    const NodeId s = *rm.promoted;
    rekey_sibling(s, batch);
    recompute_up(s, batch);
    publish_path(s, true, false, batch);
    return batch;
}

RekeyBatch OftScheme::leave(MemberId id) { return classic_leave(id); }

void OftScheme::initialize(std::span<const MemberId> ids) {
    tree_.build_in_order(ids);
    individual_keys_.clear();
    for (MemberId m : ids) {
        issue_individual_key(m);
        tree_.set_key(tree_.leaf_of(m), crypto::gen_key(rng_, config_.width));
    }
    auto order = tree_.subtree(tree_.root());
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (!tree_.is_leaf(*it)) {
            const auto& n = tree_.node(*it);
            tree_.set_key(*it, crypto_.mix(blinded_of(n.left), blinded_of(n.right)));
        }
    }
}

MemberState OftScheme::enroll(MemberId id) const {
    MemberState state(id, kind_, individual_key(id));
    state.relocate(layout_of(id));
    const auto report = tree_.path_report(id);
    for (NodeId n : report.path) {
        state.install_path_key(n, tree_.key(n));
        if (const auto& b = tree_.node(n).blinded) {
            state.install_path_blinded(n, *b);
        }
    }
    for (NodeId n : report.copath) {
        state.install_copath_blinded(n, tree_.blinded(n));
    }
    return state;
}

std::string OftScheme::check_invariants() const {
    std::ostringstream err;
    err << tree_.check_invariants();
    if (tree_.empty()) {
        return err.str();
    }
    for (NodeId id : tree_.subtree(tree_.root())) {
        const auto& n = tree_.node(id);
        bool sound = false;
        if (n.refresh) {
            sound = n.key == crypto::refresh_key(n.refresh->previous, n.refresh->nonce) && n.blinded &&
                    *n.blinded == crypto::refresh_blinded(n.refresh->previous_blinded, n.refresh->nonce);
        } else if (n.left == kNoNode) {
            sound = !n.blinded;
        } else {
            sound = !n.blinded && n.key == crypto::mix(tree_.blinded(n.left), tree_.blinded(n.right));
        }
        if (!sound) {
            err << "node " << id.value << " at " << to_string(tree_.location(id)) << " breaks the key derivation; ";
        }
    }
    return err.str();
}

} // namespace gkm
