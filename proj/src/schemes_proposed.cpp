#include "gkm/schemes_proposed.hpp"

namespace gkm {

RekeyBatch SecureOftScheme::leave(MemberId id) {
    last_plan_.reset();
    if (!tree_.contains(id)) {
        throw UnknownMember("member " + std::to_string(id.value) + " is not in the group");
    }
    const NodeId leaf = tree_.leaf_of(id);
    if (tree_.member_count() <= 2 || tree_.node(leaf).parent == tree_.root()) {
        auto batch = classic_leave(id);
        batch.notes.push_back("eviction left no unaffected subgroup; plain sibling rekey used");
        return batch;
    }

    const auto rm = tree_.remove_leaf(id);
    forget_individual_key(id);
    RekeyBatch batch;
    const NodeId s = *rm.promoted;
    const NodeId a = tree_.root_child_containing(s);
    const NodeId u = tree_.sibling(a);

    // (1) new key for the promoted sibling, then the affected half's path.
    rekey_sibling(s, batch);
    if (s != a) {
        recompute_up(s, batch, a);
    }
    // (2) blinded keys inside the affected half, as one transmission.
    publish_path(s, false, true, batch);
    // (3) new blinded key of the affected half, to the unaffected half.
    batch.add(to_node(Delivery::multicast, u, crypto::PayloadKind::blinded_node_key, a, blinded_of(a).bits));
    // (4) refresh the unaffected half.
    const auto r = crypto::gen_nonce(rng_, config_.width);
    batch.add(to_node(Delivery::multicast, u, crypto::PayloadKind::nonce, u, r.bits));
    refresh_subtree(u, r, batch);
    recompute_up(u, batch);
    // (5) its new blinded key, to the affected half.
    batch.add(to_node(Delivery::multicast, a, crypto::PayloadKind::blinded_node_key, u, blinded_of(u).bits));

    last_plan_ = EvictionPlan{a, u, s, r};
    return batch;
}

RekeyBatch BottomUpLkhScheme::join(MemberId id, std::optional<MemberId> beside) {
    RekeyBatch batch;
    const auto ins = place(id, beside, batch);
    if (!ins.parent) {
        tree_.set_key(ins.leaf, crypto::gen_key(rng_, config_.width, crypto::KeyOrigin::group));
        batch.changed_nodes.push_back(ins.leaf);
        batch.add(to_individual(id, crypto::PayloadKind::node_key, ins.leaf, tree_.key(ins.leaf).bits));
        return batch;
    }
    const auto changed = tree_.path(*ins.parent);
    renew(changed, batch);
    distribute(changed, unaffected_child(ins.leaf), batch);
    return batch;
}

RekeyBatch BottomUpLkhScheme::leave(MemberId id) {
    if (!tree_.contains(id)) {
        throw UnknownMember("member " + std::to_string(id.value) + " is not in the group");
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
            tree_.set_key(s, crypto::gen_key(rng_, config_.width, crypto::KeyOrigin::group));
            batch.changed_nodes.push_back(s);
            batch.add(to_individual(*tree_.node(s).member, crypto::PayloadKind::node_key, s, tree_.key(s).bits));
        }
        return batch;
    }
    const auto changed = tree_.affected_path(s);
    renew(changed, batch);
    distribute(changed, unaffected_child(s), batch);
    return batch;
}

} // namespace gkm
