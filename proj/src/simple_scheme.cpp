#include "gkm/simple_scheme.hpp"

#include <algorithm>

namespace gkm {

bool SimpleScheme::contains(MemberId id) const {
    return std::find(members_.begin(), members_.end(), id) != members_.end();
}

MemberLayout SimpleScheme::layout_of(MemberId id) const {
    if (!contains(id)) {
        throw UnknownMember("member " + std::to_string(id.value) + " is not in the group");
    }
    MemberLayout layout;
    layout.path.push_back({kGroupNode, LocationIndex{0, 1}, false});
    return layout;
}

RekeyMessage SimpleScheme::send_group_key(MemberId to, Delivery delivery) {
    KeyRef ref;
    ref.kind = KeyRef::Kind::individual;
    ref.member = to;
    return seal(delivery, ref, individual_key(to), crypto::PayloadKind::node_key, kGroupNode, LocationIndex{0, 1},
                group_key_->bits, {to});
}

RekeyBatch SimpleScheme::join(MemberId id, std::optional<MemberId> beside) {
    if (contains(id)) {
        throw DuplicateMember("member " + std::to_string(id.value) + " is already in the group");
    }
    if (beside && !contains(*beside)) {
        throw UnknownMember("placement target " + std::to_string(beside->value) + " is not in the group");
    }
    RekeyBatch batch;
    batch.bootstrap = Bootstrap{id, issue_individual_key(id)};
    group_key_ = crypto::gen_key(rng_, config_.width, crypto::KeyOrigin::group);
    for (MemberId m : members_) {
        batch.add(send_group_key(m, Delivery::multicast));
    }
    members_.push_back(id);
    batch.add(send_group_key(id, Delivery::unicast));
    batch.changed_nodes.push_back(kGroupNode);
    return batch;
}

RekeyBatch SimpleScheme::leave(MemberId id) {
    auto it = std::find(members_.begin(), members_.end(), id);
    if (it == members_.end()) {
        throw UnknownMember("member " + std::to_string(id.value) + " is not in the group");
    }
    members_.erase(it);
    forget_individual_key(id);
    RekeyBatch batch;
    if (members_.empty()) {
        group_key_.reset();
        return batch;
    }
    group_key_ = crypto::gen_key(rng_, config_.width, crypto::KeyOrigin::group);
    for (MemberId m : members_) {
        batch.add(send_group_key(m, Delivery::multicast));
    }
    batch.changed_nodes.push_back(kGroupNode);
    return batch;
}

void SimpleScheme::initialize(std::span<const MemberId> ids) {
    members_.assign(ids.begin(), ids.end());
    individual_keys_.clear();
    for (MemberId m : members_) {
        issue_individual_key(m);
    }
    group_key_.reset();
    if (!members_.empty()) {
        group_key_ = crypto::gen_key(rng_, config_.width, crypto::KeyOrigin::group);
    }
}

MemberState SimpleScheme::enroll(MemberId id) const {
    MemberState state(id, kind_, individual_key(id));
    state.relocate(layout_of(id));
    state.install_path_key(kGroupNode, *group_key_);
    return state;
}

} // namespace gkm
