#pragma once

#include <sstream>
#include <string>

#include "gkm/schemes_proposed.hpp"

namespace gkm::test_support {

inline std::vector<MemberId> member_range(std::uint32_t from, std::uint32_t to) {
    std::vector<MemberId> out;
    for (std::uint32_t i = from; i <= to; ++i) {
        out.push_back(MemberId{i});
    }
    return out;
}

/// Eight members, member 8 evicted under the secure OFT scheme. Checks every
/// blinded value member 1 holds against an independent recomputation.
/// Returns an empty string when all match.
inline std::string check_first_member_after_eviction(std::uint64_t seed = 7) {
    SecureOftScheme s(SchemeConfig{crypto::KeyWidth{128}, seed});
    s.initialize(member_range(1, 8));
    MemberState u1 = s.enroll(MemberId{1});
    const auto before = u1.blinded_view();
    const auto leaf_before = u1.path_key(s.tree().leaf_of(MemberId{1}));

    const RekeyBatch batch = s.leave(MemberId{8});
    u1.relocate(s.layout_of(MemberId{1}));
    for (const auto& m : batch.messages) {
        for (MemberId t : m.targets) {
            if (t == MemberId{1}) {
                u1.apply(m);
            }
        }
    }

    std::ostringstream err;
    if (!s.last_plan()) {
        return "no eviction plan recorded";
    }
    const auto& r = s.last_plan()->nonce;
    const KeyTree& t = s.tree();
    const NodeId right = t.node(t.root()).right;
    const NodeId n56 = t.node(right).left;
    const NodeId n7 = t.node(right).right;
    const auto k57 = crypto::mix(crypto::blind(t.key(n56)), crypto::blind(t.key(n7)));

    const std::map<LocationIndex, crypto::BlindedKey> expected{
        {{0, 2}, before.at({0, 2})},
        {{1, 1}, crypto::refresh_blinded(before.at({1, 1}), r)},
        {{1, 2}, crypto::refresh_blinded(before.at({1, 2}), r)},
        {{2, 1}, crypto::refresh_blinded(before.at({2, 1}), r)},
        {{2, 2}, crypto::blind(k57)},
    };
    auto after = u1.blinded_view();
    after.erase(t.location(t.root())); // the group key's own blinded form is never stored
    for (const auto& [loc, want] : expected) {
        auto it = after.find(loc);
        if (it == after.end()) {
            err << to_string(loc) << " missing; ";
        } else if (it->second != want) {
            err << to_string(loc) << " differs; ";
        }
    }
    if (after.size() != expected.size()) {
        err << "holds " << after.size() << " blinded values, expected " << expected.size() << "; ";
    }
    if (u1.path_key(t.leaf_of(MemberId{1})) != leaf_before) {
        err << "leaf key changed; ";
    }
    const auto group = crypto::mix(expected.at({2, 1}), expected.at({2, 2}));
    if (u1.group_key() != group || s.group_key() != group) {
        err << "group key differs; ";
    }
    return err.str();
}

} // namespace gkm::test_support
