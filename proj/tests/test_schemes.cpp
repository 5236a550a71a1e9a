#include <gtest/gtest.h>

#include <algorithm>

#include "gkm/schemes_proposed.hpp"
#include "gkm/sim.hpp"
#include "gkm/simple_scheme.hpp"
#include "support.hpp"

using namespace gkm;

namespace {

std::vector<MemberId> ids(std::uint32_t from, std::uint32_t to) {
    std::vector<MemberId> out;
    for (std::uint32_t i = from; i <= to; ++i) {
        out.push_back(MemberId{i});
    }
    return out;
}

std::size_t enc(const CostReport& r, const char* event) {
    for (const auto& row : r.rows) {
        if (row.event == event) {
            return row.encryptions;
        }
    }
    return 0;
}

} // namespace

TEST(Schemes, NamesRoundTrip) {
    for (auto k : kAllSchemes) {
        EXPECT_EQ(parse_scheme(to_string(k)), k);
        EXPECT_EQ(make_scheme(k)->kind(), k);
    }
    EXPECT_FALSE(parse_scheme("gkmp"));
}

TEST(Schemes, PerfectTreeEncryptionCounts) {
    for (int h = 2; h <= 8; ++h) {
        const auto uh = static_cast<std::size_t>(h);
        EXPECT_EQ(enc(measure_perfect(SchemeKind::lkh, h), "join"), 3 * uh);
        EXPECT_EQ(enc(measure_perfect(SchemeKind::lkh, h), "leave"), 2 * uh - 2);
        EXPECT_EQ(enc(measure_perfect(SchemeKind::lkh_bottomup, h), "join"), 2 * uh);
        EXPECT_EQ(enc(measure_perfect(SchemeKind::lkh_bottomup, h), "leave"), 2 * uh - 2);
        EXPECT_EQ(enc(measure_perfect(SchemeKind::oft, h), "join"), 2 * uh + 2);
        EXPECT_EQ(enc(measure_perfect(SchemeKind::oft, h), "leave"), uh);
        EXPECT_EQ(enc(measure_perfect(SchemeKind::oft_secure, h), "join"), 2 * uh + 2);
        EXPECT_EQ(enc(measure_perfect(SchemeKind::oft_secure, h), "leave"), uh + 2);
        EXPECT_EQ(enc(measure_perfect(SchemeKind::simple, h), "join"), std::size_t{1} << h);
    }
}

TEST(Schemes, LkhJoinDeliveryModes) {
    LkhScheme s({});
    s.initialize(ids(1, 7));
    const auto b = s.join(MemberId{8});
    EXPECT_EQ(b.encryptions(), 9u);
    EXPECT_EQ(b.count(Delivery::unicast), 5u);
    EXPECT_EQ(b.count(Delivery::multicast), 4u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(b.messages[i].key.kind, KeyRef::Kind::individual);
        EXPECT_EQ(b.messages[i].targets, std::vector<MemberId>{MemberId{8}});
    }
    ASSERT_TRUE(b.bootstrap);
    EXPECT_EQ(b.bootstrap->member, MemberId{8});
}

TEST(Schemes, BottomUpSendsRootKeyToUntouchedHalfFirst) {
    BottomUpLkhScheme s({});
    s.initialize(ids(1, 7));
    const auto b = s.join(MemberId{8});
    ASSERT_FALSE(b.messages.empty());
    const auto& first = b.messages.front();
    EXPECT_EQ(first.payload_node(), s.tree().root());
    EXPECT_EQ(first.targets, ids(1, 4));
    const auto l = s.leave(MemberId{8});
    EXPECT_EQ(l.messages.front().targets, ids(1, 4));
    EXPECT_EQ(l.encryptions(), 4u);
}

TEST(Schemes, FirstJoinIsOneUnicast) {
    for (auto k : kAllSchemes) {
        auto s = make_scheme(k);
        const auto b = s->join(MemberId{1});
        EXPECT_EQ(b.encryptions(), 1u) << to_string(k);
        EXPECT_EQ(b.count(Delivery::unicast), 1u) << to_string(k);
        EXPECT_TRUE(s->group_key());
    }
}

TEST(Schemes, MembershipErrors) {
    for (auto k : kAllSchemes) {
        auto s = make_scheme(k);
        s->join(MemberId{1});
        EXPECT_THROW(s->join(MemberId{1}), DuplicateMember) << to_string(k);
        EXPECT_THROW(s->leave(MemberId{2}), UnknownMember) << to_string(k);
        EXPECT_THROW(s->join(MemberId{3}, MemberId{9}), UnknownMember) << to_string(k);
    }
}

TEST(Schemes, LastLeaveEmptiesGroup) {
    for (auto k : kAllSchemes) {
        auto s = make_scheme(k);
        s->join(MemberId{1});
        s->join(MemberId{2});
        s->leave(MemberId{1});
        EXPECT_EQ(s->member_count(), 1u);
        const auto b = s->leave(MemberId{2});
        EXPECT_EQ(b.encryptions(), 0u);
        EXPECT_EQ(s->member_count(), 0u);
        EXPECT_FALSE(s->group_key());
    }
}

TEST(Schemes, SecureEvictionPlanAndTransmissions) {
    for (int h = 2; h <= 8; ++h) {
        SecureOftScheme s({});
        const std::uint32_t n = 1u << h;
        s.initialize(ids(1, n));
        const auto b = s.leave(MemberId{n});
        ASSERT_TRUE(s.last_plan()) << h;
        const auto& plan = *s.last_plan();
        EXPECT_EQ(plan.affected, s.tree().node(s.tree().root()).right);
        EXPECT_EQ(plan.unaffected, s.tree().node(s.tree().root()).left);
        EXPECT_EQ(b.transmissions(), h == 2 ? 4u : 5u) << h;
        EXPECT_EQ(b.encryptions(), static_cast<std::size_t>(h) + 2) << h;
        EXPECT_EQ(s.check_invariants(), "");
    }
}

TEST(Schemes, SecureEvictionFallsBackWithoutTwoHalves) {
    SecureOftScheme s({});
    s.initialize(ids(1, 2));
    const auto b = s.leave(MemberId{2});
    EXPECT_FALSE(s.last_plan());
    EXPECT_EQ(b.notes.size(), 1u);
}

TEST(Schemes, EvictedSiblingAndUnaffectedHalfLoseEveryBlindedKey) {
    SecureOftScheme s({});
    s.initialize(ids(1, 8));
    const auto u8 = s.enroll(MemberId{8});
    const auto before = u8.blinded_view();
    s.leave(MemberId{8});
    // Sibling (0,7) and the unaffected half's nodes no longer match.
    const auto& t = s.tree();
    for (NodeId n : t.subtree(s.last_plan()->unaffected)) {
        if (t.is_leaf(n)) {
            continue;
        }
        for (const auto& [loc, b] : before) {
            EXPECT_NE(t.blinded(n), b) << to_string(loc);
        }
    }
    EXPECT_NE(t.blinded(s.last_plan()->sibling), before.at(LocationIndex{0, 7}));
}

TEST(Schemes, OftJoinRefreshesInternalSibling) {
    OftScheme s({});
    s.initialize(ids(1, 4));
    const auto b = s.join(MemberId{5}); // splits the root
    EXPECT_EQ(std::count_if(b.messages.begin(), b.messages.end(),
                            [](const RekeyMessage& m) { return m.payload_kind() == crypto::PayloadKind::nonce; }),
              1);
    EXPECT_EQ(s.check_invariants(), "");
}

TEST(Schemes, EnrollMatchesServerKeys) {
    for (auto k : kAllSchemes) {
        auto s = make_scheme(k);
        s->initialize(ids(1, 11));
        for (auto m : ids(1, 11)) {
            EXPECT_EQ(s->enroll(m).group_key(), s->group_key()) << to_string(k);
        }
    }
}

TEST(Schemes, ConsistentAcrossKeyWidths) {
    for (std::size_t bits : {64u, 192u, 256u}) {
        for (auto k : kAllSchemes) {
            auto s = make_scheme(k, SchemeConfig{crypto::KeyWidth{bits}, 9});
            EXPECT_NO_THROW(run_script(*s, random_script(3, 120, bits))) << to_string(k) << " " << bits;
            EXPECT_EQ(s->group_key()->bits.size(), bits / 8);
        }
    }
}

TEST(Schemes, SimpleCosts) {
    SimpleScheme s({});
    s.initialize(ids(1, 5));
    const auto j = s.join(MemberId{6});
    EXPECT_EQ(j.count(Delivery::multicast), 5u);
    EXPECT_EQ(j.count(Delivery::unicast), 1u);
    const auto l = s.leave(MemberId{1});
    EXPECT_EQ(l.encryptions(), 5u);
}

TEST(Schemes, RemainingMemberBlindedValuesAfterEviction) {
    for (std::uint64_t seed : {1u, 7u, 99u}) {
        EXPECT_EQ(test_support::check_first_member_after_eviction(seed), "") << seed;
    }
}
