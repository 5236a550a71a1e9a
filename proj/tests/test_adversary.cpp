#include <gtest/gtest.h>

#include "gkm/adversary.hpp"

using namespace gkm;

namespace {

crypto::Bytes bytes_of(std::uint8_t fill, std::size_t n = 16) { return crypto::Bytes(n, fill); }

} // namespace

TEST(Closure, SingleKeyAddsOnlyItsBlindedForm) {
    KnowledgeBase kb;
    const auto k = bytes_of(0x11);
    kb.add_initial({k}, "x");
    const auto out = closure(kb, {}, DerivationLog{});
    EXPECT_EQ(out.size(), 2u);
    EXPECT_TRUE(out.knows(crypto::blind_bytes(k)));
    EXPECT_FALSE(out.knows(crypto::blind_bytes(crypto::blind_bytes(k))));
}

TEST(Closure, MixesBlindedPairsFromUniverse) {
    const auto a = bytes_of(0xaa);
    const auto b = bytes_of(0x55);
    const auto ga = crypto::blind_bytes(a);
    const auto gb = crypto::blind_bytes(b);
    const auto c = crypto::mix_bytes(ga, gb);
    DerivationLog log;
    log.record_mix(ga, gb, c);

    KnowledgeBase only_a;
    only_a.add_initial({a}, "x");
    EXPECT_FALSE(closure(only_a, {}, log).knows(c));

    KnowledgeBase both;
    both.add_initial({a, b}, "x");
    const auto out = closure(both, {}, log);
    ASSERT_TRUE(out.knows(c));
    EXPECT_TRUE(out.replay(c, {}));
    EXPECT_GE(out.trace(c).size(), 3u);
}

TEST(Closure, XorCompletesKnownPairs) {
    const auto a = bytes_of(0x0f);
    const auto r = bytes_of(0x3c);
    const auto ar = crypto::xor_bytes(a, r);
    DerivationLog log;
    log.record_xor(a, r, ar);
    KnowledgeBase kb;
    kb.add_initial({a, ar}, "x");
    const auto out = closure(kb, {}, log);
    EXPECT_TRUE(out.knows(r));
    EXPECT_TRUE(out.replay(r, {}));
}

TEST(Closure, DecryptsWithKnownKeysOnly) {
    crypto::Rng rng(3);
    const auto k = bytes_of(0x21);
    const auto secret = bytes_of(0x77);
    RekeyMessage m;
    m.seq = 0;
    m.ciphertext = crypto::encrypt(k, crypto::Payload{{crypto::PayloadKind::node_key, 5}, secret}, rng);

    KnowledgeBase with;
    with.add_initial({k}, "x");
    const auto out = closure(with, {m}, DerivationLog{});
    ASSERT_TRUE(out.knows(secret));
    EXPECT_TRUE(out.replay(secret, {m}));

    KnowledgeBase without;
    without.add_initial({bytes_of(0x22)}, "x");
    EXPECT_FALSE(closure(without, {m}, DerivationLog{}).knows(secret));
}

TEST(Closure, Monotone) {
    const auto sc = run_scenario(SchemeKind::oft, horng_script());
    const auto small = closure(sc.pooled({{MemberId{3}, 0, 9}}), sc.run.transcript.messages, sc.log);
    const auto big = closure(sc.pooled({{MemberId{3}, 0, 9}, {MemberId{5}, 11}}), sc.run.transcript.messages, sc.log);
    for (std::size_t i = 0; i < small.size(); ++i) {
        EXPECT_TRUE(big.knows(small.atom(i)));
    }
}

TEST(Attacks, HorngBreaksOnlyPlainOft) {
    for (auto k : kAllSchemes) {
        const auto o = run_horng(k);
        EXPECT_EQ(o.success, k == SchemeKind::oft) << to_string(k) << "\n" << o.report();
        if (o.success) {
            EXPECT_TRUE(o.replayed);
            EXPECT_FALSE(o.trace.empty());
        }
    }
}

TEST(Attacks, KuChenBreaksOnlyPlainOft) {
    for (int which : {1, 2}) {
        for (auto k : kAllSchemes) {
            const auto o = run_kuchen(k, which);
            EXPECT_EQ(o.success, k == SchemeKind::oft) << to_string(k) << " case " << which << "\n" << o.report();
            if (o.success) {
                EXPECT_TRUE(o.replayed);
            }
        }
    }
}

TEST(Attacks, ScenarioScriptsHaveExpectedEpochs) {
    const auto sc = run_scenario(SchemeKind::lkh, horng_script());
    ASSERT_EQ(sc.run.transcript.epochs.size(), 12u);
    EXPECT_EQ(sc.run.transcript.epochs[10].event->member, MemberId{3});
    EXPECT_EQ(kuchen_script(1).events.size(), 13u);
    EXPECT_EQ(kuchen_script(2).events.size(), 13u);
}

TEST(Attacks, SecureOftLeaverAndSameHalfJoinerCollude) {
    // Member 6 leaves the right half; the joiner lands in the same half and
    // receives blinded keys the eviction left unrefreshed there.
    const auto script = EventScript::parse(
        "join 1\njoin 2\njoin 3\njoin 4\njoin 5\njoin 6\njoin 7\njoin 8\nleave 6\njoin 9 beside 7\n");
    for (auto k : {SchemeKind::oft, SchemeKind::oft_secure, SchemeKind::lkh, SchemeKind::lkh_bottomup}) {
        const auto sc = run_scenario(k, script);
        const auto o = sc.attack("same-half", {{MemberId{6}, 0, 8}, {MemberId{9}, 10}}, {9});
        const bool oft_family = is_oft_family(k);
        EXPECT_EQ(o.success, oft_family) << to_string(k) << "\n" << o.report();
        if (o.success) {
            EXPECT_TRUE(o.replayed);
        }
    }
}

TEST(Secrecy, SingleMembersNeverReachAbsentEpochs) {
    for (auto k : kAllSchemes) {
        const auto r = secrecy_sweep(k, {11}, 6, 16, false);
        EXPECT_TRUE(r.forward_holds()) << to_string(k);
        EXPECT_TRUE(r.backward_holds()) << to_string(k);
        EXPECT_GT(r.probes, 0u);
    }
}

TEST(Secrecy, OutsideCoalitionsBreakOftOnly) {
    for (auto k : {SchemeKind::simple, SchemeKind::lkh, SchemeKind::lkh_bottomup}) {
        EXPECT_TRUE(secrecy_sweep(k, {21}, 8, 20, true).independence_holds()) << to_string(k);
    }
    EXPECT_FALSE(secrecy_sweep(SchemeKind::oft, {21}, 8, 20, true).independence_holds());
}

TEST(Secrecy, ProbeReportsNameMember) {
    const auto sc = run_scenario(SchemeKind::oft, horng_script());
    const auto o = check_secrecy(sc, Probe::forward, MemberId{3});
    EXPECT_FALSE(o.success) << o.report();
    EXPECT_NE(o.report().find("RESISTED"), std::string::npos);
}
