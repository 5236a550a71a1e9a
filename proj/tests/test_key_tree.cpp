#include <gtest/gtest.h>

#include <vector>

#include "gkm/key_tree.hpp"

using namespace gkm;

namespace {

std::vector<MemberId> ids(std::uint32_t from, std::uint32_t to) {
    std::vector<MemberId> out;
    for (std::uint32_t i = from; i <= to; ++i) {
        out.push_back(MemberId{i});
    }
    return out;
}

KeyTree grown(std::uint32_t n) {
    KeyTree t;
    for (auto m : ids(1, n)) {
        t.insert_leaf(m);
    }
    return t;
}

LocationIndex where(const KeyTree& t, std::uint32_t m) { return t.location(t.leaf_of(MemberId{m})); }

} // namespace

TEST(KeyTree, EmptyTree) {
    KeyTree t;
    EXPECT_TRUE(t.empty());
    EXPECT_EQ(t.height(), 0);
    EXPECT_EQ(t.check_invariants(), "");
    EXPECT_THROW(t.leaf_of(MemberId{1}), UnknownMember);
}

TEST(KeyTree, InOrderJoinsFillAPerfectTree) {
    const KeyTree t = grown(8);
    EXPECT_EQ(t.height(), 3);
    for (std::uint32_t m = 1; m <= 8; ++m) {
        EXPECT_EQ(where(t, m), (LocationIndex{0, m})) << "member " << m;
    }
    EXPECT_EQ(t.location(t.root()), (LocationIndex{3, 1}));
    EXPECT_EQ(t.members(), ids(1, 8));
    EXPECT_EQ(t.check_invariants(), "");
}

TEST(KeyTree, EighthMemberBecomesSeventhsSibling) {
    KeyTree t = grown(7);
    const auto ins = t.insert_leaf(MemberId{8});
    ASSERT_TRUE(ins.split);
    EXPECT_EQ(*ins.split, t.leaf_of(MemberId{7}));
    EXPECT_EQ(t.sibling(ins.leaf), t.leaf_of(MemberId{7}));
}

TEST(KeyTree, JoiningAPerfectTreeSplitsTheRoot) {
    KeyTree t = grown(4);
    const NodeId old_root = t.root();
    const auto ins = t.insert_leaf(MemberId{5});
    EXPECT_EQ(*ins.split, old_root);
    EXPECT_EQ(t.depth(ins.leaf), 1);
}

TEST(KeyTree, BulkBuildMatchesSequentialJoins) {
    for (std::uint32_t n = 1; n <= 40; ++n) {
        const KeyTree seq = grown(n);
        KeyTree bulk;
        const auto all = ids(1, n);
        bulk.build_in_order(all);
        ASSERT_EQ(bulk.height(), seq.height()) << n;
        for (std::uint32_t m = 1; m <= n; ++m) {
            ASSERT_EQ(where(bulk, m), where(seq, m)) << "n=" << n << " member " << m;
        }
        ASSERT_EQ(bulk.check_invariants(), "");
    }
}

TEST(KeyTree, HeightStaysLogarithmic) {
    const KeyTree t = grown(1000);
    EXPECT_EQ(t.height(), 10);
}

TEST(KeyTree, RemovePromotesSibling) {
    KeyTree t = grown(8);
    const NodeId seven = t.leaf_of(MemberId{7});
    const auto rm = t.remove_leaf(MemberId{8});
    ASSERT_TRUE(rm.promoted);
    EXPECT_EQ(*rm.promoted, seven);
    EXPECT_EQ(t.location(seven), (LocationIndex{1, 4}));
    EXPECT_FALSE(t.is_alive(*rm.removed_parent));
    EXPECT_EQ(rm.former_path.path.size(), 4u);
    EXPECT_EQ(t.check_invariants(), "");
    EXPECT_EQ(t.affected_path(seven).size(), 2u);
}

TEST(KeyTree, RemoveLastMemberEmptiesTree) {
    KeyTree t = grown(1);
    const auto rm = t.remove_leaf(MemberId{1});
    EXPECT_FALSE(rm.promoted);
    EXPECT_TRUE(t.empty());
    EXPECT_EQ(t.check_invariants(), "");
}

TEST(KeyTree, PlacementHint) {
    KeyTree t = grown(8);
    t.remove_leaf(MemberId{5});
    const auto ins = t.insert_leaf(MemberId{9}, MemberId{6});
    EXPECT_EQ(t.sibling(ins.leaf), t.leaf_of(MemberId{6}));
    EXPECT_THROW(t.insert_leaf(MemberId{10}, MemberId{5}), UnknownMember);
    EXPECT_THROW(t.insert_leaf(MemberId{9}), DuplicateMember);
}

TEST(KeyTree, CopathAndPath) {
    const KeyTree t = grown(8);
    const auto cp = t.copath(MemberId{1});
    ASSERT_EQ(cp.size(), 3u);
    EXPECT_EQ(cp[0].first, (LocationIndex{0, 2}));
    EXPECT_EQ(cp[1].first, (LocationIndex{1, 2}));
    EXPECT_EQ(cp[2].first, (LocationIndex{2, 2}));
    const auto report = t.path_report(MemberId{1});
    EXPECT_EQ(report.path.back(), t.root());
    EXPECT_EQ(t.root_child_containing(report.path[0]), report.path[2]);
}

TEST(KeyTree, DumpListsRootFirst) {
    const KeyTree t = grown(2);
    const std::string d = t.dump();
    EXPECT_EQ(d.substr(0, 4), "1,1,");
    EXPECT_NE(d.find("0,1,"), std::string::npos);
    EXPECT_NE(d.find(",leaf,2\n"), std::string::npos);
}

TEST(KeyTree, BuildRejectsDuplicates) {
    KeyTree t;
    const std::vector<MemberId> dup{MemberId{1}, MemberId{1}};
    EXPECT_THROW(t.build_in_order(dup), DuplicateMember);
}
