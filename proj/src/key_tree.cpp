#include "gkm/key_tree.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace gkm {

std::string to_string(const LocationIndex& loc) {
    return "(" + std::to_string(loc.level) + "," + std::to_string(loc.position) + ")";
}

KeyTree::KeyTree() : nodes_(1) { nodes_[0].alive = false; }

NodeId KeyTree::new_node() {
    NodeId id{nodes_.size()};
    nodes_.push_back(Node{});
    nodes_.back().id = id;
    return id;
}

const KeyTree::Node& KeyTree::node(NodeId id) const {
    if (id.value == 0 || id.value >= nodes_.size()) {
        throw Error("KeyTree: no node " + std::to_string(id.value));
    }
    return nodes_[id.value];
}

KeyTree::Node& KeyTree::node(NodeId id) {
    return const_cast<Node&>(std::as_const(*this).node(id));
}

bool KeyTree::is_leaf(NodeId id) const { return node(id).left == kNoNode; }

bool KeyTree::is_alive(NodeId id) const { return id.value != 0 && id.value < nodes_.size() && nodes_[id.value].alive; }

NodeId KeyTree::leaf_of(MemberId m) const {
    auto it = leaves_.find(m.value);
    if (it == leaves_.end()) {
        throw UnknownMember("member " + std::to_string(m.value) + " is not in the tree");
    }
    return it->second;
}

std::vector<MemberId> KeyTree::members() const {
    if (empty()) {
        return {};
    }
    return members_under(root_);
}

NodeId KeyTree::sibling(NodeId id) const {
    const Node& n = node(id);
    if (n.parent == kNoNode) {
        return kNoNode;
    }
    const Node& p = node(n.parent);
    return p.left == id ? p.right : p.left;
}

int KeyTree::depth(NodeId id) const {
    int d = 0;
    for (NodeId cur = node(id).parent; cur != kNoNode; cur = node(cur).parent) {
        ++d;
    }
    return d;
}

int KeyTree::height() const {
    if (empty()) {
        return 0;
    }
    if (!height_cache_) {
        int h = 0;
        std::vector<std::pair<NodeId, int>> stack{{root_, 0}};
        while (!stack.empty()) {
            auto [id, d] = stack.back();
            stack.pop_back();
            const Node& n = node(id);
            if (n.left == kNoNode) {
                h = std::max(h, d);
            } else {
                stack.push_back({n.left, d + 1});
                stack.push_back({n.right, d + 1});
            }
        }
        height_cache_ = h;
    }
    return *height_cache_;
}

LocationIndex KeyTree::location(NodeId id) const {
    std::uint64_t bits = 0;
    int d = 0;
    for (NodeId cur = id; node(cur).parent != kNoNode; cur = node(cur).parent) {
        if (node(node(cur).parent).right == cur) {
            bits |= std::uint64_t{1} << d;
        }
        ++d;
    }
    return LocationIndex{height() - d, bits + 1};
}

void KeyTree::set_key(NodeId id, crypto::Key k) {
    Node& n = node(id);
    n.key = std::move(k);
    n.blinded.reset();
    n.refresh.reset();
}

crypto::BlindedKey KeyTree::blinded(NodeId id) const {
    const Node& n = node(id);
    return n.blinded ? *n.blinded : crypto::blind(n.key);
}

void KeyTree::replace_child(NodeId parent, NodeId old_child, NodeId new_child) {
    if (parent == kNoNode) {
        root_ = new_child;
    } else {
        Node& p = node(parent);
        (p.left == old_child ? p.left : p.right) = new_child;
    }
    node(new_child).parent = parent;
}

NodeId KeyTree::choose_split() const {
    // Shape of every subtree: height and whether it is perfect.
    struct Shape {
        int height = 0;
        bool perfect = true;
    };
    std::vector<Shape> shape(nodes_.size());
    std::vector<NodeId> order = subtree(root_);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const Node& n = node(*it);
        if (n.left != kNoNode) {
            const Shape& l = shape[n.left.value];
            const Shape& r = shape[n.right.value];
            shape[it->value] = {std::max(l.height, r.height) + 1, l.perfect && r.perfect && l.height == r.height};
        }
    }

    // Splitting a perfect subtree X at depth d pushes its deepest leaf to
    // d + 1 + height(X). Minimize that, then prefer shallow, then leftmost.
    NodeId best = kNoNode;
    std::pair<int, int> best_score{0, 0};
    std::vector<std::pair<NodeId, int>> stack{{root_, 0}};
    while (!stack.empty()) {
        auto [id, d] = stack.back();
        stack.pop_back();
        const Shape& s = shape[id.value];
        if (s.perfect) {
            std::pair<int, int> score{d + 1 + s.height, d};
            if (best == kNoNode || score < best_score) {
                best = id;
                best_score = score;
            }
            continue;
        }
        const Node& n = node(id);
        stack.push_back({n.right, d + 1});
        stack.push_back({n.left, d + 1});
    }
    return best;
}

InsertResult KeyTree::insert_leaf(MemberId m, std::optional<MemberId> beside) {
    if (contains(m)) {
        throw DuplicateMember("member " + std::to_string(m.value) + " is already in the tree");
    }
    height_cache_.reset();
    if (empty()) {
        if (beside) {
            throw UnknownMember("placement target " + std::to_string(beside->value) + " is not in the tree");
        }
        NodeId leaf = new_node();
        node(leaf).member = m;
        root_ = leaf;
        leaves_[m.value] = leaf;
        return {leaf, std::nullopt, std::nullopt};
    }

    const NodeId split = beside ? leaf_of(*beside) : choose_split();
    const NodeId leaf = new_node();
    const NodeId parent = new_node();
    node(leaf).member = m;
    const NodeId grand = node(split).parent;
    replace_child(grand, split, parent);
    node(parent).left = split;
    node(parent).right = leaf;
    node(split).parent = parent;
    node(leaf).parent = parent;
    leaves_[m.value] = leaf;
    return {leaf, parent, split};
}

RemoveResult KeyTree::remove_leaf(MemberId m) {
    const NodeId leaf = leaf_of(m);
    RemoveResult result{leaf, std::nullopt, std::nullopt, path_report(m)};
    height_cache_.reset();
    leaves_.erase(m.value);
    node(leaf).alive = false;

    const NodeId parent = node(leaf).parent;
    if (parent == kNoNode) {
        root_ = kNoNode;
        return result;
    }
    const NodeId sib = sibling(leaf);
    replace_child(node(parent).parent, parent, sib);
    node(parent).alive = false;
    result.removed_parent = parent;
    result.promoted = sib;
    return result;
}

NodeId KeyTree::build_range(std::span<const MemberId> ids) {
    if (ids.size() == 1) {
        NodeId leaf = new_node();
        node(leaf).member = ids[0];
        leaves_[ids[0].value] = leaf;
        return leaf;
    }
    std::size_t capacity = 1;
    while (capacity < ids.size()) {
        capacity <<= 1;
    }
    const std::size_t left_count = std::min(ids.size(), capacity / 2);
    const NodeId id = new_node();
    const NodeId l = build_range(ids.first(left_count));
    const NodeId r = build_range(ids.subspan(left_count));
    node(id).left = l;
    node(id).right = r;
    node(l).parent = id;
    node(r).parent = id;
    return id;
}

void KeyTree::build_in_order(std::span<const MemberId> ids) {
    for (auto& n : nodes_) {
        n.alive = false;
    }
    leaves_.clear();
    height_cache_.reset();
    root_ = kNoNode;
    std::set<std::uint32_t> unique;
    for (auto m : ids) {
        if (!unique.insert(m.value).second) {
            throw DuplicateMember("member " + std::to_string(m.value) + " listed twice");
        }
    }
    if (!ids.empty()) {
        root_ = build_range(ids);
    }
}

std::vector<NodeId> KeyTree::path(NodeId from) const {
    std::vector<NodeId> p;
    for (NodeId cur = from; cur != kNoNode; cur = node(cur).parent) {
        p.push_back(cur);
    }
    return p;
}

PathReport KeyTree::path_report(MemberId m) const {
    PathReport r;
    r.path = path(leaf_of(m));
    for (std::size_t i = 0; i + 1 < r.path.size(); ++i) {
        r.copath.push_back(sibling(r.path[i]));
    }
    return r;
}

std::vector<std::pair<LocationIndex, NodeId>> KeyTree::copath(MemberId m) const {
    std::vector<std::pair<LocationIndex, NodeId>> out;
    for (NodeId id : path_report(m).copath) {
        out.emplace_back(location(id), id);
    }
    return out;
}

std::vector<NodeId> KeyTree::affected_path(NodeId id) const {
    if (node(id).parent == kNoNode) {
        return {id};
    }
    auto p = path(id);
    p.erase(p.begin());
    return p;
}

std::vector<NodeId> KeyTree::subtree(NodeId id) const {
    std::vector<NodeId> out;
    if (id == kNoNode) {
        return out;
    }
    std::vector<NodeId> stack{id};
    while (!stack.empty()) {
        NodeId cur = stack.back();
        stack.pop_back();
        out.push_back(cur);
        const Node& n = node(cur);
        if (n.left != kNoNode) {
            stack.push_back(n.right);
            stack.push_back(n.left);
        }
    }
    return out;
}

std::vector<MemberId> KeyTree::members_under(NodeId id) const {
    std::vector<MemberId> out;
    for (NodeId n : subtree(id)) {
        if (const auto& m = node(n).member) {
            out.push_back(*m);
        }
    }
    return out;
}

NodeId KeyTree::root_child_containing(NodeId id) const {
    if (id == root_) {
        return id;
    }
    NodeId cur = id;
    while (node(cur).parent != root_) {
        cur = node(cur).parent;
    }
    return cur;
}

std::string KeyTree::dump() const {
    struct Row {
        LocationIndex loc;
        NodeId id;
    };
    std::vector<Row> rows;
    for (NodeId id : subtree(root_)) {
        rows.push_back({location(id), id});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.loc.level != b.loc.level) {
            return a.loc.level > b.loc.level;
        }
        return a.loc.position < b.loc.position;
    });
    std::ostringstream out;
    for (const Row& r : rows) {
        const Node& n = node(r.id);
        out << r.loc.level << ',' << r.loc.position << ',' << r.id.value << ',' << (n.left == kNoNode ? "leaf" : "internal");
        if (n.member) {
            out << ',' << n.member->value;
        }
        out << '\n';
    }
    return out.str();
}

std::string KeyTree::check_invariants() const {
    std::ostringstream err;
    if (empty()) {
        if (!leaves_.empty()) {
            err << "empty tree still maps " << leaves_.size() << " members; ";
        }
        return err.str();
    }
    if (node(root_).parent != kNoNode) {
        err << "root has a parent; ";
    }
    std::size_t leaf_count = 0;
    std::set<LocationIndex> seen;
    for (NodeId id : subtree(root_)) {
        const Node& n = node(id);
        if (!n.alive) {
            err << "dead node " << id.value << " reachable; ";
        }
        if ((n.left == kNoNode) != (n.right == kNoNode)) {
            err << "node " << id.value << " has exactly one child; ";
        }
        if (n.left != kNoNode) {
            if (node(n.left).parent != id || node(n.right).parent != id) {
                err << "broken parent link under " << id.value << "; ";
            }
            if (n.member) {
                err << "internal node " << id.value << " carries a member; ";
            }
        } else {
            ++leaf_count;
            if (!n.member) {
                err << "leaf " << id.value << " has no member; ";
            } else {
                auto it = leaves_.find(n.member->value);
                if (it == leaves_.end() || it->second != id) {
                    err << "member map disagrees for leaf " << id.value << "; ";
                }
            }
        }
        if (!seen.insert(location(id)).second) {
            err << "duplicate location " << to_string(location(id)) << "; ";
        }
    }
    if (leaf_count != leaves_.size()) {
        err << "leaf count " << leaf_count << " != member count " << leaves_.size() << "; ";
    }
    return err.str();
}

} // namespace gkm
