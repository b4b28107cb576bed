#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <treelike/rational.hpp>
#include <treelike/structure.hpp>

namespace treelike {

// One element of the leveled C-structure: a finite-support word over the
// rationals. Letters are positive integers; the distinguished letter e is 0
// and is never stored.
class LeveledPoint {
public:
    LeveledPoint() = default;
    explicit LeveledPoint(const std::map<Rat, int>& word) {
        for (const auto& [pos, letter] : word) {
            if (letter < 0) throw std::invalid_argument("letters are nonnegative integers");
            if (letter != 0) word_.emplace(pos, letter);
        }
    }

    int at(const Rat& pos) const {
        auto it = word_.find(pos);
        return it == word_.end() ? 0 : it->second;
    }

    const std::map<Rat, int>& word() const { return word_; }
    bool empty() const { return word_.empty(); }

    bool operator==(const LeveledPoint& o) const { return word_ == o.word_; }
    bool operator!=(const LeveledPoint& o) const { return word_ != o.word_; }
    bool operator<(const LeveledPoint& o) const { return word_ < o.word_; }

private:
    std::map<Rat, int> word_;
};

// a ∧ b: least position where the words disagree.
inline Rat meet_level(const LeveledPoint& a, const LeveledPoint& b) {
    auto ia = a.word().begin(), ea = a.word().end();
    auto ib = b.word().begin(), eb = b.word().end();
    while (ia != ea || ib != eb) {
        if (ib == eb || (ia != ea && ia->first < ib->first)) {
            if (b.at(ia->first) != ia->second) return ia->first;
            ++ia;
        } else if (ia == ea || ib->first < ia->first) {
            if (a.at(ib->first) != ib->second) return ib->first;
            ++ib;
        } else {  // same position
            if (ia->second != ib->second) return ia->first;
            ++ia;
            ++ib;
        }
    }
    throw std::invalid_argument("meet undefined for equal points");
}

// C(a;b,c): either b=c and a!=b, or all distinct and a∧b < b∧c.
inline bool atom_C(const LeveledPoint& a, const LeveledPoint& b, const LeveledPoint& c) {
    if (b == c) return a != b;
    if (a == b || a == c) return false;
    return meet_level(a, b) < meet_level(b, c);
}

// V(a,b;c,d): a!=b, c!=d, and a∧b <= c∧d.
inline bool atom_V(const LeveledPoint& a, const LeveledPoint& b, const LeveledPoint& c,
                   const LeveledPoint& d) {
    if (a == b || c == d) return false;
    return meet_level(a, b) <= meet_level(c, d);
}

// Quantifier-free diagram of a point list as a finite structure over {C:3, V:4}.
inline FinStructure qf_structure(const std::vector<LeveledPoint>& points,
                                 const std::vector<std::string>& names = {}) {
    const int n = static_cast<int>(points.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (points[i] == points[j]) throw std::invalid_argument("duplicate points");
    std::vector<std::string> universe;
    if (!names.empty()) {
        if (static_cast<int>(names.size()) != n)
            throw std::invalid_argument("name count mismatch");
        universe = names;
    } else {
        for (int i = 0; i < n; ++i) universe.push_back("p" + std::to_string(i));
    }
    FinStructure out(Signature{{"C", 3}, {"V", 4}}, universe);

    std::vector<std::vector<std::optional<Rat>>> meet(n, std::vector<std::optional<Rat>>(n));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) meet[i][j] = meet[j][i] = meet_level(points[i], points[j]);

    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                bool holds = b == c ? a != b
                                    : (a != b && a != c && *meet[a][b] < *meet[b][c]);
                if (holds) out.add_tuple("C", {a, b, c});
            }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    if (c == d) continue;
                    if (*meet[a][b] <= *meet[c][d]) out.add_tuple("V", {a, b, c, d});
                }
        }
    return out;
}

// dom -> img (positionally) preserves all C and V atoms in both directions.
inline bool is_partial_isomorphism(const std::vector<LeveledPoint>& dom,
                                   const std::vector<LeveledPoint>& img) {
    if (dom.size() != img.size()) return false;
    const int n = static_cast<int>(dom.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (dom[i] == dom[j] || img[i] == img[j]) return false;
    if (n < 2) return true;
    return qf_structure(dom) == qf_structure(img);
}

// The isomorphism type of a finite subset: a rooted tree with labeled leaves
// and a total preorder (dense rank classes) on the internal nodes, strictly
// increasing along root-to-leaf paths.
struct LevelTree {
    struct Node {
        int rank = -1;               // internal nodes only
        int leaf = -1;               // leaf label, >= 0 on leaves
        std::vector<Node> children;  // empty exactly on leaves
        bool is_leaf() const { return children.empty(); }
    };
    Node root;
    int leaf_count = 0;
};

namespace detail {

inline void level_tree_check(const LevelTree::Node& node, int parent_rank,
                             std::set<int>& ranks, std::vector<int>& leaves) {
    if (node.is_leaf()) {
        if (node.leaf < 0) throw std::invalid_argument("invalid tree: unlabeled leaf");
        leaves.push_back(node.leaf);
        return;
    }
    if (node.children.size() < 2)
        throw std::invalid_argument("invalid tree: internal node with < 2 children");
    if (node.rank <= parent_rank)
        throw std::invalid_argument("invalid tree: rank not increasing");
    ranks.insert(node.rank);
    for (const auto& child : node.children) level_tree_check(child, node.rank, ranks, leaves);
}

inline std::string ranked_code(const LevelTree::Node& node, bool with_labels) {
    if (node.is_leaf())
        return with_labels ? "L" + std::to_string(node.leaf) : "L";
    std::vector<std::string> parts;
    for (const auto& child : node.children) parts.push_back(ranked_code(child, with_labels));
    std::sort(parts.begin(), parts.end());
    std::string out = "(" + std::to_string(node.rank) + ":";
    for (const auto& p : parts) out += p + ",";
    return out + ")";
}

}  // namespace detail

inline void validate_level_tree(const LevelTree& tree) {
    std::set<int> ranks;
    std::vector<int> leaves;
    detail::level_tree_check(tree.root, -1, ranks, leaves);
    if (static_cast<int>(leaves.size()) != tree.leaf_count)
        throw std::invalid_argument("invalid tree: leaf count mismatch");
    std::sort(leaves.begin(), leaves.end());
    for (int i = 0; i < tree.leaf_count; ++i)
        if (leaves[i] != i) throw std::invalid_argument("invalid tree: leaf labels not 0..k-1");
    int expect = 0;
    for (int r : ranks)
        if (r != expect++) throw std::invalid_argument("invalid tree: ranks not dense from 0");
    if (tree.leaf_count >= 2 && tree.root.is_leaf())
        throw std::invalid_argument("invalid tree: root must be internal");
}

// Isomorphism-type code ignoring leaf labels (orbit counting key).
inline std::string level_tree_type_code(const LevelTree& tree) {
    return detail::ranked_code(tree.root, false);
}

// Structural code with leaf labels (canonical-form equality for extract).
inline std::string level_tree_code(const LevelTree& tree) {
    return detail::ranked_code(tree.root, true);
}

namespace detail {

inline LevelTree::Node extract_node(const std::vector<LeveledPoint>& points,
                                    const std::vector<int>& idx,
                                    std::vector<Rat>& levels_out) {
    if (idx.size() == 1) {
        LevelTree::Node leaf;
        leaf.leaf = idx[0];
        return leaf;
    }
    Rat q = meet_level(points[idx[0]], points[idx[1]]);
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = i + 1; j < idx.size(); ++j)
            q = std::min(q, meet_level(points[idx[i]], points[idx[j]]));
    levels_out.push_back(q);
    const int creation_index = static_cast<int>(levels_out.size()) - 1;

    std::map<int, std::vector<int>> groups;  // letter at q -> members
    for (int i : idx) groups[points[i].at(q)].push_back(i);

    LevelTree::Node node;
    node.children.reserve(groups.size());
    struct Pending { int min_leaf; LevelTree::Node child; };
    std::vector<Pending> pending;
    for (auto& [letter, group] : groups) {
        auto child = extract_node(points, group, levels_out);
        int min_leaf = group[0];
        for (int g : group) min_leaf = std::min(min_leaf, g);
        pending.push_back({min_leaf, std::move(child)});
    }
    std::sort(pending.begin(), pending.end(),
              [](const Pending& a, const Pending& b) { return a.min_leaf < b.min_leaf; });
    for (auto& p : pending) node.children.push_back(std::move(p.child));
    node.rank = creation_index;  // rewritten to a dense rank by the caller
    return node;
}

// extract_node stores, in node.rank, the index into the levels_out vector of
// the level at which the node was created (in creation order). Rewrite ranks
// as the dense numeric order of those levels.
inline void fixup_ranks(LevelTree::Node& node, const std::vector<Rat>& created,
                        const std::map<Rat, int>& dense) {
    if (node.is_leaf()) return;
    node.rank = dense.at(created[node.rank]);
    for (auto& c : node.children) fixup_ranks(c, created, dense);
}

}  // namespace detail

inline LevelTree extract_level_tree(const std::vector<LeveledPoint>& points) {
    const int n = static_cast<int>(points.size());
    if (n < 1) throw std::invalid_argument("need at least one point");
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (points[i] == points[j]) throw std::invalid_argument("duplicate points");

    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::vector<Rat> created;
    LevelTree tree;
    tree.leaf_count = n;

    // extract_node registers each internal node's level in creation order;
    // the node.rank field temporarily holds that creation index. Creation
    // indices are then rewritten to dense ranks in numeric level order.
    tree.root = detail::extract_node(points, idx, created);
    if (!created.empty()) {
        std::map<Rat, int> dense;
        for (const Rat& q : created) dense[q] = 0;
        int next = 0;
        for (auto& [q, r] : dense) r = next++;
        detail::fixup_ranks(tree.root, created, dense);
    }
    validate_level_tree(tree);
    return tree;
}

namespace detail {

inline void realize_node(const LevelTree::Node& node, const std::vector<Rat>& rank_levels,
                         std::map<Rat, int> prefix, std::vector<LeveledPoint>& out,
                         const std::vector<std::vector<int>>* letters, int& internal_seen) {
    if (node.is_leaf()) {
        out[node.leaf] = LeveledPoint(prefix);
        return;
    }
    const int my_index = internal_seen++;
    const Rat level = rank_levels[node.rank];
    for (std::size_t c = 0; c < node.children.size(); ++c) {
        auto child_prefix = prefix;
        child_prefix[level] =
            letters ? (*letters)[my_index][c] : static_cast<int>(c) + 1;
        realize_node(node.children[c], rank_levels, std::move(child_prefix), out, letters,
                     internal_seen);
    }
}

inline int count_internal(const LevelTree::Node& node) {
    if (node.is_leaf()) return 0;
    int total = 1;
    for (const auto& c : node.children) total += count_internal(c);
    return total;
}

inline int max_rank(const LevelTree::Node& node) {
    if (node.is_leaf()) return -1;
    int r = node.rank;
    for (const auto& c : node.children) r = std::max(r, max_rank(c));
    return r;
}

}  // namespace detail

// Canonical realization: rank class r is realized at rational level r, and
// the children of each internal node take letters 1..deg in order.
inline std::vector<LeveledPoint> realize(const LevelTree& tree) {
    validate_level_tree(tree);
    std::vector<LeveledPoint> out(tree.leaf_count);
    const int ranks = detail::max_rank(tree.root) + 1;
    std::vector<Rat> rank_levels;
    for (int r = 0; r < ranks; ++r) rank_levels.push_back(rat(r));
    int seen = 0;
    detail::realize_node(tree.root, rank_levels, {}, out, nullptr, seen);
    return out;
}

// Randomized realization with arbitrary order-compatible levels and letters.
inline std::vector<LeveledPoint> realize_random(const LevelTree& tree, std::mt19937_64& rng) {
    validate_level_tree(tree);
    const int ranks = detail::max_rank(tree.root) + 1;
    std::set<Rat> levels;
    std::uniform_int_distribution<long long> num(-24, 24);
    std::uniform_int_distribution<long long> den(1, 4);
    while (static_cast<int>(levels.size()) < ranks) levels.insert(Rat(num(rng), den(rng)));
    std::vector<Rat> rank_levels(levels.begin(), levels.end());

    const int internals = detail::count_internal(tree.root);
    std::vector<std::vector<int>> letters(internals);
    std::function<void(const LevelTree::Node&, int&)> fill = [&](const LevelTree::Node& node,
                                                                 int& seen) {
        if (node.is_leaf()) return;
        const int idx = seen++;
        const int deg = static_cast<int>(node.children.size());
        std::vector<int> pool;
        for (int v = 1; v <= deg + 2; ++v) pool.push_back(v);
        std::shuffle(pool.begin(), pool.end(), rng);
        letters[idx].assign(pool.begin(), pool.begin() + deg);
        for (const auto& c : node.children) fill(c, seen);
    };
    int seen = 0;
    fill(tree.root, seen);

    std::vector<LeveledPoint> out(tree.leaf_count);
    seen = 0;
    detail::realize_node(tree.root, rank_levels, {}, out, &letters, seen);
    return out;
}

// One back-and-forth step: given a partial isomorphism dom -> img and a fresh
// point a, produce b so that dom+[a] -> img+[b] is again a partial
// isomorphism. Follows the maximal-meet case split; all choices deterministic.
inline LeveledPoint extend_one_point(const std::vector<LeveledPoint>& dom,
                                     const std::vector<LeveledPoint>& img,
                                     const LeveledPoint& a) {
    if (!is_partial_isomorphism(dom, img))
        throw std::invalid_argument("not a partial isomorphism");
    for (const auto& d : dom)
        if (d == a) throw std::invalid_argument("point already in domain");
    const int n = static_cast<int>(dom.size());
    if (n == 0) return a;

    int j0 = 0;
    Rat mu = meet_level(a, dom[0]);
    for (int j = 1; j < n; ++j) {
        Rat m = meet_level(a, dom[j]);
        if (m > mu) {
            mu = m;
            j0 = j;
        }
    }

    std::vector<std::vector<Rat>> dm(n, std::vector<Rat>(n)), im(n, std::vector<Rat>(n));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            dm[i][j] = dm[j][i] = meet_level(dom[i], dom[j]);
            im[i][j] = im[j][i] = meet_level(img[i], img[j]);
        }

    Rat q;
    std::set<int> avoid;  // letters b(q) must not take
    std::vector<int> case1_members;
    for (int i = 0; i < n; ++i)
        if (i != j0 && dm[j0][i] == mu) case1_members.push_back(i);

    if (!case1_members.empty()) {
        // Case 1: a∧dom[j0] is realized as dom[j0]∧dom[k0].
        q = im[j0][case1_members.front()];
        for (int i : case1_members) avoid.insert(img[i].at(q));
        avoid.insert(img[j0].at(q));
    } else {
        bool case2 = false;
        for (int k = 0; k < n && !case2; ++k)
            for (int l = k + 1; l < n && !case2; ++l)
                if (dm[k][l] == mu) {
                    // Case 2: the level exists among other pairs; use the
                    // order-corresponding image level.
                    q = im[k][l];
                    case2 = true;
                }
        if (!case2) {
            // Case 3: fresh level, slotted into the image level order.
            std::set<Rat> dset, iset;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    dset.insert(dm[i][j]);
                    iset.insert(im[i][j]);
                }
            std::vector<Rat> dl(dset.begin(), dset.end()), il(iset.begin(), iset.end());
            if (dl.empty())
                q = rat(0);
            else if (mu < dl.front())
                q = il.front() - 1;
            else if (mu > dl.back())
                q = il.back() + 1;
            else {
                for (std::size_t t = 0; t + 1 < dl.size(); ++t)
                    if (dl[t] < mu && mu < dl[t + 1]) q = midpoint(il[t], il[t + 1]);
            }
        }
        avoid.insert(img[j0].at(q));
    }

    int letter = 0;
    for (int v : avoid) letter = std::max(letter, v);
    ++letter;

    std::map<Rat, int> word;
    for (const auto& [pos, l] : img[j0].word())
        if (pos < q) word[pos] = l;
    word[q] = letter;
    return LeveledPoint(word);
}

// --- orbit counting -------------------------------------------------------

namespace detail {

// Unlabeled tree shapes with n leaves, every internal node with >= 2
// children. Represented as canonical nested child lists.
struct Shape {
    std::vector<Shape> children;  // empty = leaf
    std::string code;             // canonical
    int leaves = 1;
};

inline std::vector<Shape>& shapes_with(int n);

inline void multisets_of(const std::vector<int>& sizes, std::size_t at,
                         std::vector<Shape>& acc, std::vector<std::vector<Shape>>& out) {
    if (at == sizes.size()) {
        out.push_back(acc);
        return;
    }
    // group equal sizes: choose a non-decreasing run of shapes for them
    std::size_t end = at;
    while (end < sizes.size() && sizes[end] == sizes[at]) ++end;
    const auto& pool = shapes_with(sizes[at]);
    const int slots = static_cast<int>(end - at);
    std::vector<int> pick(slots, 0);
    auto rec = [&](auto&& self, int slot, int from) -> void {
        if (slot == slots) {
            for (int s = 0; s < slots; ++s) acc.push_back(pool[pick[s]]);
            multisets_of(sizes, end, acc, out);
            for (int s = 0; s < slots; ++s) acc.pop_back();
            return;
        }
        for (int i = from; i < static_cast<int>(pool.size()); ++i) {
            pick[slot] = i;
            self(self, slot + 1, i);
        }
    };
    rec(rec, 0, 0);
}

inline void partitions_desc(int n, int max_part, std::vector<int>& acc,
                            std::vector<std::vector<int>>& out) {
    if (n == 0) {
        if (acc.size() >= 2) out.push_back(acc);
        return;
    }
    for (int p = std::min(n, max_part); p >= 1; --p) {
        acc.push_back(p);
        partitions_desc(n - p, p, acc, out);
        acc.pop_back();
    }
}

inline std::vector<Shape>& shapes_with(int n) {
    static std::map<int, std::vector<Shape>> memo;
    auto it = memo.find(n);
    if (it != memo.end()) return it->second;
    std::vector<Shape> result;
    if (n == 1) {
        Shape leaf;
        leaf.code = "L";
        result.push_back(leaf);
    } else {
        std::vector<std::vector<int>> parts;
        std::vector<int> acc;
        partitions_desc(n, n - 1, acc, parts);
        for (const auto& sizes : parts) {
            std::vector<std::vector<Shape>> childsets;
            std::vector<Shape> cacc;
            multisets_of(sizes, 0, cacc, childsets);
            for (auto& children : childsets) {
                Shape s;
                s.children = children;
                s.leaves = n;
                std::vector<std::string> codes;
                for (const auto& c : s.children) codes.push_back(c.code);
                std::sort(codes.begin(), codes.end());
                s.code = "(";
                for (const auto& c : codes) s.code += c + ",";
                s.code += ")";
                result.push_back(std::move(s));
            }
        }
        std::sort(result.begin(), result.end(),
                  [](const Shape& a, const Shape& b) { return a.code < b.code; });
        result.erase(std::unique(result.begin(), result.end(),
                                 [](const Shape& a, const Shape& b) { return a.code == b.code; }),
                     result.end());
    }
    return memo.emplace(n, std::move(result)).first->second;
}

inline void shape_to_tree(const Shape& s, LevelTree::Node& node,
                          const std::vector<int>& ranks, int& internal_seen, int& leaf_seen) {
    if (s.children.empty()) {
        node.leaf = leaf_seen++;
        return;
    }
    node.rank = ranks[internal_seen++];
    node.children.resize(s.children.size());
    for (std::size_t i = 0; i < s.children.size(); ++i)
        shape_to_tree(s.children[i], node.children[i], ranks, internal_seen, leaf_seen);
}

inline void collect_parents(const Shape& s, int parent, int& counter,
                            std::vector<int>& parents) {
    if (s.children.empty()) return;
    const int me = counter++;
    parents.push_back(parent);
    for (const auto& c : s.children) collect_parents(c, me, counter, parents);
}

}  // namespace detail

// All valid leaf-labeled LevelTrees with k leaves, one per isomorphism type.
// Leaves are labeled in canonical DFS order.
inline std::vector<LevelTree> enumerate_level_trees(int k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    std::vector<LevelTree> out;
    std::map<std::string, bool> seen;
    for (const auto& shape : detail::shapes_with(k)) {
        std::vector<int> parents;
        int counter = 0;
        detail::collect_parents(shape, -1, counter, parents);
        const int internals = counter;
        if (internals == 0) {
            LevelTree tree;
            tree.leaf_count = 1;
            tree.root.leaf = 0;
            out.push_back(tree);
            continue;
        }
        // enumerate dense rank assignments: parents strictly smaller
        std::vector<int> ranks(internals, -1);
        auto rec = [&](auto&& self, int node) -> void {
            if (node == internals) {
                int maxr = 0;
                for (int r : ranks) maxr = std::max(maxr, r);
                std::vector<bool> used(maxr + 1, false);
                for (int r : ranks) used[r] = true;
                for (bool u : used)
                    if (!u) return;  // ranks must be dense
                LevelTree tree;
                tree.leaf_count = k;
                int iseen = 0, lseen = 0;
                detail::shape_to_tree(shape, tree.root, ranks, iseen, lseen);
                const std::string code = level_tree_type_code(tree);
                if (!seen.emplace(code, true).second) return;
                validate_level_tree(tree);
                out.push_back(std::move(tree));
                return;
            }
            const int lo = parents[node] < 0 ? 0 : ranks[parents[node]] + 1;
            for (int r = lo; r < internals; ++r) {
                ranks[node] = r;
                self(self, node + 1);
            }
            ranks[node] = -1;
        };
        rec(rec, 0);
    }
    return out;
}

// Number of isomorphism types of k-point subsets (= ranked level-tree types).
inline long long count_iso_types(int k) {
    return static_cast<long long>(enumerate_level_trees(k).size());
}

// k fresh realizations of tp(a/A): agree with a below a level Q above all
// relevant structure, then take pairwise-distinct letters at Q.
inline std::vector<LeveledPoint> acl_witnesses(const std::vector<LeveledPoint>& A,
                                               const LeveledPoint& a, int k) {
    for (const auto& x : A)
        if (x == a) throw std::invalid_argument("point already in parameter set");
    if (k < 1) throw std::invalid_argument("k must be >= 1");

    Rat top = rat(0);
    auto bump = [&](const Rat& r) { top = std::max(top, r); };
    std::vector<LeveledPoint> all = A;
    all.push_back(a);
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (const auto& [pos, letter] : all[i].word()) bump(pos);
        for (std::size_t j = i + 1; j < all.size(); ++j)
            if (all[i] != all[j]) bump(meet_level(all[i], all[j]));
    }
    const Rat q = rat(floor_rat(top) + 1);

    std::vector<LeveledPoint> out;
    for (int i = 1; i <= k; ++i) {
        std::map<Rat, int> word;
        for (const auto& [pos, letter] : a.word())
            if (pos < q) word[pos] = letter;
        word[q] = i;
        out.push_back(LeveledPoint(word));
    }
    return out;
}

// --- samplers (seeded; used by property suites and the CLI) ----------------

inline LevelTree random_level_tree(std::mt19937_64& rng, int max_leaves) {
    const int k = std::uniform_int_distribution<int>(1, std::max(1, max_leaves))(rng);
    // random shape by recursive splitting
    std::function<LevelTree::Node(int, int)> build = [&](int leaves, int depth) {
        LevelTree::Node node;
        if (leaves == 1) {
            node.leaf = 0;  // labels assigned at the end
            return node;
        }
        const int max_children = std::min(leaves, 4);
        const int c = std::uniform_int_distribution<int>(2, max_children)(rng);
        std::vector<int> split(c, 1);
        for (int extra = leaves - c; extra > 0; --extra)
            ++split[std::uniform_int_distribution<int>(0, c - 1)(rng)];
        node.rank = depth;
        for (int part : split) node.children.push_back(build(part, depth + 1));
        return node;
    };
    LevelTree tree;
    tree.leaf_count = k;
    tree.root = build(k, 0);

    // jitter ranks upward to mix rank classes, keep parent < child
    std::function<void(LevelTree::Node&, int)> jitter = [&](LevelTree::Node& node, int lo) {
        if (node.is_leaf()) return;
        node.rank = lo + std::uniform_int_distribution<int>(0, 1)(rng);
        for (auto& c : node.children) jitter(c, node.rank + 1);
    };
    jitter(tree.root, 0);

    // densify rank classes
    std::set<int> used;
    std::function<void(const LevelTree::Node&)> collect = [&](const LevelTree::Node& node) {
        if (node.is_leaf()) return;
        used.insert(node.rank);
        for (const auto& c : node.children) collect(c);
    };
    collect(tree.root);
    std::map<int, int> dense;
    int next = 0;
    for (int r : used) dense[r] = next++;
    std::function<void(LevelTree::Node&)> apply = [&](LevelTree::Node& node) {
        if (node.is_leaf()) return;
        node.rank = dense[node.rank];
        for (auto& c : node.children) apply(c);
    };
    apply(tree.root);

    // canonical leaf labels in DFS order
    int label = 0;
    std::function<void(LevelTree::Node&)> relabel = [&](LevelTree::Node& node) {
        if (node.is_leaf()) {
            node.leaf = label++;
            return;
        }
        for (auto& c : node.children) relabel(c);
    };
    relabel(tree.root);
    validate_level_tree(tree);
    return tree;
}

inline LeveledPoint random_point(std::mt19937_64& rng, int max_support = 3,
                                 long long position_range = 8, int max_letter = 3) {
    const int n = std::uniform_int_distribution<int>(0, max_support)(rng);
    std::map<Rat, int> word;
    std::uniform_int_distribution<long long> num(-position_range, position_range);
    std::uniform_int_distribution<long long> den(1, 2);
    std::uniform_int_distribution<int> letter(1, max_letter);
    for (int i = 0; i < n; ++i) word[Rat(num(rng), den(rng))] = letter(rng);
    return LeveledPoint(word);
}

// --- JSON ------------------------------------------------------------------

inline nlohmann::json leveled_point_to_json(const LeveledPoint& p, const std::string& name) {
    nlohmann::json word = nlohmann::json::array();
    for (const auto& [pos, letter] : p.word())
        word.push_back(nlohmann::json::array({format_rat(pos), letter}));
    return nlohmann::json{{"name", name}, {"word", word}};
}

inline std::pair<std::string, LeveledPoint> leveled_point_from_json(const nlohmann::json& j) {
    std::map<Rat, int> word;
    for (const auto& entry : j.at("word"))
        word[parse_rat(entry.at(0).get<std::string>())] = entry.at(1).get<int>();
    std::string name = j.contains("name") ? j.at("name").get<std::string>() : "";
    return {name, LeveledPoint(word)};
}

inline nlohmann::json level_tree_to_json(const LevelTree::Node& node) {
    if (node.is_leaf()) return nlohmann::json{{"leaf", node.leaf}};
    nlohmann::json children = nlohmann::json::array();
    for (const auto& c : node.children) children.push_back(level_tree_to_json(c));
    return nlohmann::json{{"rank", node.rank}, {"children", children}};
}

inline nlohmann::json level_tree_to_json(const LevelTree& tree) {
    return nlohmann::json{{"leaves", tree.leaf_count}, {"tree", level_tree_to_json(tree.root)}};
}

inline LevelTree::Node level_tree_node_from_json(const nlohmann::json& j) {
    LevelTree::Node node;
    if (j.contains("leaf")) {
        node.leaf = j.at("leaf").get<int>();
        return node;
    }
    node.rank = j.at("rank").get<int>();
    for (const auto& c : j.at("children")) node.children.push_back(level_tree_node_from_json(c));
    return node;
}

inline LevelTree level_tree_from_json(const nlohmann::json& j) {
    LevelTree tree;
    tree.leaf_count = j.at("leaves").get<int>();
    tree.root = level_tree_node_from_json(j.at("tree"));
    validate_level_tree(tree);
    return tree;
}

}  // namespace treelike
