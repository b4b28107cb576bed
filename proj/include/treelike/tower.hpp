#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include <treelike/structure.hpp>

namespace treelike {

// One level of a tower: a finite tree whose degree-<=1 nodes host the points
// present at this level (a shared node = one direction class), with a special
// edge designated at every inner node. Levels are capped at 64 nodes so tree
// paths fit in one mask word.
struct DLevel {
    std::vector<std::string> node_names;
    std::map<std::string, int> node_index;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<int>> adj;
    std::vector<std::vector<int>> hosted;  // node -> point ids (present here)
    std::vector<int> special;              // node -> neighbor node, -1 if none
    std::vector<int> point_node;           // point -> hosting node, -1 if absent

    // derived by prepare()
    bool prepared = false;
    bool connected_tree = false;
    std::vector<int> parent, depth;
    std::vector<std::vector<std::uint64_t>> path_mask;  // inclusive of endpoints

    int node_count() const { return static_cast<int>(node_names.size()); }
    int degree(int v) const { return static_cast<int>(adj[v].size()); }
    bool is_leaf_node(int v) const { return degree(v) <= 1; }

    void prepare() {
        const int n = node_count();
        adj.assign(n, {});
        for (auto [u, v] : edges) {
            adj[u].push_back(v);
            adj[v].push_back(u);
        }
        for (auto& a : adj) std::sort(a.begin(), a.end());
        parent.assign(n, -1);
        depth.assign(n, -1);
        if (n > 0) {
            std::vector<int> queue = {0};
            depth[0] = 0;
            for (std::size_t at = 0; at < queue.size(); ++at) {
                int u = queue[at];
                for (int w : adj[u])
                    if (depth[w] < 0) {
                        depth[w] = depth[u] + 1;
                        parent[w] = u;
                        queue.push_back(w);
                    }
            }
            connected_tree = static_cast<int>(queue.size()) == n &&
                             static_cast<int>(edges.size()) == n - 1 && n <= 64;
        }
        if (connected_tree) {
            path_mask.assign(n, std::vector<std::uint64_t>(n, 0));
            for (int u = 0; u < n; ++u)
                for (int v = u; v < n; ++v) {
                    std::uint64_t mask = 0;
                    int a = u, b = v;
                    while (a != b) {
                        if (depth[a] < depth[b]) std::swap(a, b);
                        mask |= 1ull << a;
                        a = parent[a];
                    }
                    mask |= 1ull << a;
                    path_mask[u][v] = path_mask[v][u] = mask;
                }
        }
        prepared = true;
    }

    bool on_path(int v, int a, int b) const { return (path_mask[a][b] >> v) & 1; }

    // median vertex of three nodes
    int median(int a, int b, int c) const {
        std::uint64_t mask = path_mask[a][b] & path_mask[b][c] & path_mask[a][c];
        return std::countr_zero(mask);
    }
};

struct Tower {
    std::vector<std::string> point_names;
    std::map<std::string, int> point_index;
    std::vector<int> exit;  // point -> greatest level present (1-based)
    std::vector<DLevel> levels;

    int level_count() const { return static_cast<int>(levels.size()); }
    int point_count() const { return static_cast<int>(point_names.size()); }
    bool present(int point, int level) const { return exit[point] >= level; }
    const DLevel& level(int j) const { return levels[j - 1]; }  // 1-based

    int point_id(const std::string& name) const {
        auto it = point_index.find(name);
        if (it == point_index.end()) throw std::invalid_argument("unknown point id: " + name);
        return it->second;
    }
};

// Plain data used to assemble towers (mirrors the JSON wire format).
struct LevelSpec {
    std::vector<std::string> nodes;
    std::vector<std::pair<std::string, std::string>> edges;
    std::map<std::string, std::vector<std::string>> leaves;   // node -> point names
    std::map<std::string, std::string> special;               // node -> neighbor node
};

inline Tower make_tower(const std::vector<LevelSpec>& level_specs,
                        const std::map<std::string, int>& exit_map) {
    Tower t;
    for (const auto& [name, ex] : exit_map) {
        t.point_index[name] = static_cast<int>(t.point_names.size());
        t.point_names.push_back(name);
        t.exit.push_back(ex);
    }
    for (const auto& spec : level_specs) {
        DLevel lvl;
        for (const auto& n : spec.nodes) {
            if (lvl.node_index.count(n)) throw std::invalid_argument("duplicate node: " + n);
            lvl.node_index[n] = static_cast<int>(lvl.node_names.size());
            lvl.node_names.push_back(n);
        }
        auto node_of = [&](const std::string& n) {
            auto it = lvl.node_index.find(n);
            if (it == lvl.node_index.end())
                throw std::invalid_argument("unknown node: " + n);
            return it->second;
        };
        for (const auto& [u, v] : spec.edges) lvl.edges.emplace_back(node_of(u), node_of(v));
        lvl.hosted.assign(lvl.node_names.size(), {});
        lvl.point_node.assign(t.point_count(), -1);
        for (const auto& [node, pts] : spec.leaves) {
            const int v = node_of(node);
            for (const auto& p : pts) {
                const int pid = t.point_id(p);
                if (lvl.point_node[pid] != -1)
                    throw std::invalid_argument("point hosted twice: " + p);
                lvl.point_node[pid] = v;
                lvl.hosted[v].push_back(pid);
            }
        }
        lvl.special.assign(lvl.node_names.size(), -1);
        for (const auto& [node, nbr] : spec.special) lvl.special[node_of(node)] = node_of(nbr);
        lvl.prepare();
        t.levels.push_back(std::move(lvl));
    }
    return t;
}

// --- validation -------------------------------------------------------------

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

inline ValidationReport validate_tower(const Tower& t) {
    ValidationReport report;
    auto flag = [&](const std::string& msg) { report.violations.push_back(msg); };

    const int m = t.level_count();
    if (m == 0) flag("tower has no levels");
    for (int p = 0; p < t.point_count(); ++p) {
        if (t.exit[p] < 1 || t.exit[p] > m)
            flag("exit out of range for point " + t.point_names[p]);
    }

    for (int j = 1; j <= m; ++j) {
        const DLevel& lvl = t.level(j);
        const std::string at = "level " + std::to_string(j) + ": ";
        if (lvl.node_count() == 0) {
            flag(at + "no nodes");
            continue;
        }
        if (!lvl.connected_tree) {
            flag(at + "not a tree (or more than 64 nodes)");
            continue;
        }
        bool any_present = false;
        for (int p = 0; p < t.point_count(); ++p) {
            const bool want = t.present(p, j);
            const bool hosted = lvl.point_node.size() > static_cast<std::size_t>(p) &&
                                lvl.point_node[p] >= 0;
            if (want) any_present = true;
            if (want && !hosted)
                flag(at + "point " + t.point_names[p] + " present but not hosted");
            if (!want && hosted)
                flag(at + "point " + t.point_names[p] + " hosted after exit");
        }
        if (!any_present) flag(at + "no present points");

        for (int v = 0; v < lvl.node_count(); ++v) {
            const int deg = lvl.degree(v);
            if (deg == 0 && lvl.node_count() > 1) flag(at + "isolated node " + lvl.node_names[v]);
            if (deg == 2) flag(at + "inner degree < 3 at node " + lvl.node_names[v]);
            if (lvl.is_leaf_node(v)) {
                if (lvl.hosted[v].empty())
                    flag(at + "leaf " + lvl.node_names[v] + " hosts no point");
                if (lvl.special[v] != -1)
                    flag(at + "special edge on a leaf node " + lvl.node_names[v]);
            } else {
                if (!lvl.hosted[v].empty())
                    flag(at + "points hosted at inner node " + lvl.node_names[v]);
                const int s = lvl.special[v];
                if (s < 0) {
                    flag(at + "inner node " + lvl.node_names[v] + " has no special branch");
                } else {
                    bool adjacent = std::find(lvl.adj[v].begin(), lvl.adj[v].end(), s) !=
                                    lvl.adj[v].end();
                    if (!adjacent) {
                        flag(at + "special edge not incident at " + lvl.node_names[v]);
                    } else {
                        // the special branch must contain a present point
                        bool found = false;
                        for (int p = 0; p < t.point_count() && !found; ++p) {
                            const int leaf = lvl.point_node.empty() ? -1 : lvl.point_node[p];
                            if (leaf >= 0 && leaf != v && lvl.on_path(s, v, leaf)) found = true;
                        }
                        if (!found)
                            flag(at + "special branch at " + lvl.node_names[v] +
                                 " contains no point");
                    }
                }
            }
        }
    }
    if (!report.ok()) return report;

    // refinement between consecutive levels
    for (int j = 1; j < m; ++j) {
        const DLevel& lo = t.level(j);
        const DLevel& hi = t.level(j + 1);
        for (int p = 0; p < t.point_count(); ++p)
            for (int q = p + 1; q < t.point_count(); ++q) {
                if (!t.present(p, j + 1) || !t.present(q, j + 1)) continue;
                if (lo.point_node[p] == lo.point_node[q] &&
                    hi.point_node[p] != hi.point_node[q])
                    flag("levels " + std::to_string(j) + "-" + std::to_string(j + 1) +
                         ": classes of " + t.point_names[p] + "," + t.point_names[q] +
                         " split upward");
            }
    }

    // cone coherence between consecutive levels: some place (node or edge)
    // of the lower tree whose branch partition refines the upper classes.
    for (int j = 1; j < m; ++j) {
        const DLevel& lo = t.level(j);
        const DLevel& hi = t.level(j + 1);
        std::vector<int> up;  // points present above
        for (int p = 0; p < t.point_count(); ++p)
            if (t.present(p, j + 1)) up.push_back(p);
        if (lo.node_count() == 1) continue;  // no visible branching below

        auto refines = [&](auto branch_of) {
            for (std::size_t x = 0; x < up.size(); ++x) {
                if (branch_of(up[x]) < 0) return false;
                for (std::size_t y = x + 1; y < up.size(); ++y)
                    if (branch_of(up[x]) == branch_of(up[y]) &&
                        hi.point_node[up[x]] != hi.point_node[up[y]])
                        return false;
            }
            return true;
        };

        bool coherent = false;
        for (int v = 0; v < lo.node_count() && !coherent; ++v) {
            coherent = refines([&](int p) {
                const int leaf = lo.point_node[p];
                if (leaf == v) return -1;
                // branch id: the neighbor of v toward the leaf
                for (int w : lo.adj[v])
                    if (lo.on_path(w, v, leaf)) return w;
                return -1;
            });
        }
        for (std::size_t e = 0; e < lo.edges.size() && !coherent; ++e) {
            auto [u, v] = lo.edges[e];
            coherent = refines([&](int p) {
                const int leaf = lo.point_node[p];
                return lo.on_path(v, u, leaf) && leaf != u ? 1 : 0;
            });
        }
        if (!coherent)
            flag("levels " + std::to_string(j) + "-" + std::to_string(j + 1) +
                 ": no coherent branching place");
    }
    return report;
}

// --- atoms ------------------------------------------------------------------

// ram(x,y,z): the median node of three pairwise-inequivalent directions.
inline std::string ram(const Tower& t, int level, const std::string& x, const std::string& y,
                       const std::string& z) {
    const DLevel& lvl = t.level(level);
    const int a = lvl.point_node[t.point_id(x)];
    const int b = lvl.point_node[t.point_id(y)];
    const int c = lvl.point_node[t.point_id(z)];
    if (a < 0 || b < 0 || c < 0) throw std::invalid_argument("point absent at level");
    if (a == b || b == c || a == c)
        throw std::invalid_argument("not pairwise inequivalent");
    return lvl.node_names[lvl.median(a, b, c)];
}

// D(x,y;z,w) at one level: the two connecting paths are vertex-disjoint.
inline bool atom_D(const Tower& t, int level, const std::string& x, const std::string& y,
                   const std::string& z, const std::string& w) {
    const DLevel& lvl = t.level(level);
    const int a = lvl.point_node[t.point_id(x)];
    const int b = lvl.point_node[t.point_id(y)];
    const int c = lvl.point_node[t.point_id(z)];
    const int d = lvl.point_node[t.point_id(w)];
    if (a < 0 || b < 0 || c < 0 || d < 0) throw std::invalid_argument("point absent at level");
    std::set<int> leaves = {a, b, c, d};
    if (leaves.size() != 4) throw std::invalid_argument("not pairwise inequivalent");
    return (lvl.path_mask[a][b] & lvl.path_mask[c][d]) == 0;
}

namespace detail {

// Witness computations on point ids; level 0 encodes "none".
inline int witness_L_ids(const Tower& t, int x, int y, int z) {
    if (x == y || y == z || x == z) throw std::invalid_argument("points must be distinct");
    for (int j = t.level_count(); j >= 1; --j) {
        if (!(t.present(x, j) && t.present(y, j) && t.present(z, j))) continue;
        const DLevel& lvl = t.level(j);
        const int a = lvl.point_node[x], b = lvl.point_node[y], c = lvl.point_node[z];
        if (a == b || b == c || a == c) continue;
        const int r = lvl.median(a, b, c);
        const int s = lvl.special[r];
        if (s < 0) continue;
        if (lvl.on_path(s, r, a)) return j;
    }
    return 0;
}

inline int witness_S_ids(const Tower& t, int x, int y, int z, int w) {
    std::set<int> ids = {x, y, z, w};
    if (ids.size() != 4) throw std::invalid_argument("points must be distinct");
    for (int j = t.level_count(); j >= 1; --j) {
        if (!(t.present(x, j) && t.present(y, j) && t.present(z, j) && t.present(w, j)))
            continue;
        const DLevel& lvl = t.level(j);
        const int a = lvl.point_node[x], b = lvl.point_node[y], c = lvl.point_node[z],
                  d = lvl.point_node[w];
        std::set<int> leaves = {a, b, c, d};
        if (leaves.size() != 4) continue;
        if ((lvl.path_mask[a][b] & lvl.path_mask[c][d]) == 0) return j;
    }
    return 0;
}

}  // namespace detail

// Greatest level witnessing L(x;y,z), or nullopt.
inline std::optional<int> witness_L(const Tower& t, const std::string& x, const std::string& y,
                                    const std::string& z) {
    const int j = detail::witness_L_ids(t, t.point_id(x), t.point_id(y), t.point_id(z));
    if (j == 0) return std::nullopt;
    return j;
}

inline std::optional<int> witness_S(const Tower& t, const std::string& x, const std::string& y,
                                    const std::string& z, const std::string& w) {
    const int j = detail::witness_S_ids(t, t.point_id(x), t.point_id(y), t.point_id(z),
                                        t.point_id(w));
    if (j == 0) return std::nullopt;
    return j;
}

// Witness tables over a fixed scope of points. Entry 0 means "no witness";
// tuples with repeated points are 0.
struct WitnessTables {
    int n = 0;
    std::vector<int> scope;  // point ids in scope order
    std::vector<int> witL;   // n^3
    std::vector<int> witS;   // n^4
    int L(int i, int j, int k) const { return witL[(i * n + j) * n + k]; }
    int S(int i, int j, int k, int l) const { return witS[((i * n + j) * n + k) * n + l]; }
};

inline WitnessTables build_witness_tables(const Tower& t, const std::vector<int>& scope) {
    WitnessTables w;
    w.n = static_cast<int>(scope.size());
    w.scope = scope;
    w.witL.assign(static_cast<std::size_t>(w.n) * w.n * w.n, 0);
    w.witS.assign(static_cast<std::size_t>(w.n) * w.n * w.n * w.n, 0);
    for (int i = 0; i < w.n; ++i)
        for (int j = 0; j < w.n; ++j)
            for (int k = 0; k < w.n; ++k) {
                if (i == j || j == k || i == k) continue;
                w.witL[(static_cast<std::size_t>(i) * w.n + j) * w.n + k] =
                    detail::witness_L_ids(t, scope[i], scope[j], scope[k]);
            }
    for (int i = 0; i < w.n; ++i)
        for (int j = 0; j < w.n; ++j)
            for (int k = 0; k < w.n; ++k)
                for (int l = 0; l < w.n; ++l) {
                    std::set<int> ids = {i, j, k, l};
                    if (ids.size() != 4) continue;
                    w.witS[((static_cast<std::size_t>(i) * w.n + j) * w.n + k) * w.n + l] =
                        detail::witness_S_ids(t, scope[i], scope[j], scope[k], scope[l]);
                }
    return w;
}

enum class TowerSymbol { L, S, Lp, Sp, R, Q, P, Qle, Qge, T };

inline const std::vector<std::pair<std::string, TowerSymbol>>& tower_symbol_names() {
    static const std::vector<std::pair<std::string, TowerSymbol>> table = {
        {"L", TowerSymbol::L},   {"S", TowerSymbol::S},   {"Lp", TowerSymbol::Lp},
        {"Sp", TowerSymbol::Sp}, {"R", TowerSymbol::R},   {"Q", TowerSymbol::Q},
        {"P", TowerSymbol::P},   {"Qle", TowerSymbol::Qle}, {"Qge", TowerSymbol::Qge},
        {"T", TowerSymbol::T}};
    return table;
}

inline TowerSymbol tower_symbol_from(const std::string& name) {
    for (const auto& [n, s] : tower_symbol_names())
        if (n == name) return s;
    throw std::invalid_argument("unknown tower symbol: " + name);
}

inline int tower_symbol_arity(TowerSymbol s) {
    switch (s) {
        case TowerSymbol::L: return 3;
        case TowerSymbol::S: return 4;
        case TowerSymbol::Lp: return 4;
        case TowerSymbol::Sp: return 5;
        case TowerSymbol::R: return 6;
        case TowerSymbol::Q: return 7;
        case TowerSymbol::P: return 6;
        case TowerSymbol::Qle: return 7;
        case TowerSymbol::Qge: return 7;
        case TowerSymbol::T: return 8;
    }
    return 0;
}

namespace detail {

// Lenient atom evaluation on point ids: tuples breaking a distinctness
// requirement are false rather than errors (relational semantics).
inline bool atom_lenient_ids(const Tower& t, TowerSymbol sym, const std::vector<int>& p) {
    auto distinct3 = [](int a, int b, int c) { return a != b && b != c && a != c; };
    auto distinct4 = [](int a, int b, int c, int d) {
        return a != b && a != c && a != d && b != c && b != d && c != d;
    };
    auto wl = [&](int a, int b, int c) {
        return distinct3(a, b, c) ? witness_L_ids(t, a, b, c) : 0;
    };
    auto ws = [&](int a, int b, int c, int d) {
        return distinct4(a, b, c, d) ? witness_S_ids(t, a, b, c, d) : 0;
    };
    switch (sym) {
        case TowerSymbol::L: return wl(p[0], p[1], p[2]) != 0;
        case TowerSymbol::S: return ws(p[0], p[1], p[2], p[3]) != 0;
        case TowerSymbol::Lp: {
            const int j = wl(p[0], p[1], p[2]);
            return j != 0 && t.exit[p[3]] < j;
        }
        case TowerSymbol::Sp: {
            const int j = ws(p[0], p[1], p[2], p[3]);
            return j != 0 && t.exit[p[4]] < j;
        }
        case TowerSymbol::R: {
            const int i = wl(p[0], p[1], p[2]), j = wl(p[3], p[4], p[5]);
            return i != 0 && i == j;
        }
        case TowerSymbol::Q: {
            const int i = ws(p[0], p[1], p[2], p[3]), j = wl(p[4], p[5], p[6]);
            return i != 0 && i == j;
        }
        case TowerSymbol::P: {
            const int i = wl(p[0], p[1], p[2]), j = wl(p[3], p[4], p[5]);
            return i != 0 && j != 0 && i <= j;
        }
        case TowerSymbol::Qle: {
            const int i = ws(p[0], p[1], p[2], p[3]), j = wl(p[4], p[5], p[6]);
            return i != 0 && j != 0 && i <= j;
        }
        case TowerSymbol::Qge: {
            const int i = ws(p[0], p[1], p[2], p[3]), j = wl(p[4], p[5], p[6]);
            return i != 0 && j != 0 && i >= j;
        }
        case TowerSymbol::T: {
            const int i = ws(p[0], p[1], p[2], p[3]), j = ws(p[4], p[5], p[6], p[7]);
            return i != 0 && j != 0 && i <= j;
        }
    }
    return false;
}

}  // namespace detail

// Strict atom evaluation on point names: arity and the required
// distinctness of the witness groups are enforced.
inline bool atom(const Tower& t, TowerSymbol sym, const std::vector<std::string>& args) {
    if (static_cast<int>(args.size()) != tower_symbol_arity(sym))
        throw std::invalid_argument("arity mismatch");
    std::vector<int> p;
    p.reserve(args.size());
    for (const auto& a : args) p.push_back(t.point_id(a));

    auto require_distinct = [&](int from, int count) {
        std::set<int> ids(p.begin() + from, p.begin() + from + count);
        if (static_cast<int>(ids.size()) != count)
            throw std::invalid_argument("points must be distinct");
    };
    switch (sym) {
        case TowerSymbol::L: require_distinct(0, 3); break;
        case TowerSymbol::S: require_distinct(0, 4); break;
        case TowerSymbol::Lp: require_distinct(0, 3); break;
        case TowerSymbol::Sp: require_distinct(0, 4); break;
        case TowerSymbol::R: require_distinct(0, 3); require_distinct(3, 3); break;
        case TowerSymbol::Q: require_distinct(0, 4); require_distinct(4, 3); break;
        case TowerSymbol::P: require_distinct(0, 3); require_distinct(3, 3); break;
        case TowerSymbol::Qle: require_distinct(0, 4); require_distinct(4, 3); break;
        case TowerSymbol::Qge: require_distinct(0, 4); require_distinct(4, 3); break;
        case TowerSymbol::T: require_distinct(0, 4); require_distinct(4, 4); break;
    }
    return detail::atom_lenient_ids(t, sym, p);
}

enum class TowerLanguage { JustL, LS, L1, L2 };

inline TowerLanguage tower_language_from(const std::string& name) {
    if (name == "L") return TowerLanguage::JustL;
    if (name == "LS") return TowerLanguage::LS;
    if (name == "L1") return TowerLanguage::L1;
    if (name == "L2") return TowerLanguage::L2;
    throw std::invalid_argument("unknown language: " + name);
}

inline std::vector<std::pair<std::string, TowerSymbol>> language_symbols(TowerLanguage lang) {
    switch (lang) {
        case TowerLanguage::JustL: return {{"L", TowerSymbol::L}};
        case TowerLanguage::LS: return {{"L", TowerSymbol::L}, {"S", TowerSymbol::S}};
        case TowerLanguage::L1:
            return {{"L", TowerSymbol::L},   {"S", TowerSymbol::S}, {"Lp", TowerSymbol::Lp},
                    {"Sp", TowerSymbol::Sp}, {"R", TowerSymbol::R}, {"Q", TowerSymbol::Q}};
        case TowerLanguage::L2:
            return {{"L", TowerSymbol::L},     {"S", TowerSymbol::S},
                    {"P", TowerSymbol::P},     {"Qle", TowerSymbol::Qle},
                    {"Qge", TowerSymbol::Qge}, {"T", TowerSymbol::T}};
    }
    return {};
}

// Reduct of the tower to a relational structure on a point subset.
inline FinStructure reduct(const Tower& t, const std::vector<std::string>& subset,
                           TowerLanguage lang) {
    const int n = static_cast<int>(subset.size());
    std::vector<int> scope;
    scope.reserve(n);
    for (const auto& name : subset) scope.push_back(t.point_id(name));
    auto tables = build_witness_tables(t, scope);

    auto wl = [&](int i, int j, int k) { return tables.L(i, j, k); };
    auto ws = [&](int i, int j, int k, int l) { return tables.S(i, j, k, l); };
    auto ex = [&](int i) { return t.exit[scope[i]]; };

    std::vector<std::pair<std::string, int>> sig;
    for (const auto& [name, sym] : language_symbols(lang))
        sig.emplace_back(name, tower_symbol_arity(sym));
    FinStructure out(Signature(sig), subset);

    std::vector<int> tup;
    for (const auto& [name, sym] : language_symbols(lang)) {
        const int arity = tower_symbol_arity(sym);
        tup.assign(arity, 0);
        while (true) {
            bool holds = false;
            switch (sym) {
                case TowerSymbol::L: holds = wl(tup[0], tup[1], tup[2]) != 0; break;
                case TowerSymbol::S: holds = ws(tup[0], tup[1], tup[2], tup[3]) != 0; break;
                case TowerSymbol::Lp: {
                    const int j = wl(tup[0], tup[1], tup[2]);
                    holds = j != 0 && ex(tup[3]) < j;
                    break;
                }
                case TowerSymbol::Sp: {
                    const int j = ws(tup[0], tup[1], tup[2], tup[3]);
                    holds = j != 0 && ex(tup[4]) < j;
                    break;
                }
                case TowerSymbol::R: {
                    const int i = wl(tup[0], tup[1], tup[2]), j = wl(tup[3], tup[4], tup[5]);
                    holds = i != 0 && i == j;
                    break;
                }
                case TowerSymbol::Q: {
                    const int i = ws(tup[0], tup[1], tup[2], tup[3]);
                    const int j = wl(tup[4], tup[5], tup[6]);
                    holds = i != 0 && i == j;
                    break;
                }
                case TowerSymbol::P: {
                    const int i = wl(tup[0], tup[1], tup[2]), j = wl(tup[3], tup[4], tup[5]);
                    holds = i != 0 && j != 0 && i <= j;
                    break;
                }
                case TowerSymbol::Qle: {
                    const int i = ws(tup[0], tup[1], tup[2], tup[3]);
                    const int j = wl(tup[4], tup[5], tup[6]);
                    holds = i != 0 && j != 0 && i <= j;
                    break;
                }
                case TowerSymbol::Qge: {
                    const int i = ws(tup[0], tup[1], tup[2], tup[3]);
                    const int j = wl(tup[4], tup[5], tup[6]);
                    holds = i != 0 && j != 0 && i >= j;
                    break;
                }
                case TowerSymbol::T: {
                    const int i = ws(tup[0], tup[1], tup[2], tup[3]);
                    const int j = ws(tup[4], tup[5], tup[6], tup[7]);
                    holds = i != 0 && j != 0 && i <= j;
                    break;
                }
            }
            if (holds) out.add_tuple(name, tup);
            int i = arity - 1;
            while (i >= 0 && tup[i] == n - 1) tup[i--] = 0;
            if (i < 0) break;
            ++tup[i];
        }
    }
    return out;
}

// --- induced sub-towers and canonical completion ----------------------------

// The tower induced on a point subset: per level, the Steiner tree of the
// hosting leaves with degree-2 nodes suppressed. Specials survive where the
// ambient special branch still contains a subset point.
inline Tower induced_subtower(const Tower& t, const std::vector<std::string>& subset) {
    std::vector<int> pts;
    for (const auto& name : subset) pts.push_back(t.point_id(name));
    if (pts.empty()) throw std::invalid_argument("subset is empty");

    Tower out;
    int new_m = 0;
    for (int p : pts) new_m = std::max(new_m, t.exit[p]);
    // keep ambient point order
    std::vector<int> ordered;
    for (int p = 0; p < t.point_count(); ++p)
        if (std::find(pts.begin(), pts.end(), p) != pts.end()) ordered.push_back(p);
    for (int p : ordered) {
        out.point_index[t.point_names[p]] = static_cast<int>(out.point_names.size());
        out.point_names.push_back(t.point_names[p]);
        out.exit.push_back(t.exit[p]);
    }

    for (int j = 1; j <= new_m; ++j) {
        const DLevel& lvl = t.level(j);
        std::set<int> marks;
        for (int p : ordered)
            if (t.present(p, j)) marks.insert(lvl.point_node[p]);

        // Steiner tree node set
        std::set<int> keep;
        for (int a : marks)
            for (int b : marks)
                for (int v = 0; v < lvl.node_count(); ++v)
                    if (lvl.on_path(v, a, b)) keep.insert(v);

        // retained nodes: marks plus branch nodes of the Steiner tree
        auto steiner_degree = [&](int v) {
            int deg = 0;
            for (int w : lvl.adj[v])
                if (keep.count(w)) ++deg;
            return deg;
        };
        std::vector<int> retained;
        for (int v : keep)
            if (marks.count(v) || steiner_degree(v) >= 3) retained.push_back(v);

        DLevel nl;
        std::map<int, int> new_id;
        for (int v : retained) {
            new_id[v] = static_cast<int>(nl.node_names.size());
            nl.node_names.push_back(lvl.node_names[v]);
            nl.node_index[lvl.node_names[v]] = new_id[v];
        }
        // connect consecutive retained nodes along ambient paths
        for (std::size_t x = 0; x < retained.size(); ++x)
            for (std::size_t y = x + 1; y < retained.size(); ++y) {
                const int a = retained[x], b = retained[y];
                bool interior_retained = false;
                for (int v : retained)
                    if (v != a && v != b && lvl.on_path(v, a, b)) interior_retained = true;
                if (!interior_retained) nl.edges.emplace_back(new_id[a], new_id[b]);
            }
        nl.hosted.assign(nl.node_names.size(), {});
        nl.point_node.assign(out.point_count(), -1);
        for (int p : ordered)
            if (t.present(p, j)) {
                const int v = new_id.at(lvl.point_node[p]);
                const int np = out.point_index.at(t.point_names[p]);
                nl.point_node[np] = v;
                nl.hosted[v].push_back(np);
            }
        nl.special.assign(nl.node_names.size(), -1);
        nl.prepare();
        for (int v : retained) {
            if (nl.is_leaf_node(new_id[v])) continue;
            const int s = lvl.special[v];
            if (s < 0) continue;
            // find a subset point whose ambient leaf lies through the special edge
            int target = -1;
            for (int p : ordered) {
                if (!t.present(p, j)) continue;
                const int leaf = lvl.point_node[p];
                if (leaf != v && lvl.on_path(s, v, leaf)) {
                    target = new_id.at(lvl.point_node[p]);
                    break;
                }
            }
            if (target < 0) continue;  // special branch invisible: left missing
            for (int w : nl.adj[new_id[v]])
                if (nl.on_path(w, new_id[v], target)) {
                    nl.special[new_id[v]] = w;
                    break;
                }
        }
        out.levels.push_back(std::move(nl));
    }
    return out;
}

// Canonical class-D completion: sweep levels bottom-up, adopting the
// lowest-id ambient point in the special branch of every induced branching
// node not yet covered; iterate to a fixpoint.
inline std::vector<std::string> complete(const Tower& t, const std::vector<std::string>& subset) {
    if (subset.empty()) throw std::invalid_argument("subset is empty");
    std::set<int> current;
    for (const auto& name : subset) current.insert(t.point_id(name));

    bool changed = true;
    while (changed) {
        changed = false;
        for (int j = 1; j <= t.level_count(); ++j) {
            const DLevel& lvl = t.level(j);
            bool level_changed = true;
            while (level_changed) {
                level_changed = false;
                std::set<int> marks;
                for (int p : current)
                    if (t.present(p, j)) marks.insert(lvl.point_node[p]);
                if (marks.size() < 3) break;
                for (int v = 0; v < lvl.node_count() && !level_changed; ++v) {
                    if (lvl.degree(v) < 3) continue;
                    // induced branching node: >= 3 branches at v contain marks
                    std::set<int> branches;
                    for (int leaf : marks) {
                        if (leaf == v) { branches.clear(); break; }
                        for (int w : lvl.adj[v])
                            if (lvl.on_path(w, v, leaf)) { branches.insert(w); break; }
                    }
                    if (branches.size() < 3) continue;
                    const int s = lvl.special[v];
                    if (s < 0)
                        throw std::invalid_argument("ambient tower not in class D");
                    bool covered = false;
                    for (int p : current)
                        if (t.present(p, j)) {
                            const int leaf = lvl.point_node[p];
                            if (leaf != v && lvl.on_path(s, v, leaf)) { covered = true; break; }
                        }
                    if (covered) continue;
                    int adopt = -1;
                    for (int p = 0; p < t.point_count(); ++p) {
                        if (!t.present(p, j)) continue;
                        const int leaf = lvl.point_node[p];
                        if (leaf != v && lvl.on_path(s, v, leaf)) { adopt = p; break; }
                    }
                    if (adopt < 0) throw std::invalid_argument("ambient tower not in class D");
                    current.insert(adopt);
                    level_changed = true;
                    changed = true;
                }
            }
        }
    }
    std::vector<std::string> out;
    for (int p = 0; p < t.point_count(); ++p)
        if (current.count(p)) out.push_back(t.point_names[p]);
    return out;
}

// --- JSON --------------------------------------------------------------------

inline nlohmann::json tower_to_json(const Tower& t) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& lvl : t.levels) {
        nlohmann::json jl;
        jl["nodes"] = lvl.node_names;
        nlohmann::json edges = nlohmann::json::array();
        for (auto [u, v] : lvl.edges)
            edges.push_back(nlohmann::json::array({lvl.node_names[u], lvl.node_names[v]}));
        jl["edges"] = edges;
        nlohmann::json leaves = nlohmann::json::object();
        for (int v = 0; v < lvl.node_count(); ++v)
            if (!lvl.hosted[v].empty()) {
                nlohmann::json pts = nlohmann::json::array();
                for (int p : lvl.hosted[v]) pts.push_back(t.point_names[p]);
                leaves[lvl.node_names[v]] = pts;
            }
        jl["leaves"] = leaves;
        nlohmann::json special = nlohmann::json::object();
        for (int v = 0; v < lvl.node_count(); ++v)
            if (lvl.special[v] >= 0)
                special[lvl.node_names[v]] = lvl.node_names[lvl.special[v]];
        jl["special"] = special;
        levels.push_back(jl);
    }
    nlohmann::json exit = nlohmann::json::object();
    for (int p = 0; p < t.point_count(); ++p) exit[t.point_names[p]] = t.exit[p];
    return nlohmann::json{{"levels", levels}, {"exit", exit}};
}

inline Tower tower_from_json(const nlohmann::json& j) {
    std::map<std::string, int> exit;
    for (const auto& [name, level] : j.at("exit").items()) exit[name] = level.get<int>();
    std::vector<LevelSpec> levels;
    for (const auto& jl : j.at("levels")) {
        LevelSpec spec;
        spec.nodes = jl.at("nodes").get<std::vector<std::string>>();
        for (const auto& e : jl.at("edges"))
            spec.edges.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
        if (jl.contains("leaves"))
            for (const auto& [node, pts] : jl.at("leaves").items())
                spec.leaves[node] = pts.get<std::vector<std::string>>();
        if (jl.contains("special"))
            for (const auto& [node, nbr] : jl.at("special").items())
                spec.special[node] = nbr.get<std::string>();
        levels.push_back(std::move(spec));
    }
    return make_tower(levels, exit);
}

// --- reference fixtures -------------------------------------------------------

// T*: level 1 is a 4-leaf star with special edge toward x; level 2 is a
// 3-leaf star with special toward y; w exits after level 1.
inline Tower make_tstar() {
    LevelSpec l1;
    l1.nodes = {"c", "lx", "ly", "lz", "lw"};
    l1.edges = {{"c", "lx"}, {"c", "ly"}, {"c", "lz"}, {"c", "lw"}};
    l1.leaves = {{"lx", {"x"}}, {"ly", {"y"}}, {"lz", {"z"}}, {"lw", {"w"}}};
    l1.special = {{"c", "lx"}};
    LevelSpec l2;
    l2.nodes = {"c2", "lx2", "ly2", "lz2"};
    l2.edges = {{"c2", "lx2"}, {"c2", "ly2"}, {"c2", "lz2"}};
    l2.leaves = {{"lx2", {"x"}}, {"ly2", {"y"}}, {"lz2", {"z"}}};
    l2.special = {{"c2", "ly2"}};
    return make_tower({l1, l2}, {{"x", 2}, {"y", 2}, {"z", 2}, {"w", 1}});
}

// T<>: one level, a two-node spine with leaves x,y at one end and z,w at the
// other; both inner nodes point their special edges at x and z.
inline Tower make_tdiamond() {
    LevelSpec l1;
    l1.nodes = {"u1", "u2", "lx", "ly", "lz", "lw"};
    l1.edges = {{"u1", "u2"}, {"u1", "lx"}, {"u1", "ly"}, {"u2", "lz"}, {"u2", "lw"}};
    l1.leaves = {{"lx", {"x"}}, {"ly", {"y"}}, {"lz", {"z"}}, {"lw", {"w"}}};
    l1.special = {{"u1", "lx"}, {"u2", "lz"}};
    return make_tower({l1}, {{"x", 1}, {"y", 1}, {"z", 1}, {"w", 1}});
}

}  // namespace treelike
