#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <treelike/leveled.hpp>

namespace treelike {

// Finite permutation in one-line notation; values 1..n. Carries the two
// linear orders of the growth encoding: <1 is position order, and i <2 j
// iff sigma(i) < sigma(j).
class Perm {
public:
    explicit Perm(std::vector<int> values) : values_(std::move(values)) {
        const int n = static_cast<int>(values_.size());
        if (n == 0) throw std::invalid_argument("empty permutation");
        std::vector<bool> seen(n + 1, false);
        for (int v : values_) {
            if (v < 1 || v > n || seen[v])
                throw std::invalid_argument("not a permutation in one-line notation");
            seen[v] = true;
        }
    }

    static Perm parse(const std::string& text) {
        std::istringstream in(text);
        std::vector<int> values;
        int v;
        while (in >> v) values.push_back(v);
        return Perm(values);
    }

    std::string str() const {
        std::string out;
        for (int v : values_) {
            if (!out.empty()) out += ' ';
            out += std::to_string(v);
        }
        return out;
    }

    int size() const { return static_cast<int>(values_.size()); }
    int at(int pos) const { return values_.at(pos - 1); }  // 1-based
    const std::vector<int>& values() const { return values_; }

    bool operator==(const Perm& o) const { return values_ == o.values_; }
    bool operator!=(const Perm& o) const { return values_ != o.values_; }

private:
    std::vector<int> values_;
};

// Pattern containment: some increasing position subsequence of tau is
// order-isomorphic to sigma. Brute force over all |sigma|-subsets.
inline bool perm_contains(const Perm& tau, const Perm& sigma) {
    const int n = tau.size(), k = sigma.size();
    if (k > n) return false;
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        bool match = true;
        for (int p = 0; p < k && match; ++p)
            for (int q = p + 1; q < k && match; ++q)
                if ((tau.values()[idx[p]] < tau.values()[idx[q]]) !=
                    (sigma.values()[p] < sigma.values()[q]))
                    match = false;
        if (match) return true;
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    return false;
}

// The 2n+3 point encoding of a permutation: three anchors meeting pairwise
// at level 0, plus one pair {b_i, c_i} per position with b_i branching off
// at t_i = i-(n+1) and the pair splitting at level sigma(i).
struct SigmaStructure {
    int n = 0;
    std::vector<std::string> names;
    std::vector<LeveledPoint> points;

    FinStructure qf() const { return qf_structure(points, names); }
};

inline SigmaStructure encode_perm(const Perm& sigma) {
    const int n = sigma.size();
    SigmaStructure out;
    out.n = n;
    for (int j = 1; j <= 3; ++j) {
        out.names.push_back("a" + std::to_string(j));
        out.points.push_back(LeveledPoint({{rat(0), j}}));
    }
    for (int i = 1; i <= n; ++i) {
        out.names.push_back("b" + std::to_string(i));
        out.points.push_back(LeveledPoint({{rat(i - (n + 1)), 1}}));
    }
    for (int i = 1; i <= n; ++i) {
        out.names.push_back("c" + std::to_string(i));
        out.points.push_back(LeveledPoint({{rat(i - (n + 1)), 1}, {rat(sigma.at(i)), 1}}));
    }

    // construction check: the four defining conditions
    const auto& p = out.points;
    auto b = [&](int i) { return p[2 + i]; };
    auto c = [&](int i) { return p[2 + n + i]; };
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                if (i != j && j != k && i != k && atom_C(p[i], p[j], p[k]))
                    throw std::logic_error("encode_perm: anchors not free");
    for (int j = 0; j < 3; ++j)
        for (int i = 1; i <= n; ++i)
            if (!atom_C(p[j], b(i), c(i))) throw std::logic_error("encode_perm: condition 2");
    for (int k = 0; k < 3; ++k)
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j)
                if (i < j && !(meet_level(p[k], b(i)) < meet_level(p[k], b(j))))
                    throw std::logic_error("encode_perm: condition 3");
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            if (sigma.at(i) < sigma.at(j) && !(meet_level(b(i), c(i)) < meet_level(b(j), c(j))))
                throw std::logic_error("encode_perm: condition 4");
    return out;
}

// Inverse of encode_perm up to isomorphism. Depends only on the qf type:
// anchors are the unique triple with all pairwise meets equal; pairs are
// grouped by meet level against the anchors (earlier in <1 = lower level);
// <2 is the order of the within-pair meet levels.
inline Perm decode_perm(const std::vector<LeveledPoint>& points) {
    const int total = static_cast<int>(points.size());
    if (total < 5 || total % 2 == 0)
        throw std::invalid_argument("not a sigma-structure: wrong point count");
    const int n = (total - 3) / 2;

    for (int i = 0; i < total; ++i)
        for (int j = i + 1; j < total; ++j)
            if (points[i] == points[j])
                throw std::invalid_argument("not a sigma-structure: duplicate points");

    std::vector<std::vector<Rat>> m(total, std::vector<Rat>(total));
    for (int i = 0; i < total; ++i)
        for (int j = i + 1; j < total; ++j) m[i][j] = m[j][i] = meet_level(points[i], points[j]);

    // phi(x): there exist distinct y,z with x∧y = x∧z = y∧z
    std::vector<int> anchors;
    for (int x = 0; x < total; ++x) {
        bool holds = false;
        for (int y = 0; y < total && !holds; ++y)
            for (int z = y + 1; z < total && !holds; ++z) {
                if (y == x || z == x) continue;
                if (m[x][y] == m[x][z] && m[x][y] == m[y][z]) holds = true;
            }
        if (holds) anchors.push_back(x);
    }
    if (anchors.size() != 3)
        throw std::invalid_argument("not a sigma-structure: anchor set is not a triple");

    std::vector<int> rest;
    for (int x = 0; x < total; ++x)
        if (x != anchors[0] && x != anchors[1] && x != anchors[2]) rest.push_back(x);

    // E-classes: equal meet level against each anchor
    std::map<Rat, std::vector<int>> classes;
    for (int x : rest) {
        const Rat level = m[anchors[0]][x];
        for (int a : anchors)
            if (m[a][x] != level)
                throw std::invalid_argument("not a sigma-structure: anchors disagree on classes");
        classes[level].push_back(x);
    }
    if (static_cast<int>(classes.size()) != n)
        throw std::invalid_argument("not a sigma-structure: class order is not linear");
    for (const auto& [level, members] : classes)
        if (members.size() != 2)
            throw std::invalid_argument("not a sigma-structure: classes must be pairs");

    // anchors must witness C(a; x, y) for every pair {x,y}
    std::vector<Rat> pair_meets;
    for (const auto& [level, members] : classes) {
        for (int a : anchors)
            if (!atom_C(points[a], points[members[0]], points[members[1]]))
                throw std::invalid_argument("not a sigma-structure: pair not below anchors");
        pair_meets.push_back(m[members[0]][members[1]]);
    }
    std::vector<Rat> sorted_meets = pair_meets;
    std::sort(sorted_meets.begin(), sorted_meets.end());
    if (std::adjacent_find(sorted_meets.begin(), sorted_meets.end()) != sorted_meets.end())
        throw std::invalid_argument("not a sigma-structure: pair-meet order is not linear");

    // classes are already in ascending anchor-meet order (= <1); sigma(i) is
    // the rank of the i-th pair meet among all pair meets (= <2).
    std::vector<int> values;
    for (const Rat& pm : pair_meets) {
        int rank = 1;
        for (const Rat& other : sorted_meets)
            if (other < pm) ++rank;
        values.push_back(rank);
    }
    return Perm(values);
}

// The i-th member of a fixed infinite antichain: an increasing oscillation
// with two trailing points threaded into its value range, one just above the
// first entry and one just below the maximum. Pairwise incomparability is
// enforced behaviorally by the tests.
inline Perm antichain_member(int i) {
    if (i < 1) throw std::invalid_argument("antichain members are indexed from 1");
    const int n = 2 * i + 6;
    std::vector<int> p(n + 1, 0);
    p[1] = 3;
    p[2] = 1;
    p[4] = 2;
    for (int j = 1; j <= i + 1; ++j) p[2 * j + 1] = 2 * j + 4;
    for (int j = 3; j <= i + 2; ++j) p[2 * j] = 2 * j - 1;
    p[n - 1] = 4;
    p[n] = 2 * i + 5;
    return Perm(std::vector<int>(p.begin() + 1, p.end()));
}

// Number of pairwise non-isomorphic encodings of length-n permutations,
// deduplicated by exact canonical code. Equals n! when the encoding is
// faithful.
inline long long growth_lower_bound(int n) {
    if (n < 1 || n > 5) throw std::invalid_argument("exceeds desk scale");
    std::vector<int> vals(n);
    for (int i = 0; i < n; ++i) vals[i] = i + 1;
    std::set<std::string> codes;
    do {
        codes.insert(canonical_code(encode_perm(Perm(vals)).qf()));
    } while (std::next_permutation(vals.begin(), vals.end()));
    return static_cast<long long>(codes.size());
}

inline long long factorial(int n) {
    long long f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// Indiscernibility-triviality failure: the block sequence I = (b_i c_i) of
// the identity window is indiscernible (at the qf level) over A+b and over
// A+c separately, but the pair meet of {b,c} cuts the <2 order, so two block
// pairs differ over A+b+c.
struct TrivialityReport {
    bool indiscernible_over_Ab = false;
    bool indiscernible_over_Ac = false;
    bool cut_detected = false;
    // block index pairs (1-based) with differing qf type over A+b+c
    std::pair<int, int> first_pair{0, 0};
    std::pair<int, int> second_pair{0, 0};
};

inline TrivialityReport triviality_failure_witness(int n, bool cut_between_s1_s2 = true) {
    if (n < 3) throw std::invalid_argument("need n >= 3");
    auto enc = encode_perm([&] {
        std::vector<int> identity(n);
        for (int i = 0; i < n; ++i) identity[i] = i + 1;
        return Perm(identity);
    }());
    const auto& pts = enc.points;
    std::vector<LeveledPoint> A = {pts[0], pts[1], pts[2]};
    auto block_b = [&](int i) { return pts[2 + i]; };
    auto block_c = [&](int i) { return pts[2 + n + i]; };

    const Rat tb = rat(-(n + 2));
    const Rat cut = cut_between_s1_s2 ? Rat(3, 2) : rat(n + 1);
    LeveledPoint extra_b({{tb, 1}});
    LeveledPoint extra_c({{tb, 1}, {cut, 1}});

    auto block_pair_type = [&](const std::vector<LeveledPoint>& params, int i, int j) {
        std::vector<LeveledPoint> tuple = {pts[0], pts[1], pts[2]};
        for (const auto& p : params) tuple.push_back(p);
        tuple.push_back(block_b(i));
        tuple.push_back(block_c(i));
        tuple.push_back(block_b(j));
        tuple.push_back(block_c(j));
        return qf_structure(tuple);
    };

    auto all_equal = [&](const std::vector<LeveledPoint>& params) {
        std::optional<FinStructure> reference;
        for (int i = 1; i <= n; ++i)
            for (int j = i + 1; j <= n; ++j) {
                auto t = block_pair_type(params, i, j);
                if (!reference)
                    reference = t;
                else if (!(t == *reference))
                    return false;
            }
        return true;
    };

    TrivialityReport report;
    report.indiscernible_over_Ab = all_equal({extra_b});
    report.indiscernible_over_Ac = all_equal({extra_c});

    std::optional<FinStructure> reference;
    std::pair<int, int> ref_pair{0, 0};
    for (int i = 1; i <= n && !report.cut_detected; ++i)
        for (int j = i + 1; j <= n && !report.cut_detected; ++j) {
            auto t = block_pair_type({extra_b, extra_c}, i, j);
            if (!reference) {
                reference = t;
                ref_pair = {i, j};
            } else if (!(t == *reference)) {
                report.cut_detected = true;
                report.first_pair = ref_pair;
                report.second_pair = {i, j};
            }
        }
    return report;
}

inline std::vector<Perm> all_perms(int n) {
    std::vector<int> vals(n);
    for (int i = 0; i < n; ++i) vals[i] = i + 1;
    std::vector<Perm> out;
    do {
        out.push_back(Perm(vals));
    } while (std::next_permutation(vals.begin(), vals.end()));
    return out;
}

}  // namespace treelike
