#include <catch2/catch_amalgamated.hpp>

#include <treelike/structure.hpp>

#include <optional>
#include <random>
#include <set>
#include <vector>

using namespace treelike;

namespace {

// Test-only oracle: enumerate every injection and check every atom and its
// negation directly from the definition. Independent of the library's
// backtracking search.
void all_injections(int n, int m, std::vector<int>& map, std::vector<bool>& used,
                    std::vector<std::vector<int>>& out) {
    const int k = static_cast<int>(map.size());
    if (k == n) {
        out.push_back(map);
        return;
    }
    for (int v = 0; v < m; ++v) {
        if (used[v]) continue;
        used[v] = true;
        map.push_back(v);
        all_injections(n, m, map, used, out);
        map.pop_back();
        used[v] = false;
    }
}

bool is_strong_map(const FinStructure& a, const FinStructure& b, const std::vector<int>& map) {
    for (const auto& [name, arity] : a.signature().symbols) {
        std::vector<int> t(arity, 0);
        while (true) {
            std::vector<int> img(arity);
            for (int i = 0; i < arity; ++i) img[i] = map[t[i]];
            if (a.has(name, t) != b.has(name, img)) return false;
            int i = arity - 1;
            while (i >= 0 && t[i] == a.size() - 1) t[i--] = 0;
            if (i < 0) break;
            ++t[i];
        }
    }
    return true;
}

std::vector<std::vector<int>> brute_force_embeddings(const FinStructure& a,
                                                     const FinStructure& b) {
    std::vector<std::vector<int>> found;
    if (a.size() > b.size() || a.size() == 0) {
        if (a.size() == 0) found.push_back({});
        return found;
    }
    std::vector<std::vector<int>> injections;
    std::vector<int> map;
    std::vector<bool> used(b.size(), false);
    all_injections(a.size(), b.size(), map, used, injections);
    for (const auto& inj : injections)
        if (is_strong_map(a, b, inj)) found.push_back(inj);
    return found;
}

FinStructure digraph(const std::vector<std::string>& universe,
                     const std::vector<std::pair<std::string, std::string>>& edges) {
    FinStructure s(Signature{{"E", 2}}, universe);
    for (const auto& [u, v] : edges) s.add_tuple_by_name("E", {u, v});
    return s;
}

FinStructure random_structure(std::mt19937_64& rng, int max_size) {
    std::uniform_int_distribution<int> size_dist(1, max_size);
    const int n = size_dist(rng);
    std::vector<std::string> universe;
    for (int i = 0; i < n; ++i) universe.push_back("v" + std::to_string(i));
    FinStructure s(Signature{{"E", 2}, {"T", 3}}, universe);
    std::uniform_int_distribution<int> el(0, n - 1);
    std::uniform_int_distribution<int> count(0, 2 * n);
    for (int c = count(rng); c > 0; --c) s.add_tuple("E", {el(rng), el(rng)});
    for (int c = count(rng); c > 0; --c) s.add_tuple("T", {el(rng), el(rng), el(rng)});
    return s;
}

FinStructure relabel(const FinStructure& s, std::mt19937_64& rng) {
    std::vector<int> perm(s.size());
    for (int i = 0; i < s.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::string> universe(s.size());
    for (int i = 0; i < s.size(); ++i) universe[perm[i]] = "w" + std::to_string(perm[i]);
    FinStructure out(s.signature(), universe);
    for (const auto& [name, arity] : s.signature().symbols)
        for (const auto& t : s.tuples_sorted(name)) {
            std::vector<int> mapped(t.size());
            for (std::size_t i = 0; i < t.size(); ++i) mapped[i] = perm[t[i]];
            out.add_tuple(name, mapped);
        }
    return out;
}

}  // namespace

TEST_CASE("signature validation") {
    CHECK_THROWS(Signature{{"L", 0}});
    CHECK_THROWS(Signature({{"L", 3}, {"L", 4}}));
    Signature sig{{"L", 3}, {"V", 4}};
    CHECK(sig.arity_of("V") == 4);
    CHECK_THROWS(sig.arity_of("X"));
}

TEST_CASE("induced substructures") {
    auto s = digraph({"1", "2", "3"}, {{"1", "2"}, {"2", "3"}});

    SECTION("tuples filtered by membership") {
        auto sub = induced(s, {"1", "3"});
        CHECK(sub.size() == 2);
        CHECK(sub.tuple_count("E") == 0);
    }
    SECTION("full subset is identity") {
        auto sub = induced(s, {"1", "2", "3"});
        CHECK(sub == s);
    }
    SECTION("empty subset") {
        auto sub = induced(s, {});
        CHECK(sub.size() == 0);
        CHECK(sub.tuple_count("E") == 0);
    }
    SECTION("unknown element rejected") {
        CHECK_THROWS_WITH(induced(s, {"1", "9"}), Catch::Matchers::ContainsSubstring("not in universe"));
    }
}

TEST_CASE("find_embedding examples") {
    SECTION("single free point") {
        FinStructure a(Signature{{"E", 2}}, {"p"});
        auto b = digraph({"x", "y", "z"}, {{"x", "y"}});
        // z sits in no tuple, so a free point embeds.
        auto map = find_embedding(a, b);
        REQUIRE(map.has_value());
        CHECK(is_strong_map(a, b, *map));
        CHECK(!brute_force_embeddings(a, b).empty());
    }
    SECTION("3-cycle into 2-cycle: none") {
        auto c3 = digraph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"c", "a"}});
        auto c2 = digraph({"a", "b"}, {{"a", "b"}, {"b", "a"}});
        CHECK(!find_embedding(c3, c2).has_value());
        CHECK(brute_force_embeddings(c3, c2).empty());
    }
    SECTION("3-cycle into itself: one of 3 rotations") {
        auto c3 = digraph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"c", "a"}});
        auto maps = brute_force_embeddings(c3, c3);
        CHECK(maps.size() == 3);
        auto found = find_embedding(c3, c3);
        REQUIRE(found.has_value());
        CHECK(std::find(maps.begin(), maps.end(), *found) != maps.end());
    }
    SECTION("signature mismatch") {
        FinStructure a(Signature{{"E", 2}}, {"p"});
        FinStructure b(Signature{{"F", 2}}, {"p"});
        CHECK_THROWS(find_embedding(a, b));
    }
}

TEST_CASE("is_isomorphic examples") {
    auto path = digraph({"1", "2"}, {{"1", "2"}});
    SECTION("identity") { CHECK(is_isomorphic(path, path)); }
    SECTION("relabeling") {
        auto reversed = digraph({"2", "1"}, {{"2", "1"}});
        CHECK(is_isomorphic(path, reversed));
    }
    SECTION("path of 2 edges vs out-star") {
        auto p2 = digraph({"1", "2", "3"}, {{"1", "2"}, {"2", "3"}});
        auto star = digraph({"1", "2", "3"}, {{"1", "2"}, {"1", "3"}});
        CHECK(!is_isomorphic(p2, star));
        // oracle: exhaust all 6 bijections
        CHECK(brute_force_embeddings(p2, star).empty());
    }
}

TEST_CASE("canonical_code basics") {
    SECTION("empty structure has a fixed distinguished code") {
        FinStructure e1(Signature{{"E", 2}}, {});
        FinStructure e2(Signature{{"E", 2}}, {});
        CHECK(canonical_code(e1) == canonical_code(e2));
        FinStructure one(Signature{{"E", 2}}, {"x"});
        CHECK(canonical_code(e1) != canonical_code(one));
    }
    SECTION("relabeled copies share a code") {
        auto s = digraph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
        auto t = digraph({"x", "y", "z"}, {{"z", "x"}, {"x", "y"}});  // same shape, new labels
        CHECK(canonical_code(s) == canonical_code(t));
    }
    SECTION("non-isomorphic structures get distinct codes") {
        auto p2 = digraph({"1", "2", "3"}, {{"1", "2"}, {"2", "3"}});
        auto star = digraph({"1", "2", "3"}, {{"1", "2"}, {"1", "3"}});
        CHECK(canonical_code(p2) != canonical_code(star));
    }
}

TEST_CASE("strong embedding composition on random triples") {
    std::mt19937_64 rng(20240601);
    int composed = 0;
    for (int trial = 0; trial < 300 && composed < 40; ++trial) {
        auto a = random_structure(rng, 3);
        auto b = random_structure(rng, 4);
        auto c = random_structure(rng, 5);
        auto f = find_embedding(a, b);
        auto g = find_embedding(b, c);
        if (!f || !g) continue;
        std::vector<int> gf(a.size());
        for (int i = 0; i < a.size(); ++i) gf[i] = (*g)[(*f)[i]];
        CHECK(is_strong_map(a, c, gf));
        ++composed;
    }
    CHECK(composed > 0);
}

TEST_CASE("mutual embeddability with equal size implies isomorphism") {
    std::mt19937_64 rng(777);
    for (int trial = 0; trial < 200; ++trial) {
        auto a = random_structure(rng, 4);
        auto b = random_structure(rng, 4);
        if (a.size() != b.size()) continue;
        bool ab = find_embedding(a, b).has_value();
        bool ba = find_embedding(b, a).has_value();
        if (ab && ba) CHECK(is_isomorphic(a, b));
    }
}

TEST_CASE("canonical_code respects isomorphism on random pairs") {
    std::mt19937_64 rng(123456);
    int done = 0;
    for (int trial = 0; trial < 1200; ++trial) {
        auto a = random_structure(rng, 6);
        FinStructure b = (trial % 2 == 0) ? relabel(a, rng) : random_structure(rng, 6);
        const bool iso = !brute_force_embeddings(a, b).empty() && a.size() == b.size() &&
                         !brute_force_embeddings(b, a).empty();
        CHECK((canonical_code(a) == canonical_code(b)) == iso);
        ++done;
    }
    CHECK(done == 1200);
}

TEST_CASE("json round trip") {
    auto s = digraph({"x", "y", "z"}, {{"x", "y"}, {"y", "z"}});
    auto j = to_json(s);
    CHECK(j["universe"] == nlohmann::json({"x", "y", "z"}));
    auto back = fin_structure_from_json(j);
    CHECK(back == s);
    CHECK(to_json(back) == j);
}
