#include <catch2/catch_amalgamated.hpp>

#include <treelike/perm.hpp>

#include <random>

using namespace treelike;

TEST_CASE("perm parsing and validation") {
    auto p = Perm::parse("3 1 2");
    CHECK(p.size() == 3);
    CHECK(p.at(1) == 3);
    CHECK(p.str() == "3 1 2");
    CHECK_THROWS(Perm::parse("1 1 2"));
    CHECK_THROWS(Perm::parse("0 1"));
    CHECK_THROWS(Perm::parse(""));
}

TEST_CASE("perm_contains") {
    auto p132 = Perm::parse("1 3 2");
    auto p12 = Perm::parse("1 2");
    auto p123 = Perm::parse("1 2 3");
    auto p21 = Perm::parse("2 1");
    CHECK(perm_contains(p132, p132));
    CHECK(perm_contains(p132, p12));
    CHECK(!perm_contains(p123, p21));  // exhausts all 3 pairs
    CHECK(!perm_contains(p12, p132));  // longer cannot fit
}

TEST_CASE("encode_perm") {
    SECTION("n=1") {
        auto enc = encode_perm(Perm::parse("1"));
        REQUIRE(enc.points.size() == 5);
        // meets: a^j ∧ b1 = -1, b1 ∧ c1 = 1
        CHECK(meet_level(enc.points[0], enc.points[3]) == rat(-1));
        CHECK(meet_level(enc.points[3], enc.points[4]) == rat(1));
    }
    SECTION("n=2, sigma = 21") {
        auto enc = encode_perm(Perm::parse("2 1"));
        REQUIRE(enc.points.size() == 7);
        const auto& b1 = enc.points[3];
        const auto& b2 = enc.points[4];
        const auto& c1 = enc.points[5];
        const auto& c2 = enc.points[6];
        CHECK(b1 == LeveledPoint({{rat(-2), 1}}));
        CHECK(c1 == LeveledPoint({{rat(-2), 1}, {rat(2), 1}}));
        CHECK(b2 == LeveledPoint({{rat(-1), 1}}));
        CHECK(c2 == LeveledPoint({{rat(-1), 1}, {rat(1), 1}}));
        // condition (4): 2 <2 1 matches b2∧c2 = 1 < 2 = b1∧c1
        CHECK(meet_level(b2, c2) < meet_level(b1, c1));
    }
    SECTION("anchors meet pairwise at one level for any sigma") {
        for (const auto& sigma : all_perms(3)) {
            auto enc = encode_perm(sigma);
            for (int i = 0; i < 3; ++i)
                for (int j = i + 1; j < 3; ++j)
                    CHECK(meet_level(enc.points[i], enc.points[j]) == rat(0));
        }
    }
}

TEST_CASE("decode_perm") {
    SECTION("round trip on all permutations of length <= 4") {
        int cases = 0;
        for (int n = 1; n <= 4; ++n)
            for (const auto& sigma : all_perms(n)) {
                auto enc = encode_perm(sigma);
                CHECK(decode_perm(enc.points) == sigma);
                ++cases;
            }
        CHECK(cases == 33);
    }
    SECTION("decode is qf-type invariant") {
        std::mt19937_64 rng(5150);
        for (const auto& sigma : all_perms(3)) {
            auto enc = encode_perm(sigma);
            // re-realize the same level tree with random levels/letters
            auto tree = extract_level_tree(enc.points);
            auto other = realize_random(tree, rng);
            REQUIRE(qf_structure(other) == qf_structure(enc.points));
            CHECK(decode_perm(other) == sigma);
            // and input order must not matter
            auto shuffled = enc.points;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            CHECK(decode_perm(shuffled) == sigma);
        }
    }
    SECTION("a 5-point star is not decodable") {
        std::vector<LeveledPoint> star;
        for (int i = 1; i <= 5; ++i) star.push_back(LeveledPoint({{rat(0), i}}));
        CHECK_THROWS_WITH(decode_perm(star),
                          Catch::Matchers::ContainsSubstring("not a sigma-structure"));
    }
    SECTION("wrong cardinality") {
        std::vector<LeveledPoint> four;
        for (int i = 1; i <= 4; ++i) four.push_back(LeveledPoint({{rat(0), i}}));
        CHECK_THROWS(decode_perm(four));
    }
}

TEST_CASE("antichain members") {
    CHECK(antichain_member(1).str() == "3 1 6 2 8 5 4 7");
    CHECK(antichain_member(2).str() == "3 1 6 2 8 5 10 7 4 9");
    CHECK_THROWS(antichain_member(0));

    SECTION("members 1..4 pairwise incomparable in both directions") {
        for (int i = 1; i <= 4; ++i)
            for (int j = i + 1; j <= 4; ++j) {
                auto mi = antichain_member(i);
                auto mj = antichain_member(j);
                CHECK(!perm_contains(mj, mi));
                CHECK(!perm_contains(mi, mj));
            }
    }
    SECTION("strictness sanity: prefix pattern is properly contained") {
        for (int i = 1; i <= 3; ++i) {
            auto m = antichain_member(i);
            std::vector<int> prefix(m.values().begin(), m.values().end() - 1);
            // renormalize to a permutation of 1..n-1
            std::vector<int> sorted = prefix;
            std::sort(sorted.begin(), sorted.end());
            for (auto& v : prefix)
                v = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), v) -
                                     sorted.begin()) + 1;
            Perm pre(prefix);
            CHECK(perm_contains(m, pre));
            CHECK(!perm_contains(pre, m));
        }
    }
}

TEST_CASE("growth_lower_bound") {
    CHECK(growth_lower_bound(1) == 1);
    CHECK(growth_lower_bound(2) == 2);
    CHECK(growth_lower_bound(3) == 6);
    CHECK_THROWS_WITH(growth_lower_bound(6), Catch::Matchers::ContainsSubstring("desk scale"));
}

TEST_CASE("encoding injectivity up to isomorphism for n <= 3") {
    for (int n = 1; n <= 3; ++n) {
        auto perms = all_perms(n);
        for (std::size_t i = 0; i < perms.size(); ++i)
            for (std::size_t j = i + 1; j < perms.size(); ++j) {
                auto si = encode_perm(perms[i]).qf();
                auto sj = encode_perm(perms[j]).qf();
                CHECK(!is_isomorphic(si, sj));
            }
    }
}

TEST_CASE("containment matches structure embedding") {
    SECTION("all 81 pairs with both lengths <= 3") {
        std::vector<Perm> small;
        for (int n = 1; n <= 3; ++n)
            for (const auto& p : all_perms(n)) small.push_back(p);
        REQUIRE(small.size() == 9);
        for (const auto& sigma : small)
            for (const auto& tau : small) {
                const bool pattern = perm_contains(tau, sigma);
                const bool embeds =
                    find_embedding(encode_perm(sigma).qf(), encode_perm(tau).qf()).has_value();
                CHECK(pattern == embeds);
            }
    }
    SECTION("20 seeded pairs with |sigma|=3, |tau|=4") {
        std::mt19937_64 rng(424242);
        auto s3 = all_perms(3);
        auto s4 = all_perms(4);
        for (int trial = 0; trial < 20; ++trial) {
            const auto& sigma = s3[std::uniform_int_distribution<std::size_t>(0, s3.size() - 1)(rng)];
            const auto& tau = s4[std::uniform_int_distribution<std::size_t>(0, s4.size() - 1)(rng)];
            const bool pattern = perm_contains(tau, sigma);
            const bool embeds =
                find_embedding(encode_perm(sigma).qf(), encode_perm(tau).qf()).has_value();
            CHECK(pattern == embeds);
        }
    }
}

TEST_CASE("triviality failure witness") {
    SECTION("n=3") {
        auto report = triviality_failure_witness(3);
        CHECK(report.indiscernible_over_Ab);
        CHECK(report.indiscernible_over_Ac);
        CHECK(report.cut_detected);
    }
    SECTION("n=8") {
        auto report = triviality_failure_witness(8);
        CHECK(report.indiscernible_over_Ab);
        CHECK(report.indiscernible_over_Ac);
        CHECK(report.cut_detected);
        CHECK(report.first_pair != report.second_pair);
    }
    SECTION("cut above every pair meet: no cut detected") {
        auto report = triviality_failure_witness(3, false);
        CHECK(report.indiscernible_over_Ab);
        CHECK(report.indiscernible_over_Ac);
        CHECK(!report.cut_detected);
    }
    SECTION("n < 3 rejected") { CHECK_THROWS(triviality_failure_witness(2)); }
}
