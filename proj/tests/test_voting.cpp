#include <doctest.h>

#include <random>

#include "rsea/relation_data.hpp"
#include "rsea/voting.hpp"

using namespace rsea;

namespace {

RelationMatrix from_rows(const std::vector<std::vector<int>>& rows) {
    RelationMatrix m;
    m.n = rows.size();
    m.q = rows.empty() ? 0 : rows[0].size();
    for (const auto& r : rows)
        for (int v : r) m.entries.push_back(label_from_int(v));
    return m;
}

} // namespace

TEST_CASE("score_c1 column sums") {
    auto all_plus = from_rows({{1}, {1}, {1}, {1}, {1}});
    CHECK(score_c1(all_plus).values == std::vector<double>{-5.0});

    auto mixed = from_rows({{-1}, {-1}, {1}});
    CHECK(score_c1(mixed).values == std::vector<double>{1.0});

    auto best = from_rows({{-1}, {-1}, {-1}, {-1}});
    CHECK(score_c1(best).values == std::vector<double>{4.0});

    CHECK_THROWS_AS(score_c1(from_rows({{0}, {1}})), DomainError);
}

TEST_CASE("score_c1 values are integers in [-n, n]") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 8, q = 1 + rng() % 8;
        RelationMatrix m = RelationMatrix::zeros(n, q);
        for (auto& e : m.entries) e = (rng() % 2) ? RelationLabel::Better : RelationLabel::Worse;
        auto s = score_c1(m);
        for (double v : s.values) {
            CHECK(v == std::round(v));
            CHECK(std::fabs(v) <= double(n));
        }
    }
}

TEST_CASE("score_c2 unanimous and hand-computed cases") {
    auto all_minus = from_rows({{-1}, {-1}, {-1}});
    all_minus.anchor_tags = {CategoryTag::Good, CategoryTag::Bad, CategoryTag::Good};
    CHECK(score_c2(all_minus).values == std::vector<double>{1.0});

    auto all_plus = from_rows({{1}, {1}, {1}});
    all_plus.anchor_tags = {CategoryTag::Good, CategoryTag::Bad, CategoryTag::Good};
    CHECK(score_c2(all_plus).values == std::vector<double>{-1.0});

    // (Good:0, Good:-1, Bad:+1, Bad:0) -> (1 + 1 + 0 - 0 - 1 - 1)/4 = 0
    auto mixed = from_rows({{0}, {-1}, {1}, {0}});
    mixed.anchor_tags = {CategoryTag::Good, CategoryTag::Good, CategoryTag::Bad, CategoryTag::Bad};
    CHECK(score_c2(mixed).values == std::vector<double>{0.0});

    auto untagged = from_rows({{0}});
    CHECK_THROWS_AS(score_c2(untagged), DomainError);
}

TEST_CASE("score_c2 range and permutation equivariance") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 8, q = 2 + rng() % 7;
        RelationMatrix m = RelationMatrix::zeros(n, q);
        std::vector<CategoryTag> tags;
        for (auto& e : m.entries) e = label_from_int(int(rng() % 3) - 1);
        for (std::size_t i = 0; i < n; ++i)
            tags.push_back((rng() % 2) ? CategoryTag::Good : CategoryTag::Bad);
        m.anchor_tags = tags;
        auto s = score_c2(m);
        for (double v : s.values) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }

        // swap two candidate columns: scores swap identically
        RelationMatrix swapped = m;
        for (std::size_t i = 0; i < n; ++i) std::swap(swapped.at(i, 0), swapped.at(i, q - 1));
        auto s2 = score_c2(swapped);
        CHECK(s2.values[0] == s.values[q - 1]);
        CHECK(s2.values[q - 1] == s.values[0]);

        // swap two anchor rows together with their tags: scores unchanged
        if (n >= 2) {
            RelationMatrix rows = m;
            for (std::size_t k = 0; k < q; ++k) std::swap(rows.at(0, k), rows.at(n - 1, k));
            std::swap((*rows.anchor_tags)[0], (*rows.anchor_tags)[n - 1]);
            CHECK(score_c2(rows).values == s.values);
        }
    }
}

TEST_CASE("oracle C1 voting is weakly monotone in true fitness") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng() % 7, q = 2 + rng() % 7;
        std::vector<double> anchor_f(n), cand_f(q);
        for (auto& v : anchor_f) v = unif(rng);
        for (auto& v : cand_f) v = unif(rng);
        RelationMatrix m = RelationMatrix::zeros(n, q);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < q; ++k) m.at(i, k) = label_c1(anchor_f[i], cand_f[k]);
        auto s = score_c1(m);
        for (std::size_t a = 0; a < q; ++a)
            for (std::size_t b = 0; b < q; ++b)
                if (cand_f[a] < cand_f[b]) CHECK(s.values[a] >= s.values[b]);
    }
}

TEST_CASE("select_top") {
    ScoreVector s;
    s.values = {3.0, -1.0, 3.0, 0.0};
    CHECK(select_top(s, 2) == std::vector<std::size_t>{0, 2});
    CHECK(select_top(s, 4) == std::vector<std::size_t>{0, 2, 3, 1});
    CHECK_THROWS_AS(select_top(s, 0), DomainError);
    CHECK_THROWS_AS(select_top(s, 5), DomainError);
}

TEST_CASE("select_top matches full-sort brute force") {
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> score(-5, 5);
    for (int trial = 0; trial < 100; ++trial) {
        ScoreVector s;
        for (int k = 0; k < 30; ++k) s.values.push_back(double(score(rng)));
        auto top = select_top(s, 3);
        // brute force: repeatedly take the max, ties by lowest index
        std::vector<bool> taken(30, false);
        for (std::size_t pick = 0; pick < 3; ++pick) {
            std::size_t best = 30;
            for (std::size_t k = 0; k < 30; ++k)
                if (!taken[k] && (best == 30 || s.values[k] > s.values[best])) best = k;
            taken[best] = true;
            CHECK(top[pick] == best);
        }
    }
}
