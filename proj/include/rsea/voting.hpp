#ifndef RSEA_VOTING_HPP
#define RSEA_VOTING_HPP

// Aggregates an n x q relation matrix into per-candidate scores and selects
// the top candidates. C1: negative column sum, integer-valued. C2: group
// counts over Good/Bad anchors, normalized by n into [-1, 1].

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

#include "rsea/errors.hpp"
#include "rsea/types.hpp"

namespace rsea {

struct RelationMatrix {
    std::size_t n = 0; // anchors (rows)
    std::size_t q = 0; // candidates (columns)
    std::vector<RelationLabel> entries; // row-major, n*q
    std::optional<std::vector<CategoryTag>> anchor_tags; // required for C2 scoring

    RelationLabel at(std::size_t i, std::size_t k) const { return entries[i * q + k]; }
    RelationLabel& at(std::size_t i, std::size_t k) { return entries[i * q + k]; }

    static RelationMatrix zeros(std::size_t n, std::size_t q) {
        RelationMatrix m;
        m.n = n;
        m.q = q;
        m.entries.assign(n * q, RelationLabel::Similar);
        return m;
    }
};

struct ScoreVector {
    std::vector<double> values;
    Criterion criterion = Criterion::C1;
};

/// score_k = -sum_i L[i][k]; higher is better. Rejects 0 entries.
inline ScoreVector score_c1(const RelationMatrix& L) {
    for (RelationLabel l : L.entries)
        if (l == RelationLabel::Similar) throw DomainError("score_c1: 0 labels are not valid under C1");
    ScoreVector s;
    s.criterion = Criterion::C1;
    s.values.assign(L.q, 0.0);
    for (std::size_t i = 0; i < L.n; ++i)
        for (std::size_t k = 0; k < L.q; ++k) s.values[k] -= label_value(L.at(i, k));
    return s;
}

/// score_k = (cG(0) + cG(-1) + cB(-1) - cG(+1) - cB(+1) - cB(0)) / n,
/// where cG/cB count labels over Good/Bad anchors.
inline ScoreVector score_c2(const RelationMatrix& L) {
    if (!L.anchor_tags || L.anchor_tags->size() != L.n)
        throw DomainError("score_c2: anchor tags covering all rows are required");
    ScoreVector s;
    s.criterion = Criterion::C2;
    s.values.assign(L.q, 0.0);
    for (std::size_t i = 0; i < L.n; ++i) {
        const bool good = (*L.anchor_tags)[i] == CategoryTag::Good;
        for (std::size_t k = 0; k < L.q; ++k) {
            double w = 0.0;
            switch (L.at(i, k)) {
            case RelationLabel::Better: w = -1.0; break; // anchor better: bad sign either group
            case RelationLabel::Worse: w = +1.0; break;  // candidate better
            case RelationLabel::Similar: w = good ? +1.0 : -1.0; break;
            }
            s.values[k] += w;
        }
    }
    for (double& v : s.values) v /= double(L.n);
    return s;
}

/// Indices of the n_prime highest scores, ties broken by lower index.
inline std::vector<std::size_t> select_top(const ScoreVector& scores, std::size_t n_prime) {
    const std::size_t q = scores.values.size();
    if (n_prime < 1 || n_prime > q) throw DomainError("select_top: n_prime out of range");
    std::vector<std::size_t> order(q);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores.values[a] > scores.values[b];
    });
    order.resize(n_prime);
    return order;
}

} // namespace rsea

#endif // RSEA_VOTING_HPP
