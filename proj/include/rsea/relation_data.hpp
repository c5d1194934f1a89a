#ifndef RSEA_RELATION_DATA_HPP
#define RSEA_RELATION_DATA_HPP

// Turns evaluated solutions into labeled relation pairs under the C1/C2
// criteria: min-max normalization (prompt-local or corpus-global), fixed
// width decimal formatting, Good/Bad partitioning and label balancing.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rsea/errors.hpp"
#include "rsea/problems.hpp"
#include "rsea/types.hpp"

namespace rsea {

struct RelationPair {
    std::size_t first = 0;
    std::size_t second = 0;
    RelationLabel label = RelationLabel::Similar;
};

enum class ObjectiveMode { SOP, MOP };

/// Min-max scales every dimension over ctx + query jointly to [0,1].
/// A degenerate dimension (max == min) maps to 0.5 everywhere.
inline std::pair<std::vector<std::vector<double>>, std::vector<std::vector<double>>>
normalize_local(const std::vector<std::vector<double>>& ctx,
                const std::vector<std::vector<double>>& query) {
    if (ctx.empty() && query.empty()) throw DomainError("normalize_local: no vectors given");
    const std::size_t d = ctx.empty() ? query.front().size() : ctx.front().size();
    std::vector<double> mins(d, std::numeric_limits<double>::infinity());
    std::vector<double> maxs(d, -std::numeric_limits<double>::infinity());
    auto scan = [&](const std::vector<std::vector<double>>& set) {
        for (const auto& v : set) {
            if (v.size() != d) throw DomainError("normalize_local: inconsistent dimensions");
            for (std::size_t i = 0; i < d; ++i) {
                mins[i] = std::min(mins[i], v[i]);
                maxs[i] = std::max(maxs[i], v[i]);
            }
        }
    };
    scan(ctx);
    scan(query);
    auto apply = [&](const std::vector<std::vector<double>>& set) {
        std::vector<std::vector<double>> out;
        out.reserve(set.size());
        for (const auto& v : set) {
            std::vector<double> w(d);
            for (std::size_t i = 0; i < d; ++i)
                w[i] = maxs[i] > mins[i] ? (v[i] - mins[i]) / (maxs[i] - mins[i]) : 0.5;
            out.push_back(std::move(w));
        }
        return out;
    };
    return {apply(ctx), apply(query)};
}

/// Dimension-wise min-max statistics over a whole corpus. Applying them to a
/// vector outside the corpus range yields components outside [0,1]; values
/// are deliberately not clamped.
struct GlobalNormStats {
    std::vector<double> mins;
    std::vector<double> maxs;

    std::vector<double> apply(const std::vector<double>& v) const {
        if (v.size() != mins.size()) throw DomainError("global normalization: dimension mismatch");
        std::vector<double> w(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            w[i] = maxs[i] > mins[i] ? (v[i] - mins[i]) / (maxs[i] - mins[i]) : 0.5;
        return w;
    }
};

inline GlobalNormStats normalize_global(const std::vector<std::vector<double>>& corpus) {
    if (corpus.empty()) throw DomainError("normalize_global: empty corpus");
    const std::size_t d = corpus.front().size();
    GlobalNormStats stats;
    stats.mins.assign(d, std::numeric_limits<double>::infinity());
    stats.maxs.assign(d, -std::numeric_limits<double>::infinity());
    for (const auto& v : corpus) {
        if (v.size() != d) throw DomainError("normalize_global: inconsistent dimensions");
        for (std::size_t i = 0; i < d; ++i) {
            stats.mins[i] = std::min(stats.mins[i], v[i]);
            stats.maxs[i] = std::max(stats.maxs[i], v[i]);
        }
    }
    return stats;
}

/// Fixed-width decimal rendering with exactly beta digits after the point.
/// Uses the platform's round-to-nearest-even binary formatting, which keeps
/// prompts byte-stable across runs.
inline std::string round_scalar(double v, int beta) {
    if (beta < 1) throw DomainError("round_scalar: beta must be >= 1");
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", beta, v);
    std::string s(buf);
    if (s == "-0." + std::string(std::size_t(beta), '0')) s.erase(0, 1); // normalize -0
    return s;
}

inline std::vector<std::string> round_vector(const std::vector<double>& v, int beta) {
    std::vector<std::string> out;
    out.reserve(v.size());
    for (double c : v) out.push_back(round_scalar(c, beta));
    return out;
}

/// C1 label: +1 if the first fitness is better (smaller), -1 otherwise.
/// Ties go to the first argument.
inline RelationLabel label_c1(double f_i, double f_j) {
    if (std::isnan(f_i) || std::isnan(f_j)) throw DomainError("label_c1: NaN fitness");
    return f_i <= f_j ? RelationLabel::Better : RelationLabel::Worse;
}

/// C2 label from category tags: inter-class pairs get +/-1, intra-class 0.
inline RelationLabel label_c2(CategoryTag tag_i, CategoryTag tag_j) {
    if (tag_i == tag_j) return RelationLabel::Similar;
    return tag_i == CategoryTag::Good ? RelationLabel::Better : RelationLabel::Worse;
}

/// Good/Bad partition of an evaluated set. SOP: the ceil(k/2) smallest
/// fitness values are Good. MOP: Good is filled in nondominated-front order
/// (ties within a front by index) up to ceil(k/2).
inline std::vector<CategoryTag> partition_c2(const std::vector<std::vector<double>>& objs,
                                             ObjectiveMode mode) {
    const std::size_t k = objs.size();
    if (k < 2) throw DomainError("partition_c2: needs at least 2 solutions");
    const std::size_t n_good = (k + 1) / 2;
    std::vector<CategoryTag> tags(k, CategoryTag::Bad);
    if (mode == ObjectiveMode::SOP) {
        std::vector<std::size_t> order(k);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return objs[a][0] < objs[b][0]; });
        for (std::size_t r = 0; r < n_good; ++r) tags[order[r]] = CategoryTag::Good;
    } else {
        std::size_t filled = 0;
        for (const auto& front : nondominated_sort(objs)) {
            for (std::size_t idx : front) {
                if (filled >= n_good) return tags;
                tags[idx] = CategoryTag::Good;
                ++filled;
            }
        }
    }
    return tags;
}

inline std::vector<CategoryTag> partition_c2_solutions(const std::vector<Solution>& sols,
                                                       ObjectiveMode mode) {
    std::vector<std::vector<double>> objs;
    objs.reserve(sols.size());
    for (const auto& s : sols) {
        if (!s.evaluated()) throw DomainError("partition_c2: unevaluated solution");
        objs.push_back(s.f);
    }
    return partition_c2(objs, mode);
}

/// Ground-truth category of a candidate relative to an existing context:
/// the tag it would receive when partitioned together with the context.
inline CategoryTag tag_candidate(const std::vector<std::vector<double>>& ctx_objs,
                                 const std::vector<double>& candidate_obj, ObjectiveMode mode) {
    auto objs = ctx_objs;
    objs.push_back(candidate_obj);
    return partition_c2(objs, mode).back();
}

/// Random under-sampling so that inter-class pairs (+1 and -1, equalized
/// between themselves) match the intra-class (0) count. Kept pairs preserve
/// their input order; removal is uniform under the given seed.
inline std::vector<RelationPair> balance_labels(const std::vector<RelationPair>& pairs,
                                                std::uint64_t seed) {
    std::size_t n_pos = 0, n_neg = 0, n_zero = 0;
    for (const auto& p : pairs) {
        switch (p.label) {
        case RelationLabel::Better: ++n_pos; break;
        case RelationLabel::Worse: ++n_neg; break;
        case RelationLabel::Similar: ++n_zero; break;
        }
    }
    if (n_pos == 0) throw BalanceError("balance_labels: no +1 pairs present");
    if (n_neg == 0) throw BalanceError("balance_labels: no -1 pairs present");
    if (n_zero == 0) throw BalanceError("balance_labels: no 0 pairs present");

    const std::size_t pm = std::min({n_pos, n_neg, n_zero / 2});
    if (pm == 0) throw BalanceError("balance_labels: too few 0 pairs to balance");
    const std::size_t targets[3] = {pm, pm, 2 * pm}; // +1, -1, 0

    std::mt19937_64 rng(seed);
    auto pick = [&](RelationLabel lbl, std::size_t have, std::size_t want) {
        // indices (within pairs) of this class that survive
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < pairs.size(); ++i)
            if (pairs[i].label == lbl) idx.push_back(i);
        if (have > want) {
            std::shuffle(idx.begin(), idx.end(), rng);
            idx.resize(want);
            std::sort(idx.begin(), idx.end());
        }
        return idx;
    };
    auto keep_pos = pick(RelationLabel::Better, n_pos, targets[0]);
    auto keep_neg = pick(RelationLabel::Worse, n_neg, targets[1]);
    auto keep_zero = pick(RelationLabel::Similar, n_zero, targets[2]);

    std::vector<bool> keep(pairs.size(), false);
    for (std::size_t i : keep_pos) keep[i] = true;
    for (std::size_t i : keep_neg) keep[i] = true;
    for (std::size_t i : keep_zero) keep[i] = true;

    std::vector<RelationPair> out;
    out.reserve(targets[0] + targets[1] + targets[2]);
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (keep[i]) out.push_back(pairs[i]);
    return out;
}

} // namespace rsea

#endif // RSEA_RELATION_DATA_HPP
