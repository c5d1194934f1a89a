#ifndef RSEA_TYPES_HPP
#define RSEA_TYPES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rsea/errors.hpp"

namespace rsea {

/// Pairwise relation label. +1: first solution better, -1: first worse,
/// 0: same quality category (ternary criterion only).
enum class RelationLabel : int {
    Better = +1,
    Similar = 0,
    Worse = -1,
};

inline int label_value(RelationLabel l) { return static_cast<int>(l); }

inline RelationLabel label_from_int(int v) {
    switch (v) {
    case +1: return RelationLabel::Better;
    case 0: return RelationLabel::Similar;
    case -1: return RelationLabel::Worse;
    default: throw DomainError("relation label must be one of {-1, 0, +1}, got " + std::to_string(v));
    }
}

enum class CategoryTag { Good, Bad };

/// C1: binary labels from direct fitness comparison.
/// C2: ternary labels from a Good/Bad category partition.
enum class Criterion { C1, C2 };

inline std::string criterion_name(Criterion c) { return c == Criterion::C1 ? "C1" : "C2"; }

inline Criterion criterion_from_name(const std::string& s) {
    if (s == "C1" || s == "c1") return Criterion::C1;
    if (s == "C2" || s == "c2") return Criterion::C2;
    throw ConfigError("unknown criterion: " + s);
}

/// An evaluated (or not yet evaluated) point in decision space.
/// f stays empty until the point is truly evaluated; eval_id is the
/// monotone evaluation counter assigned at that moment.
struct Solution {
    std::vector<double> x;
    std::vector<double> f;
    std::uint64_t eval_id = 0;

    bool evaluated() const { return !f.empty(); }
};

} // namespace rsea

#endif // RSEA_TYPES_HPP
