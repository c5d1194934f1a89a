#ifndef RSEA_PROMPTING_HPP
#define RSEA_PROMPTING_HPP

// Anchor-based prompt construction: for each of the n context solutions one
// prompt is built that pairs the anchor with the other n-1 context solutions
// (labeled examples) and with each of the q candidates (unlabeled queries).
// Also renders prompts from a versioned template and parses model responses.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsea/errors.hpp"
#include "rsea/relation_data.hpp"
#include "rsea/types.hpp"

namespace rsea {

inline std::uint64_t fnv1a_hash(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string fnv1a_hex(const std::string& s) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a_hash(s)));
    return buf;
}

/// One anchor's prompt: n-1 labeled example pairs plus q query pairs. The
/// anchor is always the first element of every pair. Formatted coordinate
/// texts are shared between the n instances of one inference round.
struct PromptInstance {
    std::size_t anchor = 0; // index into *ctx_text
    Criterion criterion = Criterion::C1;
    std::string template_version = "v1";
    std::shared_ptr<const std::vector<std::string>> ctx_text;   // n formatted vectors
    std::shared_ptr<const std::vector<std::string>> query_text; // q formatted vectors
    // Labels of (anchor, ctx[j]) for j != anchor, in ascending j order.
    std::vector<RelationLabel> example_labels;

    std::size_t n() const { return ctx_text->size(); }
    std::size_t q() const { return query_text->size(); }
};

struct FormatViolation {
    // one of: not-json | wrong-count | bad-label | bad-key
    std::string reason;
};

struct ParsedResponse {
    std::optional<std::vector<RelationLabel>> labels;
    std::optional<FormatViolation> failure;

    bool ok() const { return labels.has_value(); }
};

/// Renders a decision vector as "[c1, c2, ...]" from pre-rounded components.
inline std::string format_vector(const std::vector<std::string>& components) {
    std::string out = "[";
    for (std::size_t i = 0; i < components.size(); ++i) {
        if (i) out += ", ";
        out += components[i];
    }
    out += "]";
    return out;
}

/// Context for prompt construction: formatted vector texts plus either the
/// true fitness values (C1) or category tags (C2) used to label examples.
struct LabeledContext {
    std::vector<std::string> texts;
    std::vector<double> fitness;     // C1
    std::vector<CategoryTag> tags;   // C2
};

/// Builds the n anchor prompts over a labeled context of size n and a query
/// set of size q. Every instance carries n-1 labeled example pairs and q
/// query pairs; the union over instances yields n*q query pairs.
inline std::vector<PromptInstance> build_anchor_prompts(const LabeledContext& ctx,
                                                        std::vector<std::string> query_texts,
                                                        Criterion criterion,
                                                        const std::string& template_version = "v1") {
    const std::size_t n = ctx.texts.size();
    const std::size_t q = query_texts.size();
    if (n < 2) throw DomainError("build_anchor_prompts: need at least 2 context solutions");
    if (q < 1) throw DomainError("build_anchor_prompts: need at least 1 query");
    if (criterion == Criterion::C1 && ctx.fitness.size() != n)
        throw DomainError("build_anchor_prompts: C1 context must carry fitness");
    if (criterion == Criterion::C2 && ctx.tags.size() != n)
        throw DomainError("build_anchor_prompts: C2 context must carry category tags");

    auto ctx_text = std::make_shared<const std::vector<std::string>>(ctx.texts);
    auto query_text = std::make_shared<const std::vector<std::string>>(std::move(query_texts));

    std::vector<PromptInstance> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        PromptInstance inst;
        inst.anchor = i;
        inst.criterion = criterion;
        inst.template_version = template_version;
        inst.ctx_text = ctx_text;
        inst.query_text = query_text;
        inst.example_labels.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            inst.example_labels.push_back(criterion == Criterion::C1
                                              ? label_c1(ctx.fitness[i], ctx.fitness[j])
                                              : label_c2(ctx.tags[i], ctx.tags[j]));
        }
        out.push_back(std::move(inst));
    }
    return out;
}

namespace detail {

inline const char* template_v1_header() {
    return "You compare pairs of solution vectors for a minimization task.\n"
           "Each pair is written as first=<vector>, second=<vector>.\n";
}

inline std::string template_v1_legend(Criterion c) {
    if (c == Criterion::C1)
        return "Label +1 means the first solution is better than the second; "
               "label -1 means the first solution is worse than the second.\n";
    return "Label +1 means the first solution is in a better quality category than the second; "
           "label -1 means it is in a worse category; "
           "label 0 means both solutions fall into the same category (similar).\n";
}

inline std::string template_v1_directive(Criterion c, std::size_t q) {
    std::ostringstream os;
    os << "Answer with a single JSON object that maps each query index (\"1\" to \"" << q
       << "\") to its predicted label. ";
    if (c == Criterion::C1)
        os << "Allowed labels: 1 and -1. Example: {\"1\": 1, \"2\": -1}. ";
    else
        os << "Allowed labels: 1, 0 and -1. Example: {\"1\": 0, \"2\": -1}. ";
    os << "Output only the JSON object, nothing else.\n";
    return os.str();
}

} // namespace detail

/// Deterministic text rendering of one prompt instance. Only template
/// version "v1" is currently registered.
inline std::string render_prompt(const PromptInstance& inst) {
    if (inst.template_version != "v1")
        throw ConfigError("render_prompt: unknown template version " + inst.template_version);

    std::ostringstream os;
    os << detail::template_v1_header();
    os << detail::template_v1_legend(inst.criterion);
    os << "\nLabeled examples:\n";
    const auto& ctx = *inst.ctx_text;
    std::size_t e = 0;
    for (std::size_t j = 0; j < ctx.size(); ++j) {
        if (j == inst.anchor) continue;
        os << "example " << (e + 1) << ": first=" << ctx[inst.anchor] << ", second=" << ctx[j]
           << ", label=" << label_value(inst.example_labels[e]) << "\n";
        ++e;
    }
    os << "\nQuery pairs:\n";
    const auto& query = *inst.query_text;
    for (std::size_t k = 0; k < query.size(); ++k)
        os << "query " << (k + 1) << ": first=" << ctx[inst.anchor] << ", second=" << query[k] << "\n";
    os << "\n" << detail::template_v1_directive(inst.criterion, query.size());
    return os.str();
}

/// Hash identifying the rendered template family, recorded in run manifests.
inline std::string template_hash(const std::string& version = "v1") {
    if (version != "v1") throw ConfigError("unknown template version " + version);
    std::string text = detail::template_v1_header();
    text += detail::template_v1_legend(Criterion::C1);
    text += detail::template_v1_legend(Criterion::C2);
    text += detail::template_v1_directive(Criterion::C1, 0);
    text += detail::template_v1_directive(Criterion::C2, 0);
    return fnv1a_hex(text);
}

namespace detail {

/// First balanced JSON object embedded in free text, or nullopt.
inline std::optional<std::string> extract_json_object(const std::string& text) {
    const auto start = text.find('{');
    if (start == std::string::npos) return std::nullopt;
    int depth = 0;
    bool in_string = false, escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}') {
            if (--depth == 0) return text.substr(start, i - start + 1);
        }
    }
    return std::nullopt;
}

inline std::optional<int> parse_label_token(const nlohmann::json& v) {
    if (v.is_number_integer()) {
        const long long x = v.get<long long>();
        if (x == 1 || x == 0 || x == -1) return int(x);
        return std::nullopt;
    }
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "1" || s == "+1") return 1;
        if (s == "0") return 0;
        if (s == "-1") return -1;
    }
    return std::nullopt;
}

} // namespace detail

/// Lenient parse of a raw model response: extracts the first balanced JSON
/// object and validates it against the expected query count and criterion
/// alphabet. Failures are values, not exceptions.
inline ParsedResponse parse_response(const std::string& text, std::size_t q, Criterion criterion) {
    auto fail = [](std::string reason) {
        ParsedResponse r;
        r.failure = FormatViolation{std::move(reason)};
        return r;
    };

    const auto body = detail::extract_json_object(text);
    if (!body) return fail("not-json");
    nlohmann::json j = nlohmann::json::parse(*body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return fail("not-json");
    if (j.size() != q) return fail("wrong-count");

    std::vector<RelationLabel> labels(q);
    std::vector<bool> seen(q, false);
    for (const auto& [key, value] : j.items()) {
        std::size_t idx = 0;
        try {
            std::size_t pos = 0;
            const long long k = std::stoll(key, &pos);
            if (pos != key.size() || k < 1 || std::size_t(k) > q) return fail("bad-key");
            idx = std::size_t(k) - 1;
        } catch (const std::exception&) {
            return fail("bad-key");
        }
        if (seen[idx]) return fail("bad-key");
        seen[idx] = true;
        const auto lbl = detail::parse_label_token(value);
        if (!lbl) return fail("bad-label");
        if (criterion == Criterion::C1 && *lbl == 0) return fail("bad-label");
        labels[idx] = label_from_int(*lbl);
    }
    ParsedResponse r;
    r.labels = std::move(labels);
    return r;
}

/// Serializes a label list into the response format the prompts request.
inline std::string serialize_labels(const std::vector<RelationLabel>& labels) {
    std::string out = "{";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i) out += ", ";
        out += "\"" + std::to_string(i + 1) + "\": " + std::to_string(label_value(labels[i]));
    }
    out += "}";
    return out;
}

} // namespace rsea

#endif // RSEA_PROMPTING_HPP
