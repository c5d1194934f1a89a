#ifndef RSEA_EVALKIT_HPP
#define RSEA_EVALKIT_HPP

// Offline relation-accuracy evaluation: static context/query populations
// sampled from GA trajectories at fixed stages, plus the performance
// indicators (element/binary/rank accuracy, Spearman's rho, IGD).
//
// Rank Acc is the exact-position match rate between the predicted and true
// rankings (both tie-broken by index). Spearman's rho measures the rank
// consistency between the vote-aggregated ordering and the ordering the
// voting would produce from ground-truth relations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsea/backends.hpp"
#include "rsea/errors.hpp"
#include "rsea/problems.hpp"
#include "rsea/prompting.hpp"
#include "rsea/relation_data.hpp"
#include "rsea/saea.hpp"
#include "rsea/types.hpp"
#include "rsea/voting.hpp"

namespace rsea {

struct OfflineInstance {
    std::string id;
    std::string problem_id;
    std::size_t stage = 0; // snapshot generation
    Criterion criterion = Criterion::C1;
    std::vector<std::vector<double>> ctx_x, query_x;
    std::vector<std::vector<double>> ctx_f, query_f; // ground truth, full objective vectors
    std::uint64_t seed = 0;

    std::size_t n() const { return ctx_x.size(); }
    std::size_t q() const { return query_x.size(); }
};

struct OfflineSuiteConfig {
    std::size_t ga_pop = 100;
    std::size_t dim = 5;
    std::size_t generations = 100;
    std::vector<std::size_t> stages = {10, 50, 90};
    std::size_t ctx_size = 30;
    std::size_t query_size = 30;
};

/// For each problem and stage: run a GA, then draw ctx_size parents as
/// context and query_size offspring as queries (seeded draw without
/// replacement). Instances carry full ground truth.
inline std::vector<OfflineInstance> build_offline_suite(const std::vector<std::string>& problem_ids,
                                                        const OfflineSuiteConfig& cfg,
                                                        Criterion criterion, std::uint64_t seed) {
    std::vector<OfflineInstance> suite;
    for (const auto& pid : problem_ids) {
        const Problem problem = make_problem(pid, cfg.dim);
        const std::uint64_t ga_seed = seed ^ fnv1a_hash(pid);
        auto snaps = run_plain_ga(problem, cfg.ga_pop, cfg.generations, cfg.stages, ga_seed);
        for (const auto& snap : snaps) {
            std::mt19937_64 rng(ga_seed ^ (snap.generation * 0x9e3779b97f4a7c15ull));
            auto draw = [&](const std::vector<Solution>& pool, std::size_t count) {
                std::vector<std::size_t> idx(pool.size());
                std::iota(idx.begin(), idx.end(), 0);
                std::shuffle(idx.begin(), idx.end(), rng);
                idx.resize(count);
                std::sort(idx.begin(), idx.end());
                return idx;
            };
            OfflineInstance inst;
            inst.problem_id = pid;
            inst.stage = snap.generation;
            inst.criterion = criterion;
            inst.seed = seed;
            inst.id = pid + "/gen" + std::to_string(snap.generation);
            std::replace(inst.id.begin(), inst.id.end(), '/', '_');
            for (std::size_t i : draw(snap.parents, cfg.ctx_size)) {
                inst.ctx_x.push_back(snap.parents[i].x);
                inst.ctx_f.push_back(snap.parents[i].f);
            }
            for (std::size_t i : draw(snap.offspring, cfg.query_size)) {
                inst.query_x.push_back(snap.offspring[i].x);
                inst.query_f.push_back(snap.offspring[i].f);
            }
            suite.push_back(std::move(inst));
        }
    }
    return suite;
}

/// Fraction of matching matrix entries.
inline double element_acc(const RelationMatrix& pred, const RelationMatrix& truth) {
    if (pred.n != truth.n || pred.q != truth.q) throw DomainError("element_acc: shape mismatch");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.entries.size(); ++i)
        if (pred.entries[i] == truth.entries[i]) ++hits;
    return double(hits) / double(pred.entries.size());
}

namespace detail {

/// Order of candidate indices: best first. Higher score is better, ties by
/// lower index.
inline std::vector<std::size_t> order_by_score(const std::vector<double>& scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

/// Lower fitness is better, ties by lower index.
inline std::vector<std::size_t> order_by_fitness(const std::vector<double>& f) {
    std::vector<std::size_t> order(f.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    return order;
}

/// Average (fractional) ranks, 1-based; tied values share their mean rank.
inline std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (double(i) + double(j)) / 2.0 + 1.0;
        for (std::size_t r = i; r <= j; ++r) ranks[order[r]] = avg;
        i = j + 1;
    }
    return ranks;
}

} // namespace detail

/// Accuracy of selecting the better half: overlap between the ceil(q/2)
/// highest-scored candidates and the ceil(q/2) truly best ones.
inline double binary_acc(const std::vector<double>& scores, const std::vector<double>& f_true) {
    if (scores.size() != f_true.size() || scores.empty())
        throw DomainError("binary_acc: size mismatch or empty");
    const std::size_t q = scores.size();
    const std::size_t half = (q + 1) / 2;
    auto pred = detail::order_by_score(scores);
    auto truth = detail::order_by_fitness(f_true);
    std::vector<bool> in_true(q, false);
    for (std::size_t r = 0; r < half; ++r) in_true[truth[r]] = true;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < half; ++r)
        if (in_true[pred[r]]) ++hits;
    return double(hits) / double(half);
}

/// Fraction of candidates with the same position in the predicted and true
/// rankings (both tie-broken by index).
inline double rank_acc(const std::vector<double>& scores, const std::vector<double>& f_true) {
    if (scores.size() != f_true.size() || scores.empty())
        throw DomainError("rank_acc: size mismatch or empty");
    auto pred = detail::order_by_score(scores);
    auto truth = detail::order_by_fitness(f_true);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < pred.size(); ++r)
        if (pred[r] == truth[r]) ++hits;
    return double(hits) / double(pred.size());
}

struct SpearmanResult {
    double rho = 0.0;
    bool degenerate = false; // zero rank variance on either side
};

/// Spearman rank correlation between a predicted score vector (higher is
/// better) and a true quality vector (lower is better), with average ranks
/// for ties. Degenerate inputs yield rho = 0 with a flag.
inline SpearmanResult spearman_rho(const std::vector<double>& scores,
                                   const std::vector<double>& f_true) {
    if (scores.size() != f_true.size() || scores.size() < 2)
        throw DomainError("spearman_rho: needs q >= 2 equal-length inputs");
    std::vector<double> neg_scores(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) neg_scores[i] = -scores[i];
    const auto ra = detail::average_ranks(neg_scores); // best candidate gets rank 1
    const auto rb = detail::average_ranks(f_true);
    if (ra == rb) {
        // exact agreement; also catches the all-tied degenerate case below
        double va = 0.0;
        const double mean0 = (double(ra.size()) + 1.0) / 2.0;
        for (double r : ra) va += (r - mean0) * (r - mean0);
        if (va > 0.0) return {1.0, false};
    }

    const double n = double(ra.size());
    const double mean = (n + 1.0) / 2.0;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        cov += (ra[i] - mean) * (rb[i] - mean);
        va += (ra[i] - mean) * (ra[i] - mean);
        vb += (rb[i] - mean) * (rb[i] - mean);
    }
    if (va <= 0.0 || vb <= 0.0) return {0.0, true};
    return {cov / std::sqrt(va * vb), false};
}

/// Inverted generational distance: mean over reference points of the
/// Euclidean distance to the nearest approximation point.
inline double igd(const std::vector<std::vector<double>>& approx,
                  const std::vector<std::vector<double>>& reference) {
    if (approx.empty() || reference.empty()) throw DomainError("igd: empty set");
    const std::size_t m = reference.front().size();
    double total = 0.0;
    for (const auto& r : reference) {
        if (r.size() != m) throw DomainError("igd: inconsistent objective counts");
        double best = std::numeric_limits<double>::infinity();
        for (const auto& a : approx) {
            if (a.size() != m) throw DomainError("igd: inconsistent objective counts");
            double d2 = 0.0;
            for (std::size_t i = 0; i < m; ++i) d2 += (a[i] - r[i]) * (a[i] - r[i]);
            best = std::min(best, d2);
        }
        total += std::sqrt(best);
    }
    return total / double(reference.size());
}

struct InstanceMetrics {
    std::string id;
    std::string problem_id;
    std::size_t stage = 0;
    double element = 0.0;
    double binary = 0.0;
    double rank = 0.0;
    double spearman = 0.0;
    bool spearman_degenerate = false;
    std::size_t fallback_rows = 0;
    bool failed = false;
    std::string error;
};

struct AggregateRow {
    std::string problem_id; // "all" for the overall row
    std::size_t stage = 0;  // 0 for the overall row
    std::string metric;
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t count = 0;
};

struct MetricReport {
    std::vector<InstanceMetrics> instances;
    std::vector<AggregateRow> aggregates;
    std::size_t failed_instances = 0;
};

/// True relation matrix and candidate quality of one offline instance, per
/// the C1/C2 labeling rules.
struct InstanceTruth {
    RelationMatrix matrix;
    std::vector<CategoryTag> ctx_tags;          // C2
    std::vector<double> query_quality;          // scalar quality, lower is better
    std::vector<GroundTruth> per_anchor;        // oracle backend input
};

inline InstanceTruth offline_truth(const OfflineInstance& inst, ObjectiveMode mode) {
    const std::size_t n = inst.n(), q = inst.q();
    InstanceTruth truth;
    truth.matrix = RelationMatrix::zeros(n, q);
    if (inst.criterion == Criterion::C1) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < q; ++k)
                truth.matrix.at(i, k) = label_c1(inst.ctx_f[i][0], inst.query_f[k][0]);
        for (std::size_t k = 0; k < q; ++k) truth.query_quality.push_back(inst.query_f[k][0]);
        truth.per_anchor.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            truth.per_anchor[i].anchor_fitness = inst.ctx_f[i][0];
            for (std::size_t k = 0; k < q; ++k)
                truth.per_anchor[i].candidate_fitness.push_back(inst.query_f[k][0]);
        }
    } else {
        truth.ctx_tags = partition_c2(inst.ctx_f, mode);
        std::vector<CategoryTag> cand_tags;
        for (const auto& qf : inst.query_f) cand_tags.push_back(tag_candidate(inst.ctx_f, qf, mode));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < q; ++k)
                truth.matrix.at(i, k) = label_c2(truth.ctx_tags[i], cand_tags[k]);
        truth.matrix.anchor_tags = truth.ctx_tags;
        for (std::size_t k = 0; k < q; ++k)
            truth.query_quality.push_back(mode == ObjectiveMode::SOP ? inst.query_f[k][0]
                                          : (cand_tags[k] == CategoryTag::Good ? 0.0 : 1.0));
        truth.per_anchor.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            truth.per_anchor[i].anchor_tag = truth.ctx_tags[i];
            truth.per_anchor[i].candidate_tags = cand_tags;
        }
    }
    return truth;
}

/// Runs the full pipeline (normalize, prompt, infer, vote, metrics) on one
/// instance.
inline InstanceMetrics evaluate_instance(const OfflineInstance& inst, RelationBackend& backend,
                                         int beta = 5, std::size_t concurrency = 1,
                                         RecordSink sink = nullptr) {
    InstanceMetrics m;
    m.id = inst.id;
    m.problem_id = inst.problem_id;
    m.stage = inst.stage;
    const ObjectiveMode mode =
        inst.ctx_f.front().size() > 1 ? ObjectiveMode::MOP : ObjectiveMode::SOP;
    try {
        const auto truth = offline_truth(inst, mode);

        auto [ctx_norm, query_norm] = normalize_local(inst.ctx_x, inst.query_x);
        LabeledContext lctx;
        for (const auto& v : ctx_norm) lctx.texts.push_back(format_vector(round_vector(v, beta)));
        if (inst.criterion == Criterion::C1)
            for (const auto& f : inst.ctx_f) lctx.fitness.push_back(f[0]);
        else
            lctx.tags = truth.ctx_tags;
        std::vector<std::string> query_texts;
        for (const auto& v : query_norm) query_texts.push_back(format_vector(round_vector(v, beta)));

        auto instances = build_anchor_prompts(lctx, std::move(query_texts), inst.criterion);
        auto inferred = infer_all(backend, instances, &truth.per_anchor, concurrency, sink);
        if (inst.criterion == Criterion::C2) inferred.matrix.anchor_tags = truth.ctx_tags;
        m.fallback_rows = inferred.fallback_rows;

        const auto scores = inst.criterion == Criterion::C1 ? score_c1(inferred.matrix)
                                                            : score_c2(inferred.matrix);
        const auto true_scores = inst.criterion == Criterion::C1 ? score_c1(truth.matrix)
                                                                 : score_c2(truth.matrix);
        m.element = element_acc(inferred.matrix, truth.matrix);
        m.binary = binary_acc(scores.values, truth.query_quality);
        m.rank = rank_acc(scores.values, truth.query_quality);
        // Rank consistency against the ground-truth vote ordering.
        std::vector<double> true_quality(true_scores.values.size());
        for (std::size_t k = 0; k < true_quality.size(); ++k) true_quality[k] = -true_scores.values[k];
        const auto rho = spearman_rho(scores.values, true_quality);
        m.spearman = rho.rho;
        m.spearman_degenerate = rho.degenerate;
    } catch (const std::exception& e) {
        m.failed = true;
        m.error = e.what();
    }
    return m;
}

/// Evaluates every instance and aggregates mean +/- std per (problem, stage)
/// and overall. Hard-failed instances are counted and skipped in aggregates.
inline MetricReport evaluate_backend(const std::vector<OfflineInstance>& suite,
                                     RelationBackend& backend, int beta = 5,
                                     std::size_t concurrency = 1, RecordSink sink = nullptr) {
    MetricReport report;
    for (const auto& inst : suite) {
        auto m = evaluate_instance(inst, backend, beta, concurrency, sink);
        if (m.failed) ++report.failed_instances;
        report.instances.push_back(std::move(m));
    }

    auto aggregate = [&](const std::string& problem, std::size_t stage) {
        const char* names[4] = {"element_acc", "binary_acc", "rank_acc", "spearman_rho"};
        std::vector<std::vector<double>> vals(4);
        for (const auto& m : report.instances) {
            if (m.failed) continue;
            if (!problem.empty() && m.problem_id != problem) continue;
            if (stage != 0 && m.stage != stage) continue;
            vals[0].push_back(m.element);
            vals[1].push_back(m.binary);
            vals[2].push_back(m.rank);
            vals[3].push_back(m.spearman);
        }
        for (int i = 0; i < 4; ++i) {
            if (vals[i].empty()) continue;
            const double n = double(vals[i].size());
            const double mean = std::accumulate(vals[i].begin(), vals[i].end(), 0.0) / n;
            double var = 0.0;
            for (double v : vals[i]) var += (v - mean) * (v - mean);
            AggregateRow row;
            row.problem_id = problem.empty() ? "all" : problem;
            row.stage = stage;
            row.metric = names[i];
            row.mean = mean;
            row.stddev = std::sqrt(var / n);
            row.count = vals[i].size();
            report.aggregates.push_back(std::move(row));
        }
    };

    std::vector<std::pair<std::string, std::size_t>> keys;
    for (const auto& m : report.instances) {
        const auto key = std::make_pair(m.problem_id, m.stage);
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
    std::sort(keys.begin(), keys.end());
    for (const auto& [problem, stage] : keys) aggregate(problem, stage);
    aggregate("", 0); // overall
    return report;
}

// --- suite serialization (JSONL, one instance per line) ---

inline constexpr const char* kSuiteSchemaVersion = "rsea.offline-suite.v1";

inline void save_offline_suite(const std::vector<OfflineInstance>& suite, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    for (const auto& inst : suite) {
        nlohmann::json j = {
            {"schema_version", kSuiteSchemaVersion},
            {"id", inst.id},
            {"problem", inst.problem_id},
            {"stage", inst.stage},
            {"criterion", criterion_name(inst.criterion)},
            {"seed", inst.seed},
            {"ctx_x", inst.ctx_x},
            {"ctx_f", inst.ctx_f},
            {"query_x", inst.query_x},
            {"query_f", inst.query_f},
        };
        os << j.dump() << "\n";
    }
}

inline std::vector<OfflineInstance> load_offline_suite(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    std::vector<OfflineInstance> suite;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw IoError(path + ": malformed JSON on line " + std::to_string(line_no));
        if (j.value("schema_version", "") != kSuiteSchemaVersion)
            throw IoError(path + ": unsupported schema version on line " + std::to_string(line_no));
        OfflineInstance inst;
        inst.id = j.at("id").get<std::string>();
        inst.problem_id = j.at("problem").get<std::string>();
        inst.stage = j.at("stage").get<std::size_t>();
        inst.criterion = criterion_from_name(j.at("criterion").get<std::string>());
        inst.seed = j.at("seed").get<std::uint64_t>();
        inst.ctx_x = j.at("ctx_x").get<std::vector<std::vector<double>>>();
        inst.ctx_f = j.at("ctx_f").get<std::vector<std::vector<double>>>();
        inst.query_x = j.at("query_x").get<std::vector<std::vector<double>>>();
        inst.query_f = j.at("query_f").get<std::vector<std::vector<double>>>();
        suite.push_back(std::move(inst));
    }
    return suite;
}

} // namespace rsea

#endif // RSEA_EVALKIT_HPP
