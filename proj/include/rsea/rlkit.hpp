#ifndef RSEA_RLKIT_HPP
#define RSEA_RLKIT_HPP

// RL-dataset construction from evolutionary trajectories, the rule-based
// reward (format penalty, label accuracy, diversity discount) and the
// group-normalized advantage. Policy-gradient training itself is out of
// scope; this kit produces and scores the data a trainer consumes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsea/errors.hpp"
#include "rsea/problems.hpp"
#include "rsea/prompting.hpp"
#include "rsea/relation_data.hpp"
#include "rsea/saea.hpp"
#include "rsea/types.hpp"

namespace rsea {

struct RLInstance {
    std::string id;
    Criterion criterion = Criterion::C1;
    std::string prompt;
    std::size_t q = 0;
    std::vector<RelationLabel> truth;
    // provenance
    std::string problem_id;
    std::size_t generation = 0;
    std::size_t anchor = 0;
    std::uint64_t seed = 0;
};

struct RewardParams {
    double format_penalty = -0.2;
    double diversity_discount = 0.8;
    double dominance_threshold = 0.9; // strict: share must exceed it
    std::size_t group_size = 8;
    double epsilon = 1e-8;
};

/// Rule-based reward of a raw response against ground-truth labels:
/// invalid format -> format_penalty; otherwise lambda * N_correct / q where
/// lambda is the diversity discount when one label's share of the response
/// strictly exceeds the dominance threshold.
inline double reward(const std::string& response_text, const std::vector<RelationLabel>& truth,
                     std::size_t q, Criterion criterion, const RewardParams& params = {}) {
    if (truth.size() != q) throw DomainError("reward: truth length must equal q");
    auto parsed = parse_response(response_text, q, criterion);
    if (!parsed.ok()) return params.format_penalty;
    const auto& labels = *parsed.labels;

    std::size_t correct = 0;
    std::size_t counts[3] = {0, 0, 0}; // -1, 0, +1
    for (std::size_t k = 0; k < q; ++k) {
        if (labels[k] == truth[k]) ++correct;
        ++counts[label_value(labels[k]) + 1];
    }
    const std::size_t max_count = *std::max_element(counts, counts + 3);
    const double share = double(max_count) / double(q);
    const double lambda = share > params.dominance_threshold ? params.diversity_discount : 1.0;
    return lambda * double(correct) / double(q);
}

/// Group-normalized advantages: (r_g - mean) / (population std + epsilon).
inline std::vector<double> group_advantage(const std::vector<double>& rewards, double epsilon = 1e-8) {
    if (rewards.size() < 2) throw DomainError("group_advantage: needs G >= 2");
    const double n = double(rewards.size());
    const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    const double stddev = std::sqrt(var / n);
    std::vector<double> adv(rewards.size());
    for (std::size_t g = 0; g < rewards.size(); ++g) adv[g] = (rewards[g] - mean) / (stddev + epsilon);
    return adv;
}

struct RLDatasetConfig {
    std::size_t ga_pop = 100;
    std::size_t generations = 100;
    std::vector<std::size_t> snapshot_gens = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
    std::size_t subsample = 30;
    int beta_decimals = 5;
};

/// Builds RL instances from GA trajectories: at every snapshot, subsample 30
/// parents as context and 30 offspring as queries, normalize locally, build
/// the anchor prompts and attach ground-truth labels. One instance per anchor.
inline std::vector<RLInstance> gen_rl_dataset(const std::vector<std::string>& problem_ids,
                                              std::size_t dim, const RLDatasetConfig& cfg,
                                              Criterion criterion, std::uint64_t seed) {
    const ObjectiveMode mode = ObjectiveMode::SOP;
    std::vector<RLInstance> dataset;
    for (const auto& pid : problem_ids) {
        const Problem problem = make_problem(pid, dim);
        const std::uint64_t ga_seed = seed ^ fnv1a_hash(pid);
        auto snaps = run_plain_ga(problem, cfg.ga_pop, cfg.generations, cfg.snapshot_gens, ga_seed);
        for (const auto& snap : snaps) {
            std::mt19937_64 rng(ga_seed ^ (snap.generation * 0x9e3779b97f4a7c15ull));
            auto subsample = [&](const std::vector<Solution>& pool) {
                std::vector<std::size_t> idx(pool.size());
                std::iota(idx.begin(), idx.end(), 0);
                std::shuffle(idx.begin(), idx.end(), rng);
                idx.resize(std::min(cfg.subsample, pool.size()));
                std::sort(idx.begin(), idx.end());
                std::vector<Solution> out;
                for (std::size_t i : idx) out.push_back(pool[i]);
                return out;
            };
            const auto ctx = subsample(snap.parents);
            const auto query = subsample(snap.offspring);

            std::vector<std::vector<double>> ctx_x, query_x, ctx_f;
            for (const auto& s : ctx) {
                ctx_x.push_back(s.x);
                ctx_f.push_back(s.f);
            }
            for (const auto& s : query) query_x.push_back(s.x);
            auto [ctx_norm, query_norm] = normalize_local(ctx_x, query_x);

            LabeledContext lctx;
            for (const auto& v : ctx_norm)
                lctx.texts.push_back(format_vector(round_vector(v, cfg.beta_decimals)));
            std::vector<std::string> query_texts;
            for (const auto& v : query_norm)
                query_texts.push_back(format_vector(round_vector(v, cfg.beta_decimals)));

            std::vector<CategoryTag> ctx_tags, cand_tags;
            if (criterion == Criterion::C1) {
                for (const auto& s : ctx) lctx.fitness.push_back(s.f[0]);
            } else {
                ctx_tags = partition_c2(ctx_f, mode);
                lctx.tags = ctx_tags;
                for (const auto& s : query) cand_tags.push_back(tag_candidate(ctx_f, s.f, mode));
            }

            auto instances = build_anchor_prompts(lctx, std::move(query_texts), criterion);
            for (const auto& inst : instances) {
                RLInstance ri;
                ri.criterion = criterion;
                ri.q = inst.q();
                ri.problem_id = pid;
                ri.generation = snap.generation;
                ri.anchor = inst.anchor;
                ri.seed = seed;
                ri.id = pid + "/gen" + std::to_string(snap.generation) + "/anchor" +
                        std::to_string(inst.anchor) + "/" + criterion_name(criterion);
                std::replace(ri.id.begin(), ri.id.end(), '/', '_');
                ri.prompt = render_prompt(inst);
                ri.truth.reserve(ri.q);
                for (std::size_t k = 0; k < ri.q; ++k)
                    ri.truth.push_back(criterion == Criterion::C1
                                           ? label_c1(ctx[inst.anchor].f[0], query[k].f[0])
                                           : label_c2(ctx_tags[inst.anchor], cand_tags[k]));
                dataset.push_back(std::move(ri));
            }
        }
    }
    return dataset;
}

// --- dataset / response files (JSONL) ---

inline constexpr const char* kRLDatasetSchemaVersion = "rsea.rl-dataset.v1";

inline void save_rl_dataset(const std::vector<RLInstance>& dataset, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    for (const auto& inst : dataset) {
        std::vector<int> truth;
        for (auto l : inst.truth) truth.push_back(label_value(l));
        nlohmann::json j = {
            {"schema_version", kRLDatasetSchemaVersion},
            {"id", inst.id},
            {"criterion", criterion_name(inst.criterion)},
            {"prompt", inst.prompt},
            {"q", inst.q},
            {"truth", truth},
            {"provenance",
             {{"problem", inst.problem_id},
              {"generation", inst.generation},
              {"anchor", inst.anchor},
              {"seed", inst.seed}}},
        };
        os << j.dump() << "\n";
    }
}

inline std::vector<RLInstance> load_rl_dataset(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    std::vector<RLInstance> dataset;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw IoError(path + ": malformed JSON on line " + std::to_string(line_no));
        if (j.value("schema_version", "") != kRLDatasetSchemaVersion)
            throw IoError(path + ": unsupported schema version on line " + std::to_string(line_no));
        RLInstance inst;
        inst.id = j.at("id").get<std::string>();
        inst.criterion = criterion_from_name(j.at("criterion").get<std::string>());
        inst.prompt = j.at("prompt").get<std::string>();
        inst.q = j.at("q").get<std::size_t>();
        for (int v : j.at("truth").get<std::vector<int>>()) inst.truth.push_back(label_from_int(v));
        const auto& prov = j.at("provenance");
        inst.problem_id = prov.at("problem").get<std::string>();
        inst.generation = prov.at("generation").get<std::size_t>();
        inst.anchor = prov.at("anchor").get<std::size_t>();
        inst.seed = prov.at("seed").get<std::uint64_t>();
        dataset.push_back(std::move(inst));
    }
    return dataset;
}

struct ScoredResponse {
    std::string id;
    double reward = 0.0;
    bool format_violation = false;
};

struct ScoreSummary {
    std::vector<ScoredResponse> scored;
    std::vector<std::string> unmatched_ids; // response ids with no dataset instance
    std::size_t instances_without_response = 0;
    double mean_reward = 0.0;
    double stddev_reward = 0.0;
    double violation_rate = 0.0;
};

/// Scores a response file ({id, text} per line) against a dataset file.
inline ScoreSummary score_response_file(const std::string& dataset_path,
                                        const std::string& responses_path,
                                        const RewardParams& params = {}) {
    const auto dataset = load_rl_dataset(dataset_path);
    std::ifstream is(responses_path);
    if (!is) throw IoError("cannot open " + responses_path);

    ScoreSummary summary;
    std::vector<bool> matched(dataset.size(), false);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j.contains("text"))
            throw IoError(responses_path + ": malformed response on line " + std::to_string(line_no));
        const std::string id = j.at("id").get<std::string>();
        const std::string text = j.at("text").get<std::string>();
        const auto it = std::find_if(dataset.begin(), dataset.end(),
                                     [&](const RLInstance& d) { return d.id == id; });
        if (it == dataset.end()) {
            summary.unmatched_ids.push_back(id);
            continue;
        }
        matched[std::size_t(it - dataset.begin())] = true;
        ScoredResponse sr;
        sr.id = id;
        sr.reward = reward(text, it->truth, it->q, it->criterion, params);
        sr.format_violation = sr.reward == params.format_penalty &&
                              !parse_response(text, it->q, it->criterion).ok();
        summary.scored.push_back(std::move(sr));
    }
    summary.instances_without_response =
        std::size_t(std::count(matched.begin(), matched.end(), false));
    if (!summary.scored.empty()) {
        const double n = double(summary.scored.size());
        double sum = 0.0, viol = 0.0;
        for (const auto& s : summary.scored) {
            sum += s.reward;
            viol += s.format_violation ? 1.0 : 0.0;
        }
        summary.mean_reward = sum / n;
        double var = 0.0;
        for (const auto& s : summary.scored)
            var += (s.reward - summary.mean_reward) * (s.reward - summary.mean_reward);
        summary.stddev_reward = std::sqrt(var / n);
        summary.violation_rate = viol / n;
    }
    return summary;
}

} // namespace rsea

#endif // RSEA_RLKIT_HPP
