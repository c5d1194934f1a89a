#ifndef RSEA_SAEA_HPP
#define RSEA_SAEA_HPP

// The surrogate-assisted evolutionary loop: Latin hypercube initialization,
// SBX + polynomial mutation reproduction, anchor-prompt surrogate screening
// of offspring, top-N' true evaluation and (mu+lambda) environmental
// selection (fitness for SOP, nondominated sorting + crowding for MOP).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rsea/backends.hpp"
#include "rsea/errors.hpp"
#include "rsea/problems.hpp"
#include "rsea/prompting.hpp"
#include "rsea/relation_data.hpp"
#include "rsea/types.hpp"
#include "rsea/voting.hpp"

namespace rsea {

struct OperatorParams {
    double crossover_prob = 1.0;
    double eta_crossover = 15.0;
    double mutation_prob = -1.0; // < 0 means 1/D
    double eta_mutation = 20.0;
};

struct RunConfig {
    std::string problem_id = "lzg/ackley";
    std::size_t dim = 5;
    std::size_t n_obj = 1;
    std::size_t max_fes = 300;
    std::size_t pop_size = 30;      // N
    std::size_t eval_size = 3;      // N'
    std::size_t context_cap = 30;   // tau
    std::optional<Criterion> criterion; // default: C1 for SOP, C2 for MOP
    int beta_decimals = 5;
    OperatorParams operators;
    BackendConfig backend;
    std::uint64_t seed = 1;

    ObjectiveMode mode() const { return n_obj > 1 ? ObjectiveMode::MOP : ObjectiveMode::SOP; }
    Criterion effective_criterion() const {
        if (criterion) return *criterion;
        return mode() == ObjectiveMode::SOP ? Criterion::C1 : Criterion::C2;
    }
};

struct GenerationRecord {
    std::size_t generation = 0;
    std::size_t used_fes_after = 0;
    std::size_t selected = 0;
    std::size_t fallback_rows = 0;
    double best_score = 0.0;
    double worst_score = 0.0;
};

struct RunResult {
    ObjectiveMode mode = ObjectiveMode::SOP;
    std::vector<Solution> archive;        // evaluation order, |archive| == used_fes
    std::vector<double> best_so_far;      // SOP, indexed by used_fes (1-based position)
    std::vector<Solution> nondominated;   // MOP final nondominated set
    std::vector<GenerationRecord> generations;
    std::size_t used_fes = 0;
};

/// Latin hypercube sample: per dimension, each of n equal-width bins holds
/// exactly one coordinate, uniformly placed within its bin.
inline std::vector<std::vector<double>> latin_hypercube(std::size_t n, const std::vector<double>& lower,
                                                        const std::vector<double>& upper,
                                                        std::mt19937_64& rng) {
    const std::size_t d = lower.size();
    std::vector<std::vector<double>> points(n, std::vector<double>(d));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::size_t> bins(n);
    for (std::size_t j = 0; j < d; ++j) {
        std::iota(bins.begin(), bins.end(), 0);
        std::shuffle(bins.begin(), bins.end(), rng);
        const double width = (upper[j] - lower[j]) / double(n);
        for (std::size_t i = 0; i < n; ++i)
            points[i][j] = lower[j] + (double(bins[i]) + unit(rng)) * width;
    }
    return points;
}

namespace detail {

inline double clamp_to(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

/// Deb's simulated binary crossover for one variable pair.
inline void sbx_variable(double& a, double& b, double lo, double hi, double eta,
                         std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (std::fabs(a - b) < 1e-14) return;
    double y1 = std::min(a, b), y2 = std::max(a, b);
    const double u = unit(rng);
    auto spread = [&](double beta_q_base) {
        const double beta = 1.0 + 2.0 * beta_q_base / (y2 - y1);
        const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
        return u <= 1.0 / alpha ? std::pow(u * alpha, 1.0 / (eta + 1.0))
                                : std::pow(1.0 / (2.0 - u * alpha), 1.0 / (eta + 1.0));
    };
    const double beta_q1 = spread(y1 - lo);
    double c1 = 0.5 * (y1 + y2 - beta_q1 * (y2 - y1));
    const double beta_q2 = spread(hi - y2);
    double c2 = 0.5 * (y1 + y2 + beta_q2 * (y2 - y1));
    c1 = clamp_to(c1, lo, hi);
    c2 = clamp_to(c2, lo, hi);
    if (unit(rng) < 0.5) std::swap(c1, c2);
    a = c1;
    b = c2;
}

inline void polynomial_mutate(std::vector<double>& x, const std::vector<double>& lower,
                              const std::vector<double>& upper, double prob, double eta,
                              std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (unit(rng) >= prob) continue;
        const double lo = lower[j], hi = upper[j];
        const double y = x[j];
        const double delta1 = (y - lo) / (hi - lo);
        const double delta2 = (hi - y) / (hi - lo);
        const double u = unit(rng);
        const double mut_pow = 1.0 / (eta + 1.0);
        double delta_q;
        if (u < 0.5) {
            const double xy = 1.0 - delta1;
            const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(xy, eta + 1.0);
            delta_q = std::pow(val, mut_pow) - 1.0;
        } else {
            const double xy = 1.0 - delta2;
            const double val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(xy, eta + 1.0);
            delta_q = 1.0 - std::pow(val, mut_pow);
        }
        x[j] = clamp_to(y + delta_q * (hi - lo), lo, hi);
    }
}

/// Crowding distance of each member of one front (objective-vector list).
inline std::vector<double> crowding_distance(const std::vector<std::vector<double>>& objs) {
    const std::size_t n = objs.size();
    std::vector<double> dist(n, 0.0);
    if (n <= 2) {
        dist.assign(n, std::numeric_limits<double>::infinity());
        return dist;
    }
    const std::size_t m = objs.front().size();
    std::vector<std::size_t> order(n);
    for (std::size_t obj = 0; obj < m; ++obj) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return objs[a][obj] < objs[b][obj]; });
        dist[order.front()] = std::numeric_limits<double>::infinity();
        dist[order.back()] = std::numeric_limits<double>::infinity();
        const double span = objs[order.back()][obj] - objs[order.front()][obj];
        if (span <= 0.0) continue;
        for (std::size_t r = 1; r + 1 < n; ++r)
            dist[order[r]] += (objs[order[r + 1]][obj] - objs[order[r - 1]][obj]) / span;
    }
    return dist;
}

/// Rank (front index) and crowding distance for every member of a set.
struct RankInfo {
    std::vector<std::size_t> rank;
    std::vector<double> crowding;
};

inline RankInfo rank_and_crowding(const std::vector<std::vector<double>>& objs) {
    RankInfo info;
    info.rank.assign(objs.size(), 0);
    info.crowding.assign(objs.size(), 0.0);
    std::size_t level = 0;
    for (const auto& front : nondominated_sort(objs)) {
        std::vector<std::vector<double>> fobjs;
        fobjs.reserve(front.size());
        for (std::size_t i : front) fobjs.push_back(objs[i]);
        const auto cd = crowding_distance(fobjs);
        for (std::size_t r = 0; r < front.size(); ++r) {
            info.crowding[front[r]] = cd[r];
            info.rank[front[r]] = level;
        }
        ++level;
    }
    return info;
}

} // namespace detail

/// N initial points by Latin hypercube, all truly evaluated.
inline std::vector<Solution> initialize(const Problem& problem, std::size_t n, std::mt19937_64& rng,
                                        EvaluationBudget& budget) {
    if (budget.remaining() < n) throw BudgetExceeded("initialize: budget below population size");
    auto points = latin_hypercube(n, problem.lower, problem.upper, rng);
    std::vector<Solution> pop;
    pop.reserve(n);
    for (auto& x : points) pop.push_back(evaluate_solution(problem, std::move(x), budget));
    return pop;
}

/// N offspring by binary tournament + SBX + polynomial mutation, clipped to
/// bounds. Rate-zero operators reproduce the selected parents unchanged.
inline std::vector<Solution> gen_offspring(const std::vector<Solution>& pop, std::size_t n,
                                           const Problem& problem, const OperatorParams& params,
                                           ObjectiveMode mode, std::mt19937_64& rng) {
    if (pop.empty()) throw DomainError("gen_offspring: empty population");
    std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Tournament keys: fitness for SOP, (front rank, -crowding) for MOP.
    std::vector<std::size_t> rank;
    std::vector<double> crowding;
    if (mode == ObjectiveMode::MOP) {
        std::vector<std::vector<double>> objs;
        for (const auto& s : pop) objs.push_back(s.f);
        auto info = detail::rank_and_crowding(objs);
        rank = std::move(info.rank);
        crowding = std::move(info.crowding);
    }
    auto tournament = [&]() -> std::size_t {
        const std::size_t a = pick(rng), b = pick(rng);
        if (mode == ObjectiveMode::SOP) return pop[a].f[0] <= pop[b].f[0] ? a : b;
        if (rank[a] != rank[b]) return rank[a] < rank[b] ? a : b;
        return crowding[a] >= crowding[b] ? a : b;
    };

    const double mut_prob =
        params.mutation_prob < 0.0 ? 1.0 / double(problem.dim) : params.mutation_prob;

    std::vector<Solution> offspring;
    offspring.reserve(n);
    while (offspring.size() < n) {
        auto child1 = pop[tournament()].x;
        auto child2 = pop[tournament()].x;
        if (unit(rng) < params.crossover_prob) {
            for (std::size_t j = 0; j < problem.dim; ++j)
                if (unit(rng) < 0.5)
                    detail::sbx_variable(child1[j], child2[j], problem.lower[j], problem.upper[j],
                                         params.eta_crossover, rng);
        }
        detail::polynomial_mutate(child1, problem.lower, problem.upper, mut_prob,
                                  params.eta_mutation, rng);
        detail::polynomial_mutate(child2, problem.lower, problem.upper, mut_prob,
                                  params.eta_mutation, rng);
        offspring.push_back(Solution{std::move(child1), {}, 0});
        if (offspring.size() < n) offspring.push_back(Solution{std::move(child2), {}, 0});
    }
    return offspring;
}

/// Best N of the pool: fitness order for SOP; NSGA-II style front order with
/// crowding-distance truncation of the last admitted front for MOP.
inline std::vector<Solution> environmental_select(std::vector<Solution> pool, std::size_t n,
                                                  ObjectiveMode mode) {
    if (pool.size() <= n) return pool;
    if (mode == ObjectiveMode::SOP) {
        std::stable_sort(pool.begin(), pool.end(),
                         [](const Solution& a, const Solution& b) { return a.f[0] < b.f[0]; });
        pool.resize(n);
        return pool;
    }
    std::vector<std::vector<double>> objs;
    for (const auto& s : pool) objs.push_back(s.f);
    std::vector<Solution> next;
    next.reserve(n);
    for (const auto& front : nondominated_sort(objs)) {
        if (next.size() + front.size() <= n) {
            for (std::size_t i : front) next.push_back(pool[i]);
            if (next.size() == n) break;
            continue;
        }
        std::vector<std::vector<double>> fobjs;
        for (std::size_t i : front) fobjs.push_back(objs[i]);
        const auto cd = detail::crowding_distance(fobjs);
        std::vector<std::size_t> order(front.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return cd[a] > cd[b]; });
        for (std::size_t r = 0; next.size() < n; ++r) next.push_back(pool[front[order[r]]]);
        break;
    }
    return next;
}

/// Context for surrogate prompting: the current population truncated to the
/// tau best (fitness order for SOP, front order for MOP).
inline std::vector<Solution> sample_context(const std::vector<Solution>& pop, std::size_t tau,
                                            ObjectiveMode mode) {
    if (pop.size() < 2) throw DomainError("sample_context: fewer than 2 evaluated solutions");
    if (pop.size() <= tau) return pop;
    return environmental_select(pop, tau, mode);
}

inline std::vector<Solution> nondominated_set(const std::vector<Solution>& sols) {
    std::vector<std::vector<double>> objs;
    for (const auto& s : sols) objs.push_back(s.f);
    auto fronts = nondominated_sort(objs);
    std::vector<Solution> nd;
    if (fronts.empty()) return nd;
    for (std::size_t i : fronts.front()) nd.push_back(sols[i]);
    return nd;
}

/// One generation's surrogate screening: builds the anchor prompts over the
/// context and offspring, infers the relation matrix and scores candidates.
/// Ground truth (for the oracle backend) peeks at true objective values
/// without touching the budget.
struct ScreeningResult {
    ScoreVector scores;
    std::size_t fallback_rows = 0;
};

inline ScreeningResult screen_offspring(const std::vector<Solution>& ctx,
                                        const std::vector<Solution>& offspring,
                                        const Problem& problem, Criterion criterion,
                                        ObjectiveMode mode, int beta, RelationBackend& backend,
                                        std::size_t concurrency, RecordSink sink = nullptr) {
    std::vector<std::vector<double>> ctx_x, query_x;
    for (const auto& s : ctx) ctx_x.push_back(s.x);
    for (const auto& s : offspring) query_x.push_back(s.x);
    auto [ctx_norm, query_norm] = normalize_local(ctx_x, query_x);

    LabeledContext lctx;
    for (const auto& v : ctx_norm) lctx.texts.push_back(format_vector(round_vector(v, beta)));
    std::vector<std::string> query_texts;
    for (const auto& v : query_norm) query_texts.push_back(format_vector(round_vector(v, beta)));

    std::vector<std::vector<double>> ctx_objs;
    for (const auto& s : ctx) ctx_objs.push_back(s.f);
    std::vector<CategoryTag> ctx_tags;
    if (criterion == Criterion::C1) {
        for (const auto& s : ctx) lctx.fitness.push_back(s.f[0]);
    } else {
        ctx_tags = partition_c2(ctx_objs, mode);
        lctx.tags = ctx_tags;
    }

    auto instances = build_anchor_prompts(lctx, std::move(query_texts), criterion);

    std::optional<std::vector<GroundTruth>> truths;
    if (backend.kind() == BackendKind::Oracle) {
        // True objective values of unevaluated offspring, outside the budget.
        std::vector<std::vector<double>> query_objs;
        for (const auto& s : offspring)
            query_objs.push_back(s.evaluated() ? s.f : problem.eval_fn(s.x));
        truths.emplace();
        truths->reserve(instances.size());
        std::vector<CategoryTag> cand_tags;
        if (criterion == Criterion::C2)
            for (const auto& qo : query_objs) cand_tags.push_back(tag_candidate(ctx_objs, qo, mode));
        for (const auto& inst : instances) {
            GroundTruth t;
            if (criterion == Criterion::C1) {
                t.anchor_fitness = ctx[inst.anchor].f[0];
                for (const auto& qo : query_objs) t.candidate_fitness.push_back(qo[0]);
            } else {
                t.anchor_tag = ctx_tags[inst.anchor];
                t.candidate_tags = cand_tags;
            }
            truths->push_back(std::move(t));
        }
    }

    auto inferred = infer_all(backend, instances, truths ? &*truths : nullptr, concurrency, sink);
    if (criterion == Criterion::C2) inferred.matrix.anchor_tags = ctx_tags;

    ScreeningResult result;
    result.scores = criterion == Criterion::C1 ? score_c1(inferred.matrix) : score_c2(inferred.matrix);
    result.fallback_rows = inferred.fallback_rows;
    return result;
}

/// Full optimization run. Stops when the evaluation budget is exhausted;
/// if the remaining budget in the last generation is below N', only that
/// many top candidates are evaluated. If `partial_out` is non-null it
/// receives whatever was evaluated so far when the run throws.
inline RunResult run(const RunConfig& config, RelationBackend& backend, RecordSink sink = nullptr,
                     RunResult* partial_out = nullptr) {
    const Problem problem = make_problem(config.problem_id, config.dim, config.n_obj);
    const ObjectiveMode mode = config.mode();
    const Criterion criterion = config.effective_criterion();
    if (mode == ObjectiveMode::MOP && criterion == Criterion::C1)
        throw ConfigError("C1 criterion requires a single-objective problem");
    if (config.eval_size < 1 || config.eval_size > config.pop_size)
        throw ConfigError("eval_size must satisfy 1 <= N' <= N");
    if (config.context_cap < 2) throw ConfigError("context cap must be >= 2");

    std::mt19937_64 rng(config.seed);
    EvaluationBudget budget{config.max_fes};

    RunResult result;
    result.mode = mode;

    auto record_eval = [&](const Solution& s) {
        result.archive.push_back(s);
        if (mode == ObjectiveMode::SOP) {
            const double f = s.f[0];
            result.best_so_far.push_back(result.best_so_far.empty()
                                             ? f
                                             : std::min(result.best_so_far.back(), f));
        }
    };

    auto pop = initialize(problem, config.pop_size, rng, budget);
    for (const auto& s : pop) record_eval(s);

    std::size_t generation = 0;
    try {
    while (!budget.exhausted()) {
        ++generation;
        auto offspring = gen_offspring(pop, config.pop_size, problem, config.operators, mode, rng);
        auto ctx = sample_context(pop, config.context_cap, mode);
        auto screening = screen_offspring(ctx, offspring, problem, criterion, mode,
                                          config.beta_decimals, backend,
                                          config.backend.concurrency_limit, sink);
        const std::size_t n_eval = std::min(config.eval_size, budget.remaining());
        auto selected_idx = select_top(screening.scores, n_eval);

        std::vector<Solution> selected;
        selected.reserve(n_eval);
        for (std::size_t k : selected_idx) {
            auto s = evaluate_solution(problem, offspring[k].x, budget);
            record_eval(s);
            selected.push_back(std::move(s));
        }

        GenerationRecord rec;
        rec.generation = generation;
        rec.used_fes_after = budget.used_fes;
        rec.selected = selected.size();
        rec.fallback_rows = screening.fallback_rows;
        const auto [mn, mx] =
            std::minmax_element(screening.scores.values.begin(), screening.scores.values.end());
        rec.best_score = *mx;
        rec.worst_score = *mn;
        result.generations.push_back(rec);

        auto pool = pop;
        pool.insert(pool.end(), selected.begin(), selected.end());
        pop = environmental_select(std::move(pool), config.pop_size, mode);
    }
    } catch (...) {
        if (partial_out) {
            result.used_fes = budget.used_fes;
            if (mode == ObjectiveMode::MOP) result.nondominated = nondominated_set(result.archive);
            *partial_out = std::move(result);
        }
        throw;
    }

    result.used_fes = budget.used_fes;
    if (mode == ObjectiveMode::MOP) result.nondominated = nondominated_set(result.archive);
    return result;
}

inline RunResult run(const RunConfig& config) {
    auto backend = make_backend(config.backend);
    return run(config, *backend);
}

/// Plain GA trace (no surrogate, every offspring evaluated) used to build
/// the offline evaluation suite and the RL dataset. Budget-free.
struct GaSnapshot {
    std::size_t generation = 0;
    std::vector<Solution> parents;
    std::vector<Solution> offspring;
};

inline std::vector<GaSnapshot> run_plain_ga(const Problem& problem, std::size_t pop_size,
                                            std::size_t generations,
                                            const std::vector<std::size_t>& snapshot_gens,
                                            std::uint64_t seed,
                                            const OperatorParams& params = {}) {
    const ObjectiveMode mode = problem.n_obj > 1 ? ObjectiveMode::MOP : ObjectiveMode::SOP;
    std::mt19937_64 rng(seed);
    EvaluationBudget budget{std::numeric_limits<std::size_t>::max() / 2};

    auto pop = initialize(problem, pop_size, rng, budget);
    std::vector<GaSnapshot> snaps;
    for (std::size_t gen = 1; gen <= generations; ++gen) {
        auto offspring = gen_offspring(pop, pop_size, problem, params, mode, rng);
        for (auto& s : offspring) s = evaluate_solution(problem, std::move(s.x), budget);
        if (std::find(snapshot_gens.begin(), snapshot_gens.end(), gen) != snapshot_gens.end())
            snaps.push_back(GaSnapshot{gen, pop, offspring});
        auto pool = pop;
        pool.insert(pool.end(), offspring.begin(), offspring.end());
        pop = environmental_select(std::move(pool), pop_size, mode);
    }
    return snaps;
}

} // namespace rsea

#endif // RSEA_SAEA_HPP
