#ifndef RSEA_RUNIO_HPP
#define RSEA_RUNIO_HPP

// Run-directory persistence: manifest, trajectory/archive CSVs, surrogate
// records and backend transcripts, plus analytic reference fronts for the
// DTLZ problems and helpers for plot export. Data files (CSV/JSONL) are
// byte-deterministic given config and seed; wall-clock timestamps live only
// in the manifest.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsea/backends.hpp"
#include "rsea/errors.hpp"
#include "rsea/evalkit.hpp"
#include "rsea/problems.hpp"
#include "rsea/prompting.hpp"
#include "rsea/saea.hpp"

namespace rsea {

inline constexpr const char* kManifestSchemaVersion = "rsea.manifest.v1";
inline constexpr const char* kTranscriptSchemaVersion = "rsea.transcript.v1";

inline std::string csv_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// --- config (de)serialization ---

inline nlohmann::json run_config_to_json(const RunConfig& c) {
    nlohmann::json j = {
        {"problem", c.problem_id},
        {"dim", c.dim},
        {"n_obj", c.n_obj},
        {"max_fes", c.max_fes},
        {"pop_size", c.pop_size},
        {"eval_size", c.eval_size},
        {"context_cap", c.context_cap},
        {"criterion", criterion_name(c.effective_criterion())},
        {"beta_decimals", c.beta_decimals},
        {"seed", c.seed},
        {"operators",
         {{"crossover_prob", c.operators.crossover_prob},
          {"eta_crossover", c.operators.eta_crossover},
          {"mutation_prob", c.operators.mutation_prob},
          {"eta_mutation", c.operators.eta_mutation}}},
        {"backend",
         {{"kind", backend_kind_name(c.backend.kind)},
          {"endpoint_url", c.backend.endpoint_url},
          {"model_name", c.backend.model_name},
          {"temperature", c.backend.temperature},
          {"max_retries", c.backend.max_retries},
          {"timeout_seconds", c.backend.timeout_seconds},
          {"concurrency_limit", c.backend.concurrency_limit},
          {"seed", c.backend.seed},
          {"api_key_env", c.backend.api_key_env}}},
    };
    return j;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    c.problem_id = j.value("problem", c.problem_id);
    c.dim = j.value("dim", c.dim);
    c.n_obj = j.value("n_obj", c.n_obj);
    c.max_fes = j.value("max_fes", c.max_fes);
    c.pop_size = j.value("pop_size", c.pop_size);
    c.eval_size = j.value("eval_size", c.eval_size);
    c.context_cap = j.value("context_cap", c.context_cap);
    if (j.contains("criterion")) c.criterion = criterion_from_name(j.at("criterion").get<std::string>());
    c.beta_decimals = j.value("beta_decimals", c.beta_decimals);
    c.seed = j.value("seed", c.seed);
    if (j.contains("operators")) {
        const auto& op = j.at("operators");
        c.operators.crossover_prob = op.value("crossover_prob", c.operators.crossover_prob);
        c.operators.eta_crossover = op.value("eta_crossover", c.operators.eta_crossover);
        c.operators.mutation_prob = op.value("mutation_prob", c.operators.mutation_prob);
        c.operators.eta_mutation = op.value("eta_mutation", c.operators.eta_mutation);
    }
    if (j.contains("backend")) {
        const auto& b = j.at("backend");
        if (b.contains("kind")) c.backend.kind = backend_kind_from_name(b.at("kind").get<std::string>());
        c.backend.endpoint_url = b.value("endpoint_url", c.backend.endpoint_url);
        c.backend.model_name = b.value("model_name", c.backend.model_name);
        c.backend.temperature = b.value("temperature", c.backend.temperature);
        c.backend.max_retries = b.value("max_retries", c.backend.max_retries);
        c.backend.timeout_seconds = b.value("timeout_seconds", c.backend.timeout_seconds);
        c.backend.concurrency_limit = b.value("concurrency_limit", c.backend.concurrency_limit);
        c.backend.seed = b.value("seed", c.backend.seed);
        c.backend.api_key_env = b.value("api_key_env", c.backend.api_key_env);
    }
    return c;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file " + path);
    nlohmann::json j = nlohmann::json::parse(is, nullptr, false);
    if (j.is_discarded()) throw IoError("config file " + path + " is not valid JSON");
    return run_config_from_json(j);
}

// --- reference fronts ---

/// Seeded sample of n points on the true Pareto front of a DTLZ problem:
/// position variables drawn uniformly, distance variables fixed at their
/// front-optimal value, dominated shape points filtered out (DTLZ7).
inline std::vector<std::vector<double>> reference_front(const std::string& problem_id, std::size_t m,
                                                        std::size_t n_points,
                                                        std::uint64_t seed = 12345) {
    if (problem_id.rfind("dtlz/", 0) != 0)
        throw ConfigError("reference fronts are available for dtlz problems only");
    const int which = problem_id.back() - '0';
    const std::size_t dim = m + 1; // minimal: one distance variable
    const Problem problem = make_problem(problem_id, dim, m);
    const double dist_opt = (which == 6 || which == 7) ? 0.0 : 0.5;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<double>> points;
    const std::size_t oversample = which == 7 ? n_points * 4 : n_points;
    for (std::size_t i = 0; i < oversample; ++i) {
        std::vector<double> x(dim, dist_opt);
        for (std::size_t j = 0; j + 1 < m; ++j) x[j] = unit(rng); // m-1 position variables
        points.push_back(problem.eval_fn(x));
    }
    if (which == 7) {
        auto fronts = nondominated_sort(points);
        std::vector<std::vector<double>> nd;
        for (std::size_t i : fronts.front()) nd.push_back(points[i]);
        points = std::move(nd);
    }
    if (points.size() > n_points) points.resize(n_points);
    return points;
}

// --- run directory ---

struct RunPaths {
    std::filesystem::path dir;
    std::filesystem::path manifest() const { return dir / "manifest.json"; }
    std::filesystem::path trajectory() const { return dir / "trajectory.csv"; }
    std::filesystem::path archive() const { return dir / "archive.csv"; }
    std::filesystem::path nondominated() const { return dir / "nondominated.csv"; }
    std::filesystem::path surrogate() const { return dir / "surrogate.csv"; }
    std::filesystem::path transcript() const { return dir / "transcript.jsonl"; }
};

/// Serialized JSONL writer for backend transcripts.
class TranscriptWriter {
public:
    explicit TranscriptWriter(const std::filesystem::path& path) : os_(path) {
        if (!os_) throw IoError("cannot open transcript " + path.string());
    }

    void write(const InferenceRecord& rec) {
        nlohmann::json j = {
            {"schema_version", kTranscriptSchemaVersion},
            {"anchor", rec.anchor},
            {"prompt_hash", rec.prompt_hash},
            {"raw_response", rec.raw_response},
            {"violation", rec.violation},
            {"retries", rec.retries},
            {"fallback", rec.fallback},
        };
        if (rec.labels) {
            std::vector<int> labels;
            for (auto l : *rec.labels) labels.push_back(label_value(l));
            j["labels"] = labels;
        }
        std::lock_guard<std::mutex> lock(mutex_);
        os_ << j.dump() << "\n";
    }

    RecordSink sink() {
        return [this](const InferenceRecord& rec) { write(rec); };
    }

private:
    std::ofstream os_;
    std::mutex mutex_;
};

namespace detail {

inline std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

inline void write_solution_csv(const std::filesystem::path& path, const std::vector<Solution>& sols,
                               std::size_t dim, std::size_t n_obj) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string());
    os << "eval_id";
    for (std::size_t j = 0; j < dim; ++j) os << ",x" << j;
    for (std::size_t j = 0; j < n_obj; ++j) os << ",f" << j;
    os << "\n";
    for (const auto& s : sols) {
        os << s.eval_id;
        for (double v : s.x) os << "," << csv_double(v);
        for (double v : s.f) os << "," << csv_double(v);
        os << "\n";
    }
}

} // namespace detail

/// Executes a run into a directory: manifest first (status "running"),
/// then all data files, then the finalized manifest. Refuses to reuse a
/// directory that already holds a manifest.
inline RunResult execute_run_to_dir(const RunConfig& config, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    RunPaths paths{dir};
    fs::create_directories(dir);
    if (fs::exists(paths.manifest()))
        throw IoError("run directory already contains a manifest: " + dir.string());

    nlohmann::json manifest = {
        {"schema_version", kManifestSchemaVersion},
        {"config", run_config_to_json(config)},
        {"template_version", "v1"},
        {"template_hash", template_hash()},
        {"status", "running"},
        {"started_at", detail::iso_timestamp()},
        {"files", nlohmann::json::array()},
    };
    {
        std::ofstream os(paths.manifest());
        os << manifest.dump(2) << "\n";
    }

    auto backend = make_backend(config.backend);
    std::optional<TranscriptWriter> transcript;
    if (config.backend.kind == BackendKind::Llm) transcript.emplace(paths.transcript());

    RunResult result;
    bool aborted = false;
    std::string abort_reason;
    try {
        result = run(config, *backend, transcript ? transcript->sink() : RecordSink{}, &result);
    } catch (const std::exception& e) {
        aborted = true;
        abort_reason = e.what();
    }

    std::vector<std::string> files;
    // Trajectory: best-so-far for SOP, IGD of the archive-prefix
    // nondominated set for MOP.
    {
        std::ofstream os(paths.trajectory());
        if (result.mode == ObjectiveMode::SOP) {
            os << "fes,best_f\n";
            for (std::size_t i = 0; i < result.best_so_far.size(); ++i)
                os << (i + 1) << "," << csv_double(result.best_so_far[i]) << "\n";
        } else {
            os << "fes,igd\n";
            const auto reference = reference_front(config.problem_id, config.n_obj, 500);
            std::vector<std::vector<double>> nd; // running nondominated set
            for (std::size_t i = 0; i < result.archive.size(); ++i) {
                const auto& f = result.archive[i].f;
                bool dominated = false;
                for (const auto& g : nd)
                    if (g == f || pareto_dominates(g, f)) {
                        dominated = true;
                        break;
                    }
                if (!dominated) {
                    std::erase_if(nd, [&](const auto& g) { return pareto_dominates(f, g); });
                    nd.push_back(f);
                }
                os << (i + 1) << "," << csv_double(igd(nd, reference)) << "\n";
            }
        }
        files.push_back("trajectory.csv");
    }
    detail::write_solution_csv(paths.archive(), result.archive, config.dim, config.n_obj);
    files.push_back("archive.csv");
    if (result.mode == ObjectiveMode::MOP) {
        detail::write_solution_csv(paths.nondominated(), result.nondominated, config.dim,
                                   config.n_obj);
        files.push_back("nondominated.csv");
    }
    {
        std::ofstream os(paths.surrogate());
        os << "generation,used_fes,selected,fallback_rows,best_score,worst_score\n";
        for (const auto& g : result.generations)
            os << g.generation << "," << g.used_fes_after << "," << g.selected << ","
               << g.fallback_rows << "," << csv_double(g.best_score) << ","
               << csv_double(g.worst_score) << "\n";
        files.push_back("surrogate.csv");
    }
    if (transcript) files.push_back("transcript.jsonl");

    manifest["status"] = aborted ? "aborted" : "completed";
    if (aborted) manifest["abort_reason"] = abort_reason;
    manifest["finished_at"] = detail::iso_timestamp();
    manifest["used_fes"] = result.used_fes;
    manifest["files"] = files;
    {
        std::ofstream os(paths.manifest());
        os << manifest.dump(2) << "\n";
    }
    if (aborted) throw BackendError("run aborted: " + abort_reason + " (partial outputs in " +
                                    dir.string() + ")");
    return result;
}

// --- plot export ---

struct RunSummary {
    std::string problem_id;
    std::string backend_kind;
    std::uint64_t seed = 0;
    ObjectiveMode mode = ObjectiveMode::SOP;
    std::vector<std::pair<std::size_t, double>> trajectory; // (fes, value)
};

inline RunSummary load_run_summary(const std::filesystem::path& dir) {
    RunPaths paths{dir};
    std::ifstream ms(paths.manifest());
    if (!ms) throw IoError("no manifest in " + dir.string());
    nlohmann::json manifest = nlohmann::json::parse(ms, nullptr, false);
    if (manifest.is_discarded()) throw IoError("corrupt manifest in " + dir.string());
    const auto& cfg = manifest.at("config");

    RunSummary summary;
    summary.problem_id = cfg.at("problem").get<std::string>();
    summary.backend_kind = cfg.at("backend").at("kind").get<std::string>();
    summary.seed = cfg.at("seed").get<std::uint64_t>();
    summary.mode = cfg.value("n_obj", 1) > 1 ? ObjectiveMode::MOP : ObjectiveMode::SOP;

    std::ifstream ts(paths.trajectory());
    if (!ts) throw IoError("no trajectory in " + dir.string());
    std::string line;
    std::getline(ts, line); // header
    while (std::getline(ts, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw IoError("corrupt trajectory in " + dir.string());
        summary.trajectory.emplace_back(std::stoull(line.substr(0, comma)),
                                        std::stod(line.substr(comma + 1)));
    }
    return summary;
}

/// Long-format export of several runs plus a per-(problem, backend, fes)
/// median aggregation. The value column is best_f for SOP runs, igd for MOP.
inline void export_plot_data(const std::vector<RunSummary>& runs, ObjectiveMode mode,
                             const std::filesystem::path& out_csv,
                             const std::filesystem::path& median_csv) {
    const char* value_col = mode == ObjectiveMode::SOP ? "best_f" : "igd";
    std::ofstream os(out_csv);
    if (!os) throw IoError("cannot open " + out_csv.string());
    os << "problem,backend,seed,fes," << value_col << "\n";
    for (const auto& r : runs)
        for (const auto& [fes, value] : r.trajectory)
            os << r.problem_id << "," << r.backend_kind << "," << r.seed << "," << fes << ","
               << csv_double(value) << "\n";

    // median per (problem, backend, fes)
    struct Key {
        std::string problem, backend;
        std::size_t fes;
        bool operator<(const Key& o) const {
            return std::tie(problem, backend, fes) < std::tie(o.problem, o.backend, o.fes);
        }
    };
    std::map<Key, std::vector<double>> groups;
    for (const auto& r : runs)
        for (const auto& [fes, value] : r.trajectory)
            groups[Key{r.problem_id, r.backend_kind, fes}].push_back(value);

    std::ofstream ms(median_csv);
    if (!ms) throw IoError("cannot open " + median_csv.string());
    ms << "problem,backend,fes,median_" << value_col << "\n";
    for (auto& [key, values] : groups) {
        std::sort(values.begin(), values.end());
        const std::size_t n = values.size();
        const double median =
            n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
        ms << key.problem << "," << key.backend << "," << key.fes << "," << csv_double(median)
           << "\n";
    }
}

/// Median of the final trajectory values of a set of runs.
inline double median_final_value(const std::vector<RunSummary>& runs) {
    std::vector<double> finals;
    for (const auto& r : runs) {
        if (r.trajectory.empty()) throw DomainError("median_final_value: empty trajectory");
        finals.push_back(r.trajectory.back().second);
    }
    std::sort(finals.begin(), finals.end());
    const std::size_t n = finals.size();
    return n % 2 ? finals[n / 2] : 0.5 * (finals[n / 2 - 1] + finals[n / 2]);
}

// --- offline-eval report CSV ---

inline void write_metric_report_csv(const MetricReport& report, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string());
    os << "row_type,id,problem,stage,metric,value,mean,stddev,count,fallback_rows,degenerate,failed\n";
    const std::pair<const char*, double InstanceMetrics::*> metrics[4] = {
        {"element_acc", &InstanceMetrics::element},
        {"binary_acc", &InstanceMetrics::binary},
        {"rank_acc", &InstanceMetrics::rank},
        {"spearman_rho", &InstanceMetrics::spearman},
    };
    for (const auto& m : report.instances) {
        for (const auto& [name, member] : metrics) {
            os << "instance," << m.id << "," << m.problem_id << "," << m.stage << "," << name << ","
               << csv_double(m.*member) << ",,,," << m.fallback_rows << ","
               << (m.spearman_degenerate ? 1 : 0) << "," << (m.failed ? 1 : 0) << "\n";
        }
    }
    for (const auto& a : report.aggregates) {
        os << "aggregate,," << a.problem_id << "," << a.stage << "," << a.metric << ",,"
           << csv_double(a.mean) << "," << csv_double(a.stddev) << "," << a.count << ",,,\n";
    }
}

} // namespace rsea

#endif // RSEA_RUNIO_HPP
