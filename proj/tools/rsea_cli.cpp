// Command-line surface: optimization runs, offline backend evaluation,
// RL-dataset generation and scoring, and plot-ready CSV export.

#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "rsea/rsea.hpp"

namespace fs = std::filesystem;

namespace {

struct BackendFlags {
    std::string kind = "oracle";
    std::string endpoint;
    std::string model = "oracle";
    double temperature = 0.0;
    int max_retries = 3;
    double timeout = 120.0;
    std::size_t concurrency = 4;
    std::uint64_t seed = 0;
    std::string api_key_env = "RSEA_API_KEY";
};

void add_backend_flags(CLI::App& cmd, BackendFlags& flags) {
    cmd.add_option("--backend", flags.kind, "Backend kind: oracle, random or llm")
        ->check(CLI::IsMember({"oracle", "random", "llm"}));
    cmd.add_option("--endpoint", flags.endpoint,
                   "Chat-completions endpoint URL (llm backend)");
    cmd.add_option("--model", flags.model, "Model name sent to the endpoint");
    cmd.add_option("--temperature", flags.temperature, "Sampling temperature (llm)");
    cmd.add_option("--max-retries", flags.max_retries, "Format-failure retries (llm)");
    cmd.add_option("--timeout", flags.timeout, "Request timeout in seconds (llm)");
    cmd.add_option("--concurrency", flags.concurrency, "Max in-flight requests");
    cmd.add_option("--backend-seed", flags.seed, "Seed of the random backend");
    cmd.add_option("--api-key-env", flags.api_key_env,
                   "Environment variable holding the API key");
}

rsea::BackendConfig to_backend_config(const BackendFlags& flags) {
    rsea::BackendConfig config;
    config.kind = rsea::backend_kind_from_name(flags.kind);
    config.endpoint_url = flags.endpoint;
    config.model_name = flags.model;
    config.temperature = flags.temperature;
    config.max_retries = flags.max_retries;
    config.timeout_seconds = flags.timeout;
    config.concurrency_limit = std::max<std::size_t>(1, flags.concurrency);
    config.seed = flags.seed;
    config.api_key_env = flags.api_key_env;
    if (config.kind == rsea::BackendKind::Llm && config.endpoint_url.empty())
        throw rsea::ConfigError("--backend llm requires --endpoint");
    return config;
}

// "1..10" or a single number.
std::vector<std::uint64_t> parse_seed_range(const std::string& spec) {
    const auto dots = spec.find("..");
    if (dots == std::string::npos) return {std::stoull(spec)};
    const std::uint64_t lo = std::stoull(spec.substr(0, dots));
    const std::uint64_t hi = std::stoull(spec.substr(dots + 2));
    if (hi < lo) throw rsea::ConfigError("seed range is empty: " + spec);
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
}

std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const auto end = comma == std::string::npos ? s.size() : comma;
        if (end > start) out.push_back(s.substr(start, end - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw rsea::ConfigError("empty problem list: " + s);
    return out;
}

int cmd_list_problems() {
    for (const auto& id : rsea::list_problem_ids()) std::cout << id << "\n";
    return 0;
}

int run_batch(const rsea::RunConfig& base, const std::vector<std::uint64_t>& seeds,
              const fs::path& out_dir, std::size_t jobs) {
    std::atomic<std::size_t> next{0};
    std::atomic<int> failures{0};
    std::mutex io_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= seeds.size()) return;
            rsea::RunConfig config = base;
            config.seed = seeds[i];
            const fs::path dir = seeds.size() == 1 && out_dir.filename() != ""
                                     ? out_dir
                                     : out_dir / ("seed" + std::to_string(seeds[i]));
            try {
                auto result = rsea::execute_run_to_dir(config, dir);
                std::lock_guard<std::mutex> lock(io_mutex);
                std::cout << dir.string() << ": completed, " << result.used_fes << " evaluations";
                if (config.mode() == rsea::ObjectiveMode::SOP)
                    std::cout << ", best f = " << result.best_so_far.back();
                std::cout << "\n";
            } catch (const std::exception& e) {
                ++failures;
                std::lock_guard<std::mutex> lock(io_mutex);
                std::cerr << dir.string() << ": " << e.what() << "\n";
            }
        }
    };
    const std::size_t n_workers = std::max<std::size_t>(1, std::min(jobs, seeds.size()));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return failures.load() == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relation-surrogate evolutionary optimization toolkit"};
    app.require_subcommand(1);

    // --- run ---
    auto* run = app.add_subcommand("run", "Execute an optimization run into a directory");
    std::string run_config_file, run_problem, run_criterion, run_batch_spec, run_out = "runs/run";
    std::size_t run_dim = 5, run_nobj = 1, run_fes = 300, run_pop = 30, run_np = 3, run_tau = 30;
    int run_beta = 5;
    std::uint64_t run_seed = 1;
    std::size_t run_jobs = 1;
    BackendFlags run_backend;
    run->add_option("--config", run_config_file, "JSON config file (flags override it)");
    run->add_option("--problem", run_problem, "Problem id, e.g. lzg/ackley or dtlz/2");
    run->add_option("--d,--dim", run_dim, "Decision dimension");
    run->add_option("--m,--n-obj", run_nobj, "Number of objectives");
    run->add_option("--fes", run_fes, "True-evaluation budget");
    run->add_option("--pop", run_pop, "Population size N");
    run->add_option("--eval-size", run_np, "Evaluated offspring per generation N'");
    run->add_option("--context-cap", run_tau, "Max context size tau");
    run->add_option("--criterion", run_criterion, "C1 or C2 (default by objective count)")
        ->check(CLI::IsMember({"C1", "C2"}));
    run->add_option("--beta", run_beta, "Decimals in prompt vectors");
    run->add_option("--seed", run_seed, "Run seed");
    run->add_option("--batch", run_batch_spec, "Seed batch, e.g. seeds=1..10");
    run->add_option("--jobs", run_jobs, "Parallel runs in batch mode");
    run->add_option("--out", run_out, "Output run directory (batch: parent directory)");
    add_backend_flags(*run, run_backend);

    // --- offline-eval ---
    auto* offline = app.add_subcommand("offline-eval", "Offline relation-accuracy evaluation");
    std::string off_suite, off_problems = "lzg/ackley,lzg/ellipsoid,lzg/griewank,lzg/rosenbrock";
    std::string off_criterion = "C1", off_out = "offline_report.csv", off_save_suite;
    bool off_build = false;
    std::uint64_t off_seed = 1;
    int off_beta = 5;
    rsea::OfflineSuiteConfig off_cfg;
    BackendFlags off_backend;
    offline->add_option("--suite", off_suite, "Existing suite JSONL");
    offline->add_flag("--build", off_build, "Build the suite instead of loading one");
    offline->add_option("--problems", off_problems, "Comma-separated problem ids (with --build)");
    offline->add_option("--criterion", off_criterion, "C1 or C2 (with --build)")
        ->check(CLI::IsMember({"C1", "C2"}));
    offline->add_option("--seed", off_seed, "Suite seed (with --build)");
    offline->add_option("--ga-pop", off_cfg.ga_pop, "GA population for trajectory generation");
    offline->add_option("--d,--dim", off_cfg.dim, "Decision dimension");
    offline->add_option("--generations", off_cfg.generations, "GA generations");
    offline->add_option("--ctx-size", off_cfg.ctx_size, "Context size n");
    offline->add_option("--query-size", off_cfg.query_size, "Query size q");
    offline->add_option("--beta", off_beta, "Decimals in prompt vectors");
    offline->add_option("--save-suite", off_save_suite, "Also write the built suite to this path");
    offline->add_option("--out", off_out, "Metrics CSV path");
    add_backend_flags(*offline, off_backend);

    // --- gen-dataset ---
    auto* gen = app.add_subcommand("gen-dataset", "Build an RL instruction dataset (JSONL)");
    std::string gen_problems = "lzg/ackley,lzg/ellipsoid,lzg/griewank,lzg/rosenbrock";
    std::string gen_criterion = "C1", gen_out = "rl_dataset.jsonl";
    std::size_t gen_dim = 5;
    std::uint64_t gen_seed = 1;
    rsea::RLDatasetConfig gen_cfg;
    gen->add_option("--problems", gen_problems, "Comma-separated problem ids");
    gen->add_option("--d,--dim", gen_dim, "Decision dimension");
    gen->add_option("--criterion", gen_criterion, "C1 or C2")
        ->check(CLI::IsMember({"C1", "C2"}));
    gen->add_option("--ga-pop", gen_cfg.ga_pop, "GA population");
    gen->add_option("--generations", gen_cfg.generations, "GA generations");
    gen->add_option("--subsample", gen_cfg.subsample, "Context/query subsample size");
    gen->add_option("--beta", gen_cfg.beta_decimals, "Decimals in prompt vectors");
    gen->add_option("--seed", gen_seed, "Dataset seed");
    gen->add_option("--out", gen_out, "Output JSONL path");

    // --- score-responses ---
    auto* score = app.add_subcommand("score-responses", "Score a response file against a dataset");
    std::string score_dataset, score_responses;
    score->add_option("--dataset", score_dataset, "Dataset JSONL")->required();
    score->add_option("--responses", score_responses, "Responses JSONL ({id, text} lines)")
        ->required();

    // --- plot-export ---
    auto* plot = app.add_subcommand("plot-export", "Export run trajectories as tidy CSV");
    std::vector<std::string> plot_dirs;
    std::string plot_prefix = "plot";
    plot->add_option("dirs", plot_dirs, "Run directories")->required();
    plot->add_option("--out-prefix", plot_prefix,
                     "Output prefix; writes <prefix>_{sop,mop}{,_median}.csv");

    // --- list-problems ---
    app.add_subcommand("list-problems", "List all registered problem ids");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("list-problems")) return cmd_list_problems();

        if (app.got_subcommand("run")) {
            rsea::RunConfig config;
            if (!run_config_file.empty()) config = rsea::load_run_config(run_config_file);
            if (!run_problem.empty()) config.problem_id = run_problem;
            if (run->count("--d")) config.dim = run_dim;
            if (run->count("--m")) config.n_obj = run_nobj;
            if (run->count("--fes")) config.max_fes = run_fes;
            if (run->count("--pop")) config.pop_size = run_pop;
            if (run->count("--eval-size")) config.eval_size = run_np;
            if (run->count("--context-cap")) config.context_cap = run_tau;
            if (run->count("--beta")) config.beta_decimals = run_beta;
            if (!run_criterion.empty()) config.criterion = rsea::criterion_from_name(run_criterion);
            if (run->count("--seed")) config.seed = run_seed;
            if (run->count("--backend") || run_config_file.empty())
                config.backend = to_backend_config(run_backend);

            std::vector<std::uint64_t> seeds = {config.seed};
            fs::path out = run_out;
            if (!run_batch_spec.empty()) {
                std::string spec = run_batch_spec;
                if (spec.rfind("seeds=", 0) == 0) spec = spec.substr(6);
                seeds = parse_seed_range(spec);
            }
            if (seeds.size() == 1) {
                rsea::RunConfig single = config;
                single.seed = seeds.front();
                auto result = rsea::execute_run_to_dir(single, out);
                std::cout << out.string() << ": completed, " << result.used_fes << " evaluations";
                if (single.mode() == rsea::ObjectiveMode::SOP)
                    std::cout << ", best f = " << result.best_so_far.back();
                std::cout << "\n";
                return 0;
            }
            return run_batch(config, seeds, out, run_jobs);
        }

        if (app.got_subcommand("offline-eval")) {
            if (!off_build && off_suite.empty())
                throw rsea::ConfigError("offline-eval needs --suite <file> or --build");
            std::vector<rsea::OfflineInstance> suite;
            if (off_build) {
                suite = rsea::build_offline_suite(split_csv_list(off_problems), off_cfg,
                                                  rsea::criterion_from_name(off_criterion),
                                                  off_seed);
                if (!off_save_suite.empty()) {
                    rsea::save_offline_suite(suite, off_save_suite);
                    std::cout << "suite: " << off_save_suite << " (" << suite.size()
                              << " instances)\n";
                }
            } else {
                suite = rsea::load_offline_suite(off_suite);
            }
            auto backend = rsea::make_backend(to_backend_config(off_backend));
            auto report = rsea::evaluate_backend(suite, *backend, off_beta,
                                                 std::max<std::size_t>(1, off_backend.concurrency));
            rsea::write_metric_report_csv(report, off_out);
            std::cout << "report: " << off_out << " (" << report.instances.size() << " instances, "
                      << report.failed_instances << " failed)\n";
            for (const auto& row : report.aggregates)
                if (row.problem_id == "all")
                    std::cout << "  " << row.metric << ": mean " << row.mean << " +/- "
                              << row.stddev << " over " << row.count << "\n";
            return report.failed_instances == 0 ? 0 : 1;
        }

        if (app.got_subcommand("gen-dataset")) {
            auto dataset = rsea::gen_rl_dataset(split_csv_list(gen_problems), gen_dim, gen_cfg,
                                                rsea::criterion_from_name(gen_criterion), gen_seed);
            rsea::save_rl_dataset(dataset, gen_out);
            std::cout << "dataset: " << gen_out << " (" << dataset.size() << " instances)\n";
            return 0;
        }

        if (app.got_subcommand("score-responses")) {
            auto summary = rsea::score_response_file(score_dataset, score_responses);
            std::cout << "scored " << summary.scored.size() << " responses, mean reward "
                      << summary.mean_reward << " +/- " << summary.stddev_reward
                      << ", violation rate " << summary.violation_rate << "\n";
            std::cout << summary.unmatched_ids.size() << " unmatched response ids, "
                      << summary.instances_without_response << " instances without a response\n";
            return 0;
        }

        if (app.got_subcommand("plot-export")) {
            std::vector<rsea::RunSummary> sop_runs, mop_runs;
            for (const auto& dir : plot_dirs) {
                try {
                    auto summary = rsea::load_run_summary(dir);
                    (summary.mode == rsea::ObjectiveMode::SOP ? sop_runs : mop_runs)
                        .push_back(std::move(summary));
                } catch (const std::exception& e) {
                    std::cerr << "warning: skipping " << dir << ": " << e.what() << "\n";
                }
            }
            if (sop_runs.empty() && mop_runs.empty())
                throw rsea::IoError("plot-export: no readable run directories");
            if (!sop_runs.empty()) {
                rsea::export_plot_data(sop_runs, rsea::ObjectiveMode::SOP, plot_prefix + "_sop.csv",
                                       plot_prefix + "_sop_median.csv");
                std::cout << plot_prefix << "_sop.csv: " << sop_runs.size() << " runs\n";
            }
            if (!mop_runs.empty()) {
                rsea::export_plot_data(mop_runs, rsea::ObjectiveMode::MOP, plot_prefix + "_mop.csv",
                                       plot_prefix + "_mop_median.csv");
                std::cout << plot_prefix << "_mop.csv: " << mop_runs.size() << " runs\n";
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
