#ifndef RSEA_BACKENDS_HPP
#define RSEA_BACKENDS_HPP

// Relation-inference backends behind one contract: given a prompt instance,
// return q labels plus an audit record. Oracle answers from ground truth,
// random draws i.i.d. labels under a seed, llm talks to an OpenAI-compatible
// chat-completions endpoint with retries and a conservative fallback.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "rsea/errors.hpp"
#include "rsea/prompting.hpp"
#include "rsea/relation_data.hpp"
#include "rsea/types.hpp"
#include "rsea/voting.hpp"

namespace rsea {

enum class BackendKind { Oracle, Random, Llm };

inline std::string backend_kind_name(BackendKind k) {
    switch (k) {
    case BackendKind::Oracle: return "oracle";
    case BackendKind::Random: return "random";
    case BackendKind::Llm: return "llm";
    }
    return "?";
}

inline BackendKind backend_kind_from_name(const std::string& s) {
    if (s == "oracle") return BackendKind::Oracle;
    if (s == "random") return BackendKind::Random;
    if (s == "llm") return BackendKind::Llm;
    throw ConfigError("unknown backend kind: " + s);
}

struct BackendConfig {
    BackendKind kind = BackendKind::Oracle;
    std::string endpoint_url;            // llm only, e.g. http://host:8000/v1/chat/completions
    std::string model_name = "oracle";
    double temperature = 0.0;
    int max_retries = 3;
    double timeout_seconds = 120.0;
    std::size_t concurrency_limit = 4;
    std::uint64_t seed = 0;              // random backend
    std::string api_key_env = "RSEA_API_KEY";
};

/// True quality of the anchor and candidates of one prompt instance.
/// C1 uses fitness values, C2 uses category tags.
struct GroundTruth {
    double anchor_fitness = 0.0;
    std::vector<double> candidate_fitness;
    CategoryTag anchor_tag = CategoryTag::Good;
    std::vector<CategoryTag> candidate_tags;
};

struct InferenceRecord {
    std::size_t anchor = 0;
    std::string prompt_hash;
    std::string raw_response;
    std::optional<std::vector<RelationLabel>> labels;
    std::string violation; // last parse failure reason, if any
    double latency_ms = 0.0;
    int retries = 0;
    bool fallback = false;
};

struct InferOutcome {
    std::vector<RelationLabel> labels;
    InferenceRecord record;
};

class RelationBackend {
public:
    virtual ~RelationBackend() = default;
    virtual InferOutcome infer(const PromptInstance& inst, const GroundTruth* truth) = 0;
    virtual BackendKind kind() const = 0;
};

/// Ground-truth labels for one instance, via the C1/C2 labeling rules.
inline std::vector<RelationLabel> oracle_labels(const PromptInstance& inst, const GroundTruth& truth) {
    const std::size_t q = inst.q();
    std::vector<RelationLabel> labels(q);
    if (inst.criterion == Criterion::C1) {
        if (truth.candidate_fitness.size() != q)
            throw ConfigError("oracle: ground truth fitness missing for candidates");
        for (std::size_t k = 0; k < q; ++k)
            labels[k] = label_c1(truth.anchor_fitness, truth.candidate_fitness[k]);
    } else {
        if (truth.candidate_tags.size() != q)
            throw ConfigError("oracle: ground truth tags missing for candidates");
        for (std::size_t k = 0; k < q; ++k)
            labels[k] = label_c2(truth.anchor_tag, truth.candidate_tags[k]);
    }
    return labels;
}

class OracleBackend final : public RelationBackend {
public:
    InferOutcome infer(const PromptInstance& inst, const GroundTruth* truth) override {
        if (!truth) throw ConfigError("oracle backend requires ground-truth access");
        InferOutcome out;
        out.labels = oracle_labels(inst, *truth);
        out.record.anchor = inst.anchor;
        out.record.labels = out.labels;
        return out;
    }
    BackendKind kind() const override { return BackendKind::Oracle; }
};

class RandomBackend final : public RelationBackend {
public:
    explicit RandomBackend(std::uint64_t seed) : seed_(seed) {}

    InferOutcome infer(const PromptInstance& inst, const GroundTruth*) override {
        // Stream keyed on (seed, anchor, instance content): independent of
        // dispatch order, but distinct across generations.
        std::uint64_t mix = seed_ ^ (0x9e3779b97f4a7c15ull * (inst.anchor + 1));
        mix ^= fnv1a_hash((*inst.ctx_text)[inst.anchor]);
        for (const auto& t : *inst.query_text) mix = mix * 1099511628211ull ^ fnv1a_hash(t);
        std::mt19937_64 rng(mix);
        const std::size_t q = inst.q();
        InferOutcome out;
        out.labels.resize(q);
        if (inst.criterion == Criterion::C1) {
            std::uniform_int_distribution<int> coin(0, 1);
            for (auto& l : out.labels) l = coin(rng) ? RelationLabel::Better : RelationLabel::Worse;
        } else {
            std::uniform_int_distribution<int> die(-1, 1);
            for (auto& l : out.labels) l = label_from_int(die(rng));
        }
        out.record.anchor = inst.anchor;
        out.record.labels = out.labels;
        return out;
    }
    BackendKind kind() const override { return BackendKind::Random; }

private:
    std::uint64_t seed_;
};

/// Transport seam for the llm backend: maps a request body (JSON text) to
/// the endpoint's response body. Production uses HTTP; tests inject a stub.
using ChatTransport = std::function<std::string(const std::string& request_body)>;

class LlmBackend final : public RelationBackend {
public:
    LlmBackend(BackendConfig config, ChatTransport transport)
        : config_(std::move(config)), transport_(std::move(transport)) {
        if (!transport_) throw ConfigError("llm backend: no transport configured");
    }

    InferOutcome infer(const PromptInstance& inst, const GroundTruth*) override {
        const std::size_t q = inst.q();
        std::string prompt = render_prompt(inst);
        InferOutcome out;
        out.record.anchor = inst.anchor;
        out.record.prompt_hash = fnv1a_hex(prompt);

        const auto t0 = std::chrono::steady_clock::now();
        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            out.record.retries = attempt;
            std::string content;
            try {
                content = complete(prompt);
            } catch (const BackendError&) {
                if (attempt == config_.max_retries) throw;
                continue;
            }
            out.record.raw_response = content;
            auto parsed = parse_response(content, q, inst.criterion);
            if (parsed.ok()) {
                out.labels = *parsed.labels;
                out.record.labels = out.labels;
                out.record.latency_ms = elapsed_ms(t0);
                return out;
            }
            out.record.violation = parsed.failure->reason;
            if (attempt == 0)
                prompt += "\nYour previous answer was not in the required format. Reply with one "
                          "JSON object mapping \"1\".." +
                          std::to_string(q) + " to labels, nothing else.\n";
        }
        // Unrecoverable format failure: fall back to all +1 (anchor better),
        // which degrades toward no-surrogate behavior.
        out.labels.assign(q, RelationLabel::Better);
        out.record.labels = out.labels;
        out.record.fallback = true;
        out.record.latency_ms = elapsed_ms(t0);
        return out;
    }
    BackendKind kind() const override { return BackendKind::Llm; }

private:
    static double elapsed_ms(std::chrono::steady_clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }

    std::string complete(const std::string& prompt) {
        nlohmann::json req = {
            {"model", config_.model_name},
            {"temperature", config_.temperature},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        };
        const std::string body = transport_(req.dump());
        nlohmann::json resp = nlohmann::json::parse(body, nullptr, false);
        if (resp.is_discarded() || !resp.contains("choices") || resp["choices"].empty())
            throw BackendError("llm backend: malformed completion response");
        const auto& msg = resp["choices"][0];
        if (!msg.contains("message") || !msg["message"].contains("content"))
            throw BackendError("llm backend: completion response missing message content");
        return msg["message"]["content"].get<std::string>();
    }

    BackendConfig config_;
    ChatTransport transport_;
};

namespace detail {

struct ParsedUrl {
    std::string scheme_host; // e.g. "http://host:8000"
    std::string path;        // e.g. "/v1/chat/completions"
};

inline ParsedUrl parse_endpoint_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("llm backend: endpoint URL needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl out;
    if (path_start == std::string::npos) {
        out.scheme_host = url;
        out.path = "/v1/chat/completions";
    } else {
        out.scheme_host = url.substr(0, path_start);
        out.path = url.substr(path_start);
        if (out.path == "/") out.path = "/v1/chat/completions";
    }
    return out;
}

} // namespace detail

/// HTTP transport against an OpenAI-compatible chat-completions endpoint.
/// API key (optional) is read from the environment variable named in the
/// config and sent as a bearer token. Plain http only.
inline ChatTransport make_http_transport(const BackendConfig& config) {
    const auto url = detail::parse_endpoint_url(config.endpoint_url);
    const std::string api_key_env = config.api_key_env;
    const double timeout = config.timeout_seconds;
    return [url, api_key_env, timeout](const std::string& body) -> std::string {
        httplib::Client client(url.scheme_host);
        client.set_connection_timeout(std::chrono::duration<double>(timeout));
        client.set_read_timeout(std::chrono::duration<double>(timeout));
        httplib::Headers headers;
        if (const char* key = std::getenv(api_key_env.c_str()); key && *key)
            headers.emplace("Authorization", std::string("Bearer ") + key);
        auto res = client.Post(url.path, headers, body, "application/json");
        if (!res) throw BackendError("llm backend: transport failure (" + httplib::to_string(res.error()) + ")");
        if (res->status != 200)
            throw BackendError("llm backend: HTTP " + std::to_string(res->status) + ": " + res->body);
        return res->body;
    };
}

inline std::unique_ptr<RelationBackend> make_http_llm_backend(const BackendConfig& config) {
    if (config.endpoint_url.empty())
        throw ConfigError("llm backend: endpoint URL is required (set endpoint_url)");
    return std::make_unique<LlmBackend>(config, make_http_transport(config));
}

inline std::unique_ptr<RelationBackend> make_backend(const BackendConfig& config) {
    switch (config.kind) {
    case BackendKind::Oracle: return std::make_unique<OracleBackend>();
    case BackendKind::Random: return std::make_unique<RandomBackend>(config.seed);
    case BackendKind::Llm: return make_http_llm_backend(config);
    }
    throw ConfigError("unknown backend kind");
}

using RecordSink = std::function<void(const InferenceRecord&)>;

struct InferAllResult {
    RelationMatrix matrix;
    std::vector<InferenceRecord> records; // anchor order
    std::size_t fallback_rows = 0;
};

/// Runs all n instances through the backend, at most concurrency_limit in
/// flight, and assembles matrix rows in anchor order regardless of
/// completion order.
inline InferAllResult infer_all(RelationBackend& backend, const std::vector<PromptInstance>& instances,
                                const std::vector<GroundTruth>* truths = nullptr,
                                std::size_t concurrency_limit = 1, RecordSink sink = nullptr) {
    if (instances.empty()) throw DomainError("infer_all: no instances");
    const std::size_t n = instances.size();
    const std::size_t q = instances.front().q();
    for (const auto& inst : instances)
        if (inst.q() != q) throw DomainError("infer_all: inconsistent query counts");
    if (truths && truths->size() != n) throw ConfigError("infer_all: truth list size mismatch");

    InferAllResult result;
    result.matrix = RelationMatrix::zeros(n, q);
    result.records.resize(n);

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::optional<std::string> first_error;

    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                const GroundTruth* truth = truths ? &(*truths)[i] : nullptr;
                auto out = backend.infer(instances[i], truth);
                for (std::size_t k = 0; k < q; ++k) result.matrix.at(i, k) = out.labels[k];
                result.records[i] = std::move(out.record);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error)
                    first_error = "anchor " + std::to_string(instances[i].anchor) + ": " + e.what();
            }
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(concurrency_limit, n));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) throw BackendError("infer_all: " + *first_error);

    for (const auto& rec : result.records) {
        if (rec.fallback) ++result.fallback_rows;
        if (sink) sink(rec);
    }
    return result;
}

} // namespace rsea

#endif // RSEA_BACKENDS_HPP
