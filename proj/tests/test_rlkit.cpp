#include <doctest.h>

#include <cstdio>
#include <random>

#include "rsea/rlkit.hpp"

using namespace rsea;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/rsea_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

std::vector<RelationLabel> labels_from(const std::vector<int>& vals) {
    std::vector<RelationLabel> out;
    for (int v : vals) out.push_back(label_from_int(v));
    return out;
}

} // namespace

TEST_CASE("reward: invalid format branch") {
    auto truth = labels_from({1, -1});
    CHECK(reward("complete garbage", truth, 2, Criterion::C1) == doctest::Approx(-0.2));
    CHECK(reward("{\"1\": 1}", truth, 2, Criterion::C1) == doctest::Approx(-0.2)); // wrong count
    CHECK(reward("{\"1\": 0, \"2\": 1}", truth, 2, Criterion::C1) == doctest::Approx(-0.2)); // C1 bad label
}

TEST_CASE("reward: accuracy and dominance discount") {
    // q=10, balanced truth, all correct -> 1.0
    auto truth = labels_from({1, 1, 1, 1, 1, -1, -1, -1, -1, -1});
    CHECK(reward(serialize_labels(truth), truth, 10, Criterion::C1) == doctest::Approx(1.0));

    // all predicted +1 (share 1.0 > 0.9), 9 correct -> 0.8 * 0.9 = 0.72
    auto truth9 = labels_from({1, 1, 1, 1, 1, 1, 1, 1, 1, -1});
    auto all_plus = labels_from(std::vector<int>(10, 1));
    CHECK(reward(serialize_labels(all_plus), truth9, 10, Criterion::C1) == doctest::Approx(0.72));

    // share exactly 0.9 -> lambda stays 1.0
    auto nine_plus = labels_from({1, 1, 1, 1, 1, 1, 1, 1, 1, -1});
    CHECK(reward(serialize_labels(nine_plus), truth9, 10, Criterion::C1) == doctest::Approx(1.0));

    // zero correct, balanced prediction -> 0.0
    auto inverted = labels_from({-1, -1, -1, -1, -1, 1, 1, 1, 1, 1});
    CHECK(reward(serialize_labels(inverted), truth, 10, Criterion::C1) == doctest::Approx(0.0));

    // half correct: first five right, last five wrong
    auto half = labels_from({1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
    CHECK(reward(serialize_labels(half), truth, 10, Criterion::C1) == doctest::Approx(0.8 * 0.5));
}

TEST_CASE("reward: C2 dominance counts the modal label") {
    // q=4 all zeros predicted, truth all zeros: share 1.0 -> 0.8
    auto truth = labels_from({0, 0, 0, 0});
    CHECK(reward(serialize_labels(truth), truth, 4, Criterion::C2) == doctest::Approx(0.8));
    // mixed prediction, no dominance
    auto mixed = labels_from({0, 1, -1, 0});
    CHECK(reward(serialize_labels(mixed), mixed, 4, Criterion::C2) == doctest::Approx(1.0));
}

TEST_CASE("reward range and monotonicity in N_correct") {
    std::mt19937_64 rng(5);
    auto truth = labels_from({1, -1, 1, -1, 1, -1, 1, -1});
    double prev = -1.0;
    for (std::size_t n_correct = 0; n_correct <= 8; ++n_correct) {
        // flip the first 8 - n_correct labels
        std::vector<RelationLabel> pred = truth;
        for (std::size_t k = 0; k < 8 - n_correct; ++k)
            pred[k] = pred[k] == RelationLabel::Better ? RelationLabel::Worse : RelationLabel::Better;
        const double r = reward(serialize_labels(pred), truth, 8, Criterion::C1);
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
        CHECK(r > prev);
        prev = r;
    }
}

TEST_CASE("group_advantage") {
    auto zero = group_advantage({0.5, 0.5, 0.5, 0.5});
    for (double a : zero) CHECK(a == 0.0);

    auto pair = group_advantage({0.0, 1.0});
    CHECK(pair[0] == doctest::Approx(-0.5 / (0.5 + 1e-8)).epsilon(1e-12));
    CHECK(pair[1] == doctest::Approx(0.5 / (0.5 + 1e-8)).epsilon(1e-12));
    CHECK(pair[1] < 1.0); // epsilon keeps it strictly below 1

    CHECK_THROWS_AS(group_advantage({1.0}), DomainError);

    // centering property on random inputs
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> rewards(8);
        for (auto& r : rewards) r = unif(rng);
        auto adv = group_advantage(rewards);
        double sum = 0.0;
        for (double a : adv) sum += a;
        CHECK(std::fabs(sum) < 1e-12);
    }
}

TEST_CASE("group_advantage G=8 hand case") {
    std::vector<double> rewards = {1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    const double mean = 1.0 / 8.0;
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    const double stddev = std::sqrt(var / 8.0);
    auto adv = group_advantage(rewards, 1e-8);
    for (std::size_t g = 0; g < 8; ++g)
        CHECK(adv[g] == doctest::Approx((rewards[g] - mean) / (stddev + 1e-8)).epsilon(1e-10));
}

TEST_CASE("gen_rl_dataset: one instance per anchor per snapshot, round-trip consistent") {
    RLDatasetConfig cfg;
    cfg.ga_pop = 20;
    cfg.generations = 6;
    cfg.snapshot_gens = {2, 4, 6};
    cfg.subsample = 8;
    auto dataset = gen_rl_dataset({"lzg/ackley"}, 3, cfg, Criterion::C1, 9);
    REQUIRE(dataset.size() == 3 * 8); // snapshots x anchors
    for (const auto& inst : dataset) {
        CHECK(inst.q == 8);
        CHECK(inst.truth.size() == inst.q);
        CHECK(!inst.prompt.empty());
        // self-consistency: the serialized truth parses back to itself
        auto parsed = parse_response(serialize_labels(inst.truth), inst.q, inst.criterion);
        REQUIRE(parsed.ok());
        CHECK(*parsed.labels == inst.truth);
        for (auto l : inst.truth) CHECK(l != RelationLabel::Similar); // C1 alphabet
    }
    CHECK(dataset[0].id == "lzg_ackley_gen2_anchor0_C1");

    auto again = gen_rl_dataset({"lzg/ackley"}, 3, cfg, Criterion::C1, 9);
    REQUIRE(again.size() == dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        CHECK(again[i].prompt == dataset[i].prompt);
        CHECK(again[i].truth == dataset[i].truth);
    }
}

TEST_CASE("gen_rl_dataset C2 truths use the ternary alphabet") {
    RLDatasetConfig cfg;
    cfg.ga_pop = 16;
    cfg.generations = 4;
    cfg.snapshot_gens = {4};
    cfg.subsample = 8;
    auto dataset = gen_rl_dataset({"lzg/ellipsoid"}, 3, cfg, Criterion::C2, 2);
    REQUIRE(dataset.size() == 8);
    bool saw_zero = false;
    for (const auto& inst : dataset)
        for (auto l : inst.truth)
            if (l == RelationLabel::Similar) saw_zero = true;
    CHECK(saw_zero);
}

TEST_CASE("rl dataset JSONL round-trip") {
    RLDatasetConfig cfg;
    cfg.ga_pop = 12;
    cfg.generations = 3;
    cfg.snapshot_gens = {3};
    cfg.subsample = 6;
    auto dataset = gen_rl_dataset({"lzg/griewank"}, 3, cfg, Criterion::C1, 4);
    TempFile f("dataset.jsonl");
    save_rl_dataset(dataset, f.path);
    auto loaded = load_rl_dataset(f.path);
    REQUIRE(loaded.size() == dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        CHECK(loaded[i].id == dataset[i].id);
        CHECK(loaded[i].prompt == dataset[i].prompt);
        CHECK(loaded[i].truth == dataset[i].truth);
        CHECK(loaded[i].problem_id == dataset[i].problem_id);
        CHECK(loaded[i].generation == dataset[i].generation);
        CHECK(loaded[i].anchor == dataset[i].anchor);
    }
    {
        std::ofstream os(f.path);
        os << "{\"schema_version\": \"wrong.v0\"}\n";
    }
    CHECK_THROWS_AS(load_rl_dataset(f.path), IoError);
}

TEST_CASE("score_response_file") {
    RLDatasetConfig cfg;
    cfg.ga_pop = 12;
    cfg.generations = 3;
    cfg.snapshot_gens = {3};
    cfg.subsample = 6;
    auto dataset = gen_rl_dataset({"lzg/ackley"}, 3, cfg, Criterion::C1, 4);
    TempFile ds("score_ds.jsonl");
    save_rl_dataset(dataset, ds.path);

    SUBCASE("ground-truth responses score in {0.8, 1.0}") {
        TempFile rs("score_rs.jsonl");
        {
            std::ofstream os(rs.path);
            for (const auto& inst : dataset) {
                nlohmann::json j = {{"id", inst.id}, {"text", serialize_labels(inst.truth)}};
                os << j.dump() << "\n";
            }
        }
        auto summary = score_response_file(ds.path, rs.path);
        CHECK(summary.scored.size() == dataset.size());
        CHECK(summary.unmatched_ids.empty());
        CHECK(summary.instances_without_response == 0);
        CHECK(summary.violation_rate == 0.0);
        for (const auto& s : summary.scored)
            CHECK((s.reward == doctest::Approx(1.0) || s.reward == doctest::Approx(0.8)));
    }

    SUBCASE("empty response file") {
        TempFile rs("score_empty.jsonl");
        { std::ofstream os(rs.path); }
        auto summary = score_response_file(ds.path, rs.path);
        CHECK(summary.scored.empty());
        CHECK(summary.instances_without_response == dataset.size());
        CHECK(summary.mean_reward == 0.0);
    }

    SUBCASE("malformed line is an IoError naming the line") {
        TempFile rs("score_bad.jsonl");
        {
            std::ofstream os(rs.path);
            nlohmann::json j = {{"id", dataset[0].id}, {"text", "{}"}};
            os << j.dump() << "\n";
            os << "oops\n";
        }
        CHECK_THROWS_WITH_AS(score_response_file(ds.path, rs.path), doctest::Contains("line 2"),
                             IoError);
    }

    SUBCASE("unknown ids and violations are reported") {
        TempFile rs("score_mixed.jsonl");
        {
            std::ofstream os(rs.path);
            nlohmann::json a = {{"id", dataset[0].id}, {"text", "gibberish"}};
            nlohmann::json b = {{"id", "nope"}, {"text", "{}"}};
            os << a.dump() << "\n" << b.dump() << "\n";
        }
        auto summary = score_response_file(ds.path, rs.path);
        CHECK(summary.scored.size() == 1);
        CHECK(summary.scored[0].reward == doctest::Approx(-0.2));
        CHECK(summary.violation_rate == doctest::Approx(1.0));
        REQUIRE(summary.unmatched_ids.size() == 1);
        CHECK(summary.unmatched_ids[0] == "nope");
        CHECK(summary.instances_without_response == dataset.size() - 1);
    }
}
