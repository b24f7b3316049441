#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "condgen/health_index.hpp"
#include "condgen/rng.hpp"

using namespace condgen;
using Catch::Approx;

namespace {

// Independent tree walker over the JSON serialization, used as the
// prediction oracle.
double json_tree_walk(const nlohmann::json& model, const std::vector<double>& x) {
    double sum = model.at("base_score").get<double>();
    const double lr = model.at("learning_rate").get<double>();
    for (const auto& tree : model.at("trees")) {
        const auto& nodes = tree.at("nodes");
        int idx = 0;
        while (nodes[idx].at("feature").get<int>() >= 0) {
            const int f = nodes[idx].at("feature").get<int>();
            const double thr = nodes[idx].at("threshold").get<double>();
            idx = x[static_cast<std::size_t>(f)] < thr ? nodes[idx].at("left").get<int>()
                                                       : nodes[idx].at("right").get<int>();
        }
        sum += lr * nodes[idx].at("value").get<double>();
    }
    return sum;
}

} // namespace

TEST_CASE("constant labels collapse to the base score", "[health_index]") {
    std::vector<std::vector<double>> rows;
    std::vector<double> labels;
    for (int i = 0; i < 12; ++i) {
        rows.push_back({static_cast<double>(i), static_cast<double>(i % 3)});
        labels.push_back(80.0);
    }
    const HealthIndexTraining t = train_health_index({"a", "b"}, rows, labels, {});
    CHECK(t.constant_labels);
    CHECK(t.model.trees.empty());
    CHECK(t.model.base_score == 80.0);
    CHECK(t.model.predict({{"a", -5.0}, {"b", 100.0}}) == 80.0);
}

TEST_CASE("one depth-1 tree recovers a step function exactly", "[health_index]") {
    std::vector<std::vector<double>> rows;
    std::vector<double> labels;
    for (int i = 0; i < 10; ++i) {
        rows.push_back({static_cast<double>(i)});
        labels.push_back(i < 5 ? 10.0 : 50.0);
    }
    HealthIndexConfig config;
    config.tree_count = 1;
    config.max_depth = 1;
    config.learning_rate = 1.0;
    const HealthIndexTraining t = train_health_index({"x"}, rows, labels, config);
    for (int i = 0; i < 10; ++i) {
        const double got = t.model.predict_raw(rows[static_cast<std::size_t>(i)]);
        REQUIRE(got == Approx(labels[static_cast<std::size_t>(i)]).margin(1e-12));
    }
    CHECK(t.mse_by_round.back() == Approx(0.0).margin(1e-18));
}

TEST_CASE("training MSE is non-increasing in tree count", "[health_index]") {
    RandomStream rng(21);
    std::vector<std::vector<double>> rows;
    std::vector<double> labels;
    for (int i = 0; i < 200; ++i) {
        const double a = rng.uniform(0.0, 10.0);
        const double b = rng.uniform(0.0, 10.0);
        rows.push_back({a, b});
        labels.push_back(3.0 * a - b * b + rng.normal(0.0, 2.0));
    }
    HealthIndexConfig config;
    config.tree_count = 40;
    const HealthIndexTraining t = train_health_index({"a", "b"}, rows, labels, config);
    REQUIRE(t.mse_by_round.size() == 41);
    for (std::size_t k = 1; k < t.mse_by_round.size(); ++k)
        REQUIRE(t.mse_by_round[k] <= t.mse_by_round[k - 1] + 1e-12);
    CHECK(t.mse_by_round.back() < t.mse_by_round.front());
}

TEST_CASE("prediction equals the serialized tree-walk oracle", "[health_index]") {
    RandomStream rng(33);
    std::vector<std::vector<double>> rows;
    std::vector<double> labels;
    for (int i = 0; i < 150; ++i) {
        rows.push_back({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
        labels.push_back(100.0 * rows.back()[0] - 20.0 * rows.back()[1] + 5.0 * rng.uniform());
    }
    HealthIndexConfig config;
    config.tree_count = 25;
    const HealthIndexTraining t = train_health_index({"a", "b", "c"}, rows, labels, config);
    const nlohmann::json serialized = to_json(t.model);
    for (int i = 0; i < 1000; ++i) {
        const std::vector<double> x{rng.uniform(-0.5, 1.5), rng.uniform(-0.5, 1.5),
                                    rng.uniform(-0.5, 1.5)};
        REQUIRE(t.model.predict_raw(x) == Approx(json_tree_walk(serialized, x)).margin(1e-12));
    }
}

TEST_CASE("training is deterministic", "[health_index]") {
    RandomStream rng(41);
    std::vector<std::vector<double>> rows;
    std::vector<double> labels;
    for (int i = 0; i < 80; ++i) {
        rows.push_back({rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0)});
        labels.push_back(rng.uniform(0.0, 100.0));
    }
    const auto a = train_health_index({"a", "b"}, rows, labels, {});
    const auto b = train_health_index({"a", "b"}, rows, labels, {});
    CHECK(to_json(a.model).dump() == to_json(b.model).dump());
}

TEST_CASE("prediction clamping", "[health_index]") {
    HealthIndexModel m;
    m.features = {"x"};
    SECTION("continuous clamps to [0, 100]") {
        m.base_score = 101.2;
        CHECK(m.predict({{"x", 0.0}}) == 100.0);
        m.base_score = -3.0;
        CHECK(m.predict({{"x", 0.0}}) == 0.0);
        m.base_score = 55.0;
        CHECK(m.predict({{"x", 0.0}}) == 55.0);
    }
    SECTION("discrete rounds then clamps to [1, levels]") {
        m.mode = HealthIndexMode::discrete;
        m.levels = 5;
        m.base_score = 3.6;
        CHECK(m.predict_level({{"x", 0.0}}) == 4);
        m.base_score = 0.2;
        CHECK(m.predict_level({{"x", 0.0}}) == 1);
        m.base_score = 9.7;
        CHECK(m.predict_level({{"x", 0.0}}) == 5);
    }
}

TEST_CASE("training and prediction error paths", "[health_index]") {
    std::vector<std::vector<double>> rows(12, std::vector<double>{1.0});
    std::vector<double> labels(12, 1.0);
    labels[0] = 2.0;
    SECTION("too few records") {
        std::vector<std::vector<double>> few(9, std::vector<double>{1.0});
        std::vector<double> few_labels(9, 1.0);
        REQUIRE_THROWS_AS(train_health_index({"x"}, few, few_labels, {}), InsufficientDataError);
    }
    SECTION("non-finite feature") {
        rows[3][0] = std::nan("");
        REQUIRE_THROWS_AS(train_health_index({"x"}, rows, labels, {}), ValidationError);
    }
    SECTION("bad config") {
        HealthIndexConfig c;
        c.learning_rate = 0.0;
        REQUIRE_THROWS_AS(train_health_index({"x"}, rows, labels, c), ConfigError);
    }
    SECTION("missing attribute at prediction is named") {
        HealthIndexModel m;
        m.features = {"x", "y"};
        REQUIRE_THROWS_WITH(m.predict({{"x", 1.0}}), Catch::Matchers::ContainsSubstring("y"));
    }
}

TEST_CASE("health index JSON round trip", "[health_index]") {
    RandomStream rng(55);
    std::vector<std::vector<double>> rows;
    std::vector<double> labels;
    for (int i = 0; i < 40; ++i) {
        rows.push_back({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
        labels.push_back(rng.uniform(1.0, 5.0));
    }
    HealthIndexConfig config;
    config.mode = HealthIndexMode::discrete;
    config.tree_count = 5;
    const auto trained = train_health_index({"a", "b"}, rows, labels, config);
    const HealthIndexModel back = health_index_from_json(to_json(trained.model));
    CHECK(to_json(back).dump() == to_json(trained.model).dump());
    CHECK(back.predict_level({{"a", 0.5}, {"b", 0.5}}) ==
          trained.model.predict_level({{"a", 0.5}, {"b", 0.5}}));
}
