#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "condgen/reliability.hpp"

using namespace condgen;
using Catch::Approx;

namespace {

/// Fleet with fixed flat HI values: count[k] assets at hi_value[k].
TrajectorySet flat_fleet(const std::vector<std::pair<double, int>>& hi_and_count, int horizon) {
    TrajectorySet t;
    t.start_year = 2019;
    for (const auto& [hi, count] : hi_and_count) {
        for (int k = 0; k < count; ++k) {
            t.asset_ids.push_back("a" + std::to_string(t.asset_ids.size()));
            t.hi.push_back(std::vector<double>(static_cast<std::size_t>(horizon), hi));
            t.from_inspection.push_back(std::vector<bool>(static_cast<std::size_t>(horizon), true));
            t.served_load_mw.push_back(1.0);
        }
    }
    t.replacement_curve.assign(static_cast<std::size_t>(horizon), 100.0);
    return t;
}

ModelSet linear_only_models(double a, double b) {
    ModelSet s;
    s.schema = {{"C1", AttributeKind::numerical, 0, Direction::increasing_with_age}};
    s.inspection_interval_years = 3;
    AttributeModels am;
    CombinedModel m;
    m.target = "C1";
    m.degradation_terms = {{{DegradationFamily::linear, a, b}, 1.0, 1.0}};
    am.combined = m;
    am.sigma.by_age[0] = 0.0;
    s.attributes["C1"] = am;
    return s;
}

/// HI model: 90 while C1 < threshold, 60 after.
HealthIndexModel step_hi_model(double threshold, double low_value, double high_value) {
    HealthIndexModel m;
    m.features = {"C1"};
    m.base_score = 0.0;
    m.learning_rate = 1.0;
    RegressionTree tree;
    tree.nodes.push_back({0, threshold, 1, 2, 0.0});
    tree.nodes.push_back({-1, 0.0, -1, -1, low_value});
    tree.nodes.push_back({-1, 0.0, -1, -1, high_value});
    m.trees.push_back(tree);
    return m;
}

} // namespace

TEST_CASE("default assumptions carry the standard band table", "[reliability]") {
    SimulationAssumptions a;
    a.validate();
    CHECK(a.bands.size() == 5);
    CHECK(a.bands[0].annual_failure_probability == 0.10);
    CHECK(a.bands[1].annual_failure_probability == 0.05);
    CHECK(a.bands[2].annual_failure_probability == 0.02);
    CHECK(a.bands[3].annual_failure_probability == 0.01);
    CHECK(a.bands[4].annual_failure_probability == 0.005);
    CHECK(a.value_of_lost_energy_per_mwh == 10000.0);
    CHECK(a.restoration_hours == 1.0);
    CHECK(a.unit_replacement_cost == 500.0);
    CHECK(a.horizon_years == 10);
}

TEST_CASE("band membership is half-open (low, high]", "[reliability]") {
    SimulationAssumptions a;
    CHECK(a.failure_probability(20.0) == 0.10);
    CHECK(a.failure_probability(20.5) == 0.05);
    CHECK(a.failure_probability(0.0) == 0.10);   // clamps into lowest band
    CHECK(a.failure_probability(100.0) == 0.005);
    CHECK(a.failure_probability(150.0) == 0.005); // clamps into highest band
}

TEST_CASE("assumption validation", "[reliability]") {
    SimulationAssumptions a;
    SECTION("gap between bands") {
        a.bands[1].low = 25.0;
        REQUIRE_THROWS_AS(a.validate(), ConfigError);
    }
    SECTION("probability outside [0,1]") {
        a.bands[0].annual_failure_probability = 1.5;
        REQUIRE_THROWS_AS(a.validate(), ConfigError);
    }
    SECTION("bands must reach 100") {
        a.bands.pop_back();
        REQUIRE_THROWS_AS(a.validate(), ConfigError);
    }
}

TEST_CASE("zero probabilities and zero replacement give exactly zero cost", "[reliability]") {
    SimulationAssumptions a;
    for (auto& b : a.bands) b.annual_failure_probability = 0.0;
    const TrajectorySet fleet = flat_fleet({{50.0, 20}}, 10);
    const CostReport r = simulate(fleet, a, 0, 500, 42);
    CHECK(r.total_mean.total == 0.0);
    CHECK(r.total_mean.proactive == 0.0);
    CHECK(r.total_mean.reactive == 0.0);
    CHECK(r.total_mean.failure == 0.0);
    CHECK(r.total_mean.failures == 0.0);
    for (const auto& y : r.per_year_mean) CHECK(y.total == 0.0);
}

TEST_CASE("first-year failure statistics match the analytic expectation", "[reliability]") {
    // 300 assets: 31/18/29/20/2 percent at band-midpoint HI values.
    const TrajectorySet fleet =
        flat_fleet({{10.0, 93}, {30.0, 54}, {50.0, 87}, {70.0, 60}, {90.0, 6}}, 10);
    SimulationAssumptions a;
    const double expected_failures =
        93 * 0.10 + 54 * 0.05 + 87 * 0.02 + 60 * 0.01 + 6 * 0.005; // 14.37
    const CostReport r = simulate(fleet, a, 0, 4000, 7);
    const double mean = r.per_year_mean[0].failures;
    const double se = r.per_year_stderr[0].failures;
    INFO("mean=" << mean << " expected=" << expected_failures << " se=" << se);
    CHECK(std::abs(mean - expected_failures) <= 3.0 * se + 1e-9);
    CHECK(r.per_year_mean[0].reactive == Approx(mean * 500.0).margin(1e-6));
}

TEST_CASE("reported TOC satisfies the accounting identity exactly", "[reliability]") {
    const TrajectorySet fleet = flat_fleet({{15.0, 30}, {85.0, 30}}, 10);
    SimulationAssumptions a;
    const CostReport r = simulate(fleet, a, 3, 600, 99);
    for (const auto& y : r.per_year_mean) REQUIRE(y.total == y.proactive + y.reactive + y.failure);
    REQUIRE(r.total_mean.total ==
            r.total_mean.proactive + r.total_mean.reactive + r.total_mean.failure);
}

TEST_CASE("proactive spend is a deterministic accounting identity", "[reliability]") {
    const TrajectorySet fleet = flat_fleet({{50.0, 40}}, 10);
    SimulationAssumptions a;
    const int x = 5;
    const CostReport r = simulate(fleet, a, x, 200, 1);
    CHECK(r.total_mean.proactive == Approx(x * 500.0 * 10).margin(1e-9));
    for (const auto& y : r.per_year_mean) CHECK(y.proactive == Approx(x * 500.0).margin(1e-12));
    CHECK(r.total_stderr.proactive == 0.0);
}

TEST_CASE("simulation is deterministic and thread-count independent", "[reliability]") {
    const TrajectorySet fleet = flat_fleet({{10.0, 25}, {60.0, 25}}, 10);
    SimulationAssumptions a;
    const CostReport r1 = simulate(fleet, a, 4, 400, 12345, 1);
    const CostReport r2 = simulate(fleet, a, 4, 400, 12345, 1);
    const CostReport r4 = simulate(fleet, a, 4, 400, 12345, 4);
    CHECK(to_json(r1).dump() == to_json(r2).dump());
    CHECK(to_json(r1).dump() == to_json(r4).dump());
    const CostReport other = simulate(fleet, a, 4, 400, 54321, 1);
    CHECK(to_json(r1).dump() != to_json(other).dump());
}

TEST_CASE("failed assets restart on the fresh-install curve", "[reliability]") {
    // One asset stuck at HI 10; only the lowest band ever fails (p = 1).
    // It must fail exactly once: after the reactive replacement it follows
    // the replacement curve (here 100 everywhere), where p = 0.
    TrajectorySet t = flat_fleet({{10.0, 1}}, 10);
    SimulationAssumptions a;
    a.bands[0].annual_failure_probability = 1.0;
    for (std::size_t k = 1; k < a.bands.size(); ++k) a.bands[k].annual_failure_probability = 0.0;
    const CostReport r = simulate(t, a, 0, 20, 5);
    CHECK(r.total_mean.failures == 1.0);
    CHECK(r.per_year_mean[0].failures == 1.0);
    for (std::size_t y = 1; y < 10; ++y) CHECK(r.per_year_mean[y].failures == 0.0);
}

TEST_CASE("X larger than the fleet is clamped", "[reliability]") {
    const TrajectorySet fleet = flat_fleet({{50.0, 8}}, 5);
    SimulationAssumptions a;
    a.horizon_years = 5;
    const CostReport r = simulate(fleet, a, 100, 50, 3);
    CHECK(r.per_year_mean[0].proactive == Approx(8 * 500.0).margin(1e-12));
}

TEST_CASE("simulate input validation", "[reliability]") {
    const TrajectorySet fleet = flat_fleet({{50.0, 5}}, 10);
    SimulationAssumptions a;
    REQUIRE_THROWS_AS(simulate(fleet, a, 0, 0, 1), ConfigError);
    REQUIRE_THROWS_AS(simulate(fleet, a, -1, 10, 1), ConfigError);
}

TEST_CASE("optimizer degenerate and dominance cases", "[reliability]") {
    SECTION("zero failure probabilities make X = 0 optimal") {
        SimulationAssumptions a;
        for (auto& b : a.bands) b.annual_failure_probability = 0.0;
        const TrajectorySet fleet = flat_fleet({{30.0, 20}}, 10);
        const OptimizationResult res = optimize_replacement(fleet, a, {0, 2, 5, 10}, 200, 11);
        CHECK(res.best_replacement_count == 0);
        CHECK(res.reports.size() == 4);
        CHECK(res.reports[0].total_mean.total == 0.0);
    }
    SECTION("certain failures with dear outages make replacement dominant") {
        SimulationAssumptions a;
        for (auto& b : a.bands) b.annual_failure_probability = 1.0;
        // FC per failure = 10000 * 1 MW * 1 h >> 500 unit cost
        const TrajectorySet fleet = flat_fleet({{50.0, 10}}, 10);
        const OptimizationResult res = optimize_replacement(fleet, a, {0, 2, 4, 6, 8, 10}, 50, 13);
        double last = -1.0;
        for (std::size_t k = 0; k < res.reports.size(); ++k) {
            const double toc = res.reports[k].total_mean.total;
            if (k > 0) REQUIRE(toc <= last);
            last = toc;
            // with p = 1 everywhere the process is deterministic:
            // X replaced (shielded), n - X certain failures
            const int x = res.reports[k].replacement_count;
            const double expected_year = x * 500.0 + (10.0 - x) * (10000.0 + 500.0);
            CHECK(res.reports[k].per_year_mean[0].total == Approx(expected_year).margin(1e-9));
        }
        CHECK(res.best_replacement_count == 10);
    }
    SECTION("empty candidate list is an error") {
        const TrajectorySet fleet = flat_fleet({{50.0, 5}}, 10);
        SimulationAssumptions a;
        REQUIRE_THROWS_AS(optimize_replacement(fleet, a, {}, 10, 1), ConfigError);
    }
}

TEST_CASE("trajectory construction with interpolation", "[reliability]") {
    // C1 equals age; HI steps from 90 to 60 when C1 crosses 1.5; asset starts
    // at age 0 so year 0 -> HI 90 and year 3 (age 3) -> HI 60.
    const ModelSet models = linear_only_models(1.0, 0.0);
    const HealthIndexModel hi = step_hi_model(1.5, 90.0, 60.0);

    InspectionDataset seed;
    seed.schema = models.schema;
    seed.inspection_interval_years = 3;
    seed.records = {{"a0", 2019, 0.0, {{"C1", 0.0}}}};

    SimulationAssumptions a;
    a.horizon_years = 4; // years 0..3, one 3-year step
    GenerationOptions opts;
    opts.diversify = false;
    const TrajectorySet t = build_trajectories(models, seed, hi, a, 1, opts);

    REQUIRE(t.horizon() == 4);
    CHECK(t.hi[0][0] == 90.0);
    CHECK(t.hi[0][1] == Approx(80.0).margin(1e-9));
    CHECK(t.hi[0][2] == Approx(70.0).margin(1e-9));
    CHECK(t.hi[0][3] == 60.0);
    CHECK(t.from_inspection[0] == std::vector<bool>{true, false, false, true});

    SECTION("replacement curve starts at exactly 100") {
        CHECK(t.replacement_curve[0] == 100.0);
        // fresh asset: C1 = age crosses 1.5 by age 3 -> HI 60 at year 3
        CHECK(t.replacement_curve[3] == 60.0);
    }
}

TEST_CASE("trajectory horizon validation", "[reliability]") {
    const ModelSet models = linear_only_models(1.0, 0.0);
    const HealthIndexModel hi = step_hi_model(1.5, 90.0, 60.0);
    InspectionDataset seed;
    seed.schema = models.schema;
    seed.inspection_interval_years = 3;
    seed.records = {{"a0", 2019, 0.0, {{"C1", 0.0}}}};
    SimulationAssumptions a;

    SECTION("horizon shorter than one interval") {
        a.horizon_years = 3; // needs 4 for one 3-year step
        REQUIRE_THROWS_AS(build_trajectories(models, seed, hi, a, 1), ConfigError);
    }
    SECTION("horizon not ending on an inspection year") {
        a.horizon_years = 9; // (9-1) % 3 != 0
        REQUIRE_THROWS_AS(build_trajectories(models, seed, hi, a, 1), ConfigError);
    }
    SECTION("ten-year horizon with three-year interval generates 2022/2025/2028") {
        a.horizon_years = 10;
        GenerationOptions opts;
        opts.diversify = false;
        const TrajectorySet t = build_trajectories(models, seed, hi, a, 1, opts);
        REQUIRE(t.horizon() == 10);
        for (std::size_t y = 0; y < 10; ++y)
            CHECK(t.from_inspection[0][y] == (y % 3 == 0));
    }
}

TEST_CASE("frozen conditions give a flat trajectory", "[reliability]") {
    // constant condition value -> constant HI
    const ModelSet models = linear_only_models(0.0, 5.0);
    const HealthIndexModel hi = step_hi_model(10.0, 75.0, 20.0); // C1=5 < 10 -> 75
    InspectionDataset seed;
    seed.schema = models.schema;
    seed.inspection_interval_years = 3;
    seed.records = {{"a0", 2019, 2.0, {{"C1", 5.0}}}};
    SimulationAssumptions a;
    a.horizon_years = 10;
    GenerationOptions opts;
    opts.diversify = false;
    const TrajectorySet t = build_trajectories(models, seed, hi, a, 1, opts);
    for (double v : t.hi[0]) CHECK(v == 75.0);
}

TEST_CASE("assumptions JSON round trip", "[reliability]") {
    SimulationAssumptions a;
    a.served_load_mw = 0.75;
    a.horizon_years = 7;
    const SimulationAssumptions back = assumptions_from_json(to_json(a));
    CHECK(back.served_load_mw == 0.75);
    CHECK(back.horizon_years == 7);
    CHECK(back.bands.size() == 5);
    CHECK(back.bands[2].annual_failure_probability == 0.02);
    SECTION("defaults apply for missing fields") {
        const SimulationAssumptions d = assumptions_from_json(nlohmann::json::object());
        CHECK(d.unit_replacement_cost == 500.0);
        CHECK(d.bands.size() == 5);
    }
}
