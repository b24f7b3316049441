#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"

#include "condgen/error.hpp"
#include "condgen/generation.hpp"
#include "condgen/health_index.hpp"
#include "condgen/parallel.hpp"
#include "condgen/rng.hpp"

namespace condgen {

/// Health index band (low, high] with its annual aging failure probability.
struct HiBand {
    double low = 0.0;
    double high = 0.0;
    double annual_failure_probability = 0.0;
};

struct SimulationAssumptions {
    std::vector<HiBand> bands{
        {0.0, 20.0, 0.10}, {20.0, 40.0, 0.05}, {40.0, 60.0, 0.02},
        {60.0, 80.0, 0.01}, {80.0, 100.0, 0.005},
    };
    double value_of_lost_energy_per_mwh = 10000.0;
    double restoration_hours = 1.0;
    double unit_replacement_cost = 500.0;
    int horizon_years = 10;
    double served_load_mw = 1.0; // uniform default per asset

    void validate() const {
        if (horizon_years < 1) throw ConfigError("horizon_years must be >= 1");
        if (bands.empty()) throw ConfigError("at least one HI band required");
        for (std::size_t i = 0; i < bands.size(); ++i) {
            const HiBand& b = bands[i];
            if (b.annual_failure_probability < 0.0 || b.annual_failure_probability > 1.0)
                throw ConfigError("band probability outside [0,1]");
            if (!(b.low < b.high)) throw ConfigError("band with low >= high");
            if (i > 0 && bands[i - 1].high != b.low)
                throw ConfigError("HI bands must partition the range contiguously");
        }
        if (bands.front().low != 0.0 || bands.back().high != 100.0)
            throw ConfigError("HI bands must cover (0,100]");
        if (restoration_hours < 0.0 || unit_replacement_cost < 0.0 || value_of_lost_energy_per_mwh < 0.0)
            throw ConfigError("costs and durations must be non-negative");
    }

    /// Band membership is half-open (low, high]; values at or below 0 take
    /// the lowest band, values above 100 the highest.
    double failure_probability(double hi) const {
        for (const HiBand& b : bands)
            if (hi <= b.high) return b.annual_failure_probability;
        return bands.back().annual_failure_probability;
    }
};

/// Band-midpoint health index for a discrete level under the standard
/// five-level banding: level 1 -> 10, level 2 -> 30, ...
inline double discrete_level_to_hi(int level) { return 20.0 * level - 10.0; }

/// Per-asset health index paths over the horizon. Inspection-year entries
/// come from the health index model on generated conditions; the years
/// between are linear interpolations. replacement_curve[k] is the HI of a
/// freshly installed asset k years after installation (curve[0] = 100).
struct TrajectorySet {
    int start_year = 0;
    std::vector<std::string> asset_ids;
    std::vector<std::vector<double>> hi;
    std::vector<std::vector<bool>> from_inspection;
    std::vector<double> replacement_curve;
    std::vector<double> served_load_mw;

    std::size_t asset_count() const { return asset_ids.size(); }
    std::size_t horizon() const { return hi.empty() ? 0 : hi[0].size(); }

    void validate() const {
        if (hi.size() != asset_ids.size() || from_inspection.size() != asset_ids.size() ||
            served_load_mw.size() != asset_ids.size())
            throw ValidationError("trajectory set: per-asset array size mismatch");
        const std::size_t h = horizon();
        if (replacement_curve.size() != h)
            throw ValidationError("trajectory set: replacement curve length mismatch");
        for (const auto& row : hi) {
            if (row.size() != h) throw ValidationError("trajectory set: ragged HI rows");
            for (double v : row)
                if (v < 0.0 || v > 100.0)
                    throw ValidationError("trajectory HI outside [0,100]");
        }
    }
};

namespace detail {

inline double record_hi(const HealthIndexModel& model, const InspectionRecord& record,
                        const std::vector<ConditionAttribute>& schema) {
    const AttributeValues values = to_model_space(record, schema);
    if (model.mode == HealthIndexMode::discrete)
        return discrete_level_to_hi(model.predict_level(values));
    return model.predict(values);
}

inline void interpolate_between_inspections(std::vector<double>& series,
                                            std::vector<bool>& provenance, int interval) {
    for (std::size_t y = 0; y < series.size(); ++y) {
        if (provenance[y]) continue;
        const std::size_t prev = y - (y % static_cast<std::size_t>(interval));
        const std::size_t next = prev + static_cast<std::size_t>(interval);
        const double f = static_cast<double>(y - prev) / static_cast<double>(interval);
        series[y] = series[prev] + (series[next] - series[prev]) * f;
    }
}

} // namespace detail

/// Rolls the fitted models forward over the horizon, applies the health
/// index model at each generated inspection year, and interpolates the
/// years in between. The horizon must end on an inspection year
/// (horizon - 1 divisible by the interval, at least one interval long).
inline TrajectorySet build_trajectories(const ModelSet& models, const InspectionDataset& seed,
                                        const HealthIndexModel& hi_model,
                                        const SimulationAssumptions& assumptions,
                                        std::uint64_t master_seed,
                                        const GenerationOptions& options = {}) {
    assumptions.validate();
    const int interval = models.inspection_interval_years;
    const int horizon = assumptions.horizon_years;
    if (horizon - 1 < interval)
        throw ConfigError("horizon of " + std::to_string(horizon) +
                          " years is shorter than one " + std::to_string(interval) +
                          "-year inspection interval");
    if ((horizon - 1) % interval != 0)
        throw ConfigError("horizon must end on an inspection year: (horizon-1) must be a multiple of " +
                          std::to_string(interval));
    const int steps = (horizon - 1) / interval;

    GenerationPlan plan;
    plan.steps = steps;
    plan.interval_years = interval;
    plan.mode = GenerationMode::full;
    plan.master_seed = master_seed;
    if (!seed.records.empty()) plan.start_year = seed.records.front().inspection_year;

    const std::vector<InspectionDataset> future = generate_sequence(models, seed, plan, options);

    TrajectorySet out;
    out.start_year = plan.start_year;
    const std::size_t n = seed.records.size();
    out.asset_ids.reserve(n);
    for (const auto& r : seed.records) out.asset_ids.push_back(r.asset_id);
    out.hi.assign(n, std::vector<double>(static_cast<std::size_t>(horizon), 0.0));
    out.from_inspection.assign(n, std::vector<bool>(static_cast<std::size_t>(horizon), false));
    out.served_load_mw.assign(n, assumptions.served_load_mw);

    for (std::size_t i = 0; i < n; ++i) {
        out.hi[i][0] = detail::record_hi(hi_model, seed.records[i], models.schema);
        out.from_inspection[i][0] = true;
        for (int s = 1; s <= steps; ++s) {
            const std::size_t y = static_cast<std::size_t>(s * interval);
            out.hi[i][y] = detail::record_hi(hi_model, future[static_cast<std::size_t>(s - 1)].records[i],
                                             models.schema);
            out.from_inspection[i][y] = true;
        }
        detail::interpolate_between_inspections(out.hi[i], out.from_inspection[i], interval);
    }

    // Trajectory of a freshly installed asset: exactly 100 at installation,
    // then the age-driven expectation path. No conditions are needed at age
    // 0 itself; the first generated inspection is one interval in, safely
    // inside every family's age domain. A fresh asset has no inspection
    // history, so the age-only view (correlation weights 0) applies.
    out.replacement_curve.assign(static_cast<std::size_t>(horizon), 100.0);
    {
        GenerationPlan fresh_plan;
        fresh_plan.steps = steps;
        fresh_plan.interval_years = interval;
        fresh_plan.mode = GenerationMode::age_only;
        fresh_plan.master_seed = derive_seed(master_seed, std::string("replacement-curve"));
        fresh_plan.start_year = plan.start_year;
        GenerationOptions expectation = options;
        expectation.diversify = false;
        expectation.threads = 1;

        InspectionDataset fresh_seed;
        fresh_seed.schema = models.schema;
        fresh_seed.inspection_interval_years = interval;
        fresh_seed.records.push_back({"fresh-install", fresh_plan.start_year, 0.0, {}});
        const auto fresh_path =
            generate_sequence(age_only_view(models), fresh_seed, fresh_plan, expectation);

        std::vector<bool> provenance(static_cast<std::size_t>(horizon), false);
        provenance[0] = true;
        for (int s = 1; s <= steps; ++s) {
            const std::size_t y = static_cast<std::size_t>(s * interval);
            out.replacement_curve[y] = detail::record_hi(
                hi_model, fresh_path[static_cast<std::size_t>(s - 1)].records[0], models.schema);
            provenance[y] = true;
        }
        detail::interpolate_between_inspections(out.replacement_curve, provenance, interval);
    }

    out.validate();
    return out;
}

// ---------------------------------------------------------------------------
// Sequential Monte Carlo cost simulation
// ---------------------------------------------------------------------------

struct CostBreakdown {
    double proactive = 0.0; // PRC
    double reactive = 0.0;  // RRC
    double failure = 0.0;   // FC
    double total = 0.0;     // TOC = PRC + RRC + FC
    double failures = 0.0;  // failure event count
};

struct CostReport {
    int replacement_count = 0;
    std::uint64_t iterations = 0;
    std::vector<CostBreakdown> per_year_mean;
    std::vector<CostBreakdown> per_year_stderr;
    CostBreakdown total_mean;
    CostBreakdown total_stderr;
};

/// Yearly sequential Monte Carlo over the horizon. Each year, the X
/// lowest-HI assets are proactively replaced first (no energy loss, unit
/// cost each), then every asset independently fails with its HI band's
/// annual probability; a failure costs lost energy plus a reactive
/// replacement, and the asset restarts on the fresh-install curve. One
/// uniform draw is consumed per asset-year regardless of outcome, so runs
/// with a common master seed share random numbers across strategies.
inline CostReport simulate(const TrajectorySet& trajectories, const SimulationAssumptions& assumptions,
                           int replacement_count, std::uint64_t iterations, std::uint64_t master_seed,
                           unsigned threads = 1) {
    assumptions.validate();
    trajectories.validate();
    if (iterations == 0) throw ConfigError("simulate: iterations must be >= 1");
    if (replacement_count < 0) throw ConfigError("simulate: replacement count must be >= 0");

    const std::size_t n = trajectories.asset_count();
    const std::size_t horizon = trajectories.horizon();
    if (horizon == 0 || static_cast<int>(horizon) > assumptions.horizon_years)
        throw ConfigError("simulate: trajectory horizon inconsistent with assumptions");
    const int x_effective = std::min<int>(replacement_count, static_cast<int>(n));

    // Per-iteration, per-year results land in preallocated slots; the
    // reduction below runs in iteration order, so any thread count gives
    // bit-identical reports.
    std::vector<std::vector<CostBreakdown>> slots(
        iterations, std::vector<CostBreakdown>(horizon));

    parallel_for(iterations, threads, [&](std::size_t iteration) {
        RandomStream stream(derive_seed(master_seed, static_cast<std::uint64_t>(iteration)));
        std::vector<int> install_year(n, -1); // -1: still the original asset
        std::vector<double> hi_now(n);
        std::vector<char> shielded(n);
        std::vector<std::size_t> order(n);

        for (std::size_t year = 0; year < horizon; ++year) {
            for (std::size_t i = 0; i < n; ++i) {
                hi_now[i] = install_year[i] < 0
                                ? trajectories.hi[i][year]
                                : trajectories.replacement_curve[year - static_cast<std::size_t>(
                                                                            install_year[i])];
                shielded[i] = 0;
            }
            CostBreakdown& y = slots[iteration][year];

            if (x_effective > 0) {
                std::iota(order.begin(), order.end(), std::size_t{0});
                std::nth_element(order.begin(), order.begin() + (x_effective - 1), order.end(),
                                 [&](std::size_t a, std::size_t b) {
                                     if (hi_now[a] != hi_now[b]) return hi_now[a] < hi_now[b];
                                     return a < b;
                                 });
                for (int k = 0; k < x_effective; ++k) {
                    const std::size_t i = order[static_cast<std::size_t>(k)];
                    install_year[i] = static_cast<int>(year);
                    hi_now[i] = 100.0;
                    shielded[i] = 1; // fresh install enters the hazard pool next year
                }
                y.proactive += x_effective * assumptions.unit_replacement_cost;
            }

            for (std::size_t i = 0; i < n; ++i) {
                const double u = stream.uniform(); // always drawn, for common random numbers
                if (shielded[i]) continue;
                const double p = assumptions.failure_probability(hi_now[i]);
                if (u < p) {
                    y.failures += 1.0;
                    y.failure += assumptions.value_of_lost_energy_per_mwh *
                                 trajectories.served_load_mw[i] * assumptions.restoration_hours;
                    y.reactive += assumptions.unit_replacement_cost;
                    install_year[i] = static_cast<int>(year);
                }
            }
            y.total = y.proactive + y.reactive + y.failure;
        }
    });

    CostReport report;
    report.replacement_count = replacement_count;
    report.iterations = iterations;
    report.per_year_mean.assign(horizon, {});
    report.per_year_stderr.assign(horizon, {});

    const double m = static_cast<double>(iterations);
    auto accumulate = [&](auto pick) {
        std::vector<double> year_sum(horizon, 0.0), year_sumsq(horizon, 0.0);
        double total_sum = 0.0, total_sumsq = 0.0;
        for (std::size_t it = 0; it < iterations; ++it) {
            double iteration_total = 0.0;
            for (std::size_t y = 0; y < horizon; ++y) {
                const double v = pick(slots[it][y]);
                year_sum[y] += v;
                year_sumsq[y] += v * v;
                iteration_total += v;
            }
            total_sum += iteration_total;
            total_sumsq += iteration_total * iteration_total;
        }
        auto stderr_of = [&](double sum, double sumsq) {
            if (iterations < 2) return 0.0;
            const double mean = sum / m;
            const double var = std::max(0.0, (sumsq - m * mean * mean) / (m - 1.0));
            return std::sqrt(var / m);
        };
        std::vector<double> year_mean(horizon), year_se(horizon);
        for (std::size_t y = 0; y < horizon; ++y) {
            year_mean[y] = year_sum[y] / m;
            year_se[y] = stderr_of(year_sum[y], year_sumsq[y]);
        }
        return std::tuple{year_mean, year_se, total_sum / m, stderr_of(total_sum, total_sumsq)};
    };

    auto [prc_mean, prc_se, prc_total, prc_total_se] =
        accumulate([](const CostBreakdown& b) { return b.proactive; });
    auto [rrc_mean, rrc_se, rrc_total, rrc_total_se] =
        accumulate([](const CostBreakdown& b) { return b.reactive; });
    auto [fc_mean, fc_se, fc_total, fc_total_se] =
        accumulate([](const CostBreakdown& b) { return b.failure; });
    auto [toc_mean_ignored, toc_se, toc_total_ignored, toc_total_se] =
        accumulate([](const CostBreakdown& b) { return b.total; });
    auto [fail_mean, fail_se, fail_total, fail_total_se] =
        accumulate([](const CostBreakdown& b) { return b.failures; });

    for (std::size_t y = 0; y < horizon; ++y) {
        CostBreakdown& mean = report.per_year_mean[y];
        mean.proactive = prc_mean[y];
        mean.reactive = rrc_mean[y];
        mean.failure = fc_mean[y];
        mean.total = mean.proactive + mean.reactive + mean.failure; // identity by construction
        mean.failures = fail_mean[y];
        CostBreakdown& se = report.per_year_stderr[y];
        se.proactive = prc_se[y];
        se.reactive = rrc_se[y];
        se.failure = fc_se[y];
        se.total = toc_se[y];
        se.failures = fail_se[y];
    }
    report.total_mean.proactive = prc_total;
    report.total_mean.reactive = rrc_total;
    report.total_mean.failure = fc_total;
    report.total_mean.total = prc_total + rrc_total + fc_total;
    report.total_mean.failures = fail_total;
    report.total_stderr.proactive = prc_total_se;
    report.total_stderr.reactive = rrc_total_se;
    report.total_stderr.failure = fc_total_se;
    report.total_stderr.total = toc_total_se;
    report.total_stderr.failures = fail_total_se;
    return report;
}

struct OptimizationResult {
    std::vector<CostReport> reports; // one per candidate, in input order
    int best_replacement_count = 0;
};

/// Runs the cost simulation for every candidate annual replacement count
/// with common random numbers (one shared master seed) and returns the
/// TOC-minimizing X; exact ties go to the smaller X.
inline OptimizationResult optimize_replacement(const TrajectorySet& trajectories,
                                               const SimulationAssumptions& assumptions,
                                               const std::vector<int>& candidates,
                                               std::uint64_t iterations, std::uint64_t master_seed,
                                               unsigned threads = 1) {
    if (candidates.empty()) throw ConfigError("optimize_replacement: empty candidate list");
    OptimizationResult out;
    bool have_best = false;
    double best_toc = 0.0;
    for (int x : candidates) {
        out.reports.push_back(simulate(trajectories, assumptions, x, iterations, master_seed, threads));
        const double toc = out.reports.back().total_mean.total;
        if (!have_best || toc < best_toc || (toc == best_toc && x < out.best_replacement_count)) {
            have_best = true;
            best_toc = toc;
            out.best_replacement_count = x;
        }
    }
    return out;
}

// --- JSON ------------------------------------------------------------------

inline nlohmann::json to_json(const SimulationAssumptions& a) {
    nlohmann::json bands = nlohmann::json::array();
    for (const auto& b : a.bands)
        bands.push_back({{"low", b.low}, {"high", b.high}, {"probability", b.annual_failure_probability}});
    return {{"hi_band_failure_probability", bands},
            {"value_of_lost_energy_per_mwh", a.value_of_lost_energy_per_mwh},
            {"restoration_hours", a.restoration_hours},
            {"unit_replacement_cost", a.unit_replacement_cost},
            {"horizon_years", a.horizon_years},
            {"served_load_mw", a.served_load_mw}};
}

inline SimulationAssumptions assumptions_from_json(const nlohmann::json& j) {
    SimulationAssumptions a;
    if (j.contains("hi_band_failure_probability")) {
        a.bands.clear();
        for (const auto& b : j.at("hi_band_failure_probability"))
            a.bands.push_back({b.at("low").get<double>(), b.at("high").get<double>(),
                               b.at("probability").get<double>()});
    }
    a.value_of_lost_energy_per_mwh =
        j.value("value_of_lost_energy_per_mwh", a.value_of_lost_energy_per_mwh);
    a.restoration_hours = j.value("restoration_hours", a.restoration_hours);
    a.unit_replacement_cost = j.value("unit_replacement_cost", a.unit_replacement_cost);
    a.horizon_years = j.value("horizon_years", a.horizon_years);
    a.served_load_mw = j.value("served_load_mw", a.served_load_mw);
    a.validate();
    return a;
}

inline nlohmann::json to_json(const CostBreakdown& b) {
    return {{"prc", b.proactive},
            {"rrc", b.reactive},
            {"fc", b.failure},
            {"toc", b.total},
            {"failures", b.failures}};
}

inline nlohmann::json to_json(const CostReport& r) {
    nlohmann::json per_year = nlohmann::json::array();
    for (std::size_t y = 0; y < r.per_year_mean.size(); ++y)
        per_year.push_back({{"year_index", y},
                            {"mean", to_json(r.per_year_mean[y])},
                            {"stderr", to_json(r.per_year_stderr[y])}});
    return {{"replacement_count", r.replacement_count},
            {"iterations", r.iterations},
            {"per_year", per_year},
            {"total_mean", to_json(r.total_mean)},
            {"total_stderr", to_json(r.total_stderr)}};
}

} // namespace condgen
