#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "condgen/generation.hpp"
#include "condgen/health_index.hpp"
#include "condgen/metrics.hpp"
#include "condgen/pipeline.hpp"

namespace condgen {

struct ValidationConfig {
    std::vector<ConditionModelSpec> specs;
    std::uint64_t master_seed = 1;
    int kl_bins = 20;
    unsigned threads = 1;
    FitOptions fit;
};

/// One row of a Test I / Test II style table.
struct ConditionMetrics {
    std::string condition;
    bool is_rating = false;
    std::size_t sample_count = 0;
    std::optional<double> kl;            // actual vs diversified generated
    std::optional<double> benchmark_kl;  // actual vs uniform reference draws
    std::optional<double> mape_expected; // deterministic expectation path
    std::optional<double> mape_diversified;
    std::optional<double> r2_expected;
    std::optional<double> cmp_expected;  // convert-policy ratings only
    std::optional<double> cmp_diversified;
};

namespace detail {

struct PairedSets {
    InspectionDataset previous;       // normalized space
    std::vector<std::size_t> current; // indices into the raw test dataset
};

/// Pairs whose previous record is complete; generation needs every
/// attribute of the previous inspection.
inline PairedSets paired_test_sets(const InspectionDataset& test_normalized) {
    PairedSets out;
    out.previous.schema = test_normalized.schema;
    out.previous.inspection_interval_years = test_normalized.inspection_interval_years;
    for (const RecordPair& p : consecutive_pairs(test_normalized)) {
        const InspectionRecord& prev = test_normalized.records[p.previous];
        bool complete = true;
        for (const auto& a : test_normalized.schema) complete &= prev.has_value(a.name);
        if (!complete) continue;
        out.previous.records.push_back(prev);
        out.current.push_back(p.current);
    }
    return out;
}

} // namespace detail

/// Scores one-step generation from the fitted models against held-out
/// actuals, in raw value space. Used by Test I (full information) and
/// Test II (age-only) and, with distributions disabled, by the training
/// size sweep.
inline std::vector<ConditionMetrics> score_one_step(const FitReport& fit,
                                                    const InspectionDataset& test_raw,
                                                    const ValidationConfig& config,
                                                    GenerationMode mode,
                                                    bool with_distributions = true) {
    const InspectionDataset test_normalized = apply_direction(test_raw, fit.models.direction_transforms);
    const detail::PairedSets pairs = detail::paired_test_sets(test_normalized);
    if (pairs.current.empty())
        throw InsufficientDataError("validation: no complete consecutive-inspection pairs in test data");

    GenerationPlan plan;
    plan.steps = 1;
    plan.interval_years = test_raw.inspection_interval_years;
    plan.mode = mode;
    plan.master_seed = config.master_seed;

    GenerationOptions expected_opts;
    expected_opts.diversify = false;
    expected_opts.threads = config.threads;
    const InspectionDataset generated_expected_raw = invert_direction(
        generate_step(fit.models, pairs.previous, plan, 1, expected_opts),
        fit.models.direction_transforms);

    InspectionDataset generated_diversified_raw;
    if (with_distributions) {
        GenerationOptions div_opts;
        div_opts.threads = config.threads;
        generated_diversified_raw = invert_direction(
            generate_step(fit.models, pairs.previous, plan, 1, div_opts),
            fit.models.direction_transforms);
    }

    std::vector<ConditionMetrics> rows;
    for (const auto& attr : test_raw.schema) {
        ConditionMetrics row;
        row.condition = attr.name;
        row.is_rating = attr.is_rating();

        std::vector<double> actual, gen_expected, gen_diversified;
        std::vector<int> actual_levels, expected_levels, diversified_levels;
        for (std::size_t k = 0; k < pairs.current.size(); ++k) {
            const InspectionRecord& curr = test_raw.records[pairs.current[k]];
            if (!curr.has_value(attr.name)) continue;
            const double a = curr.value(attr.name);
            actual.push_back(a);
            gen_expected.push_back(generated_expected_raw.records[k].value(attr.name));
            if (with_distributions)
                gen_diversified.push_back(generated_diversified_raw.records[k].value(attr.name));
            if (attr.is_rating()) {
                actual_levels.push_back(static_cast<int>(a));
                expected_levels.push_back(static_cast<int>(gen_expected.back()));
                if (with_distributions)
                    diversified_levels.push_back(static_cast<int>(gen_diversified.back()));
            }
        }
        row.sample_count = actual.size();
        if (actual.empty()) {
            rows.push_back(row);
            continue;
        }

        if (attr.is_rating()) {
            const AttributeModels& am = fit.models.models_for(attr.name);
            if (am.rating_policy == RatingPolicy::convert)
                row.cmp_expected = cmp(actual_levels, expected_levels);
            if (with_distributions) row.cmp_diversified = cmp(actual_levels, diversified_levels);
        } else {
            row.mape_expected = mape(actual, gen_expected);
            if (actual.size() >= 2) row.r2_expected = r_squared(actual, gen_expected);
            if (with_distributions) {
                row.mape_diversified = mape(actual, gen_diversified);
                row.kl = kl_divergence(actual, gen_diversified, config.kl_bins);
                double lo = actual[0], hi = actual[0];
                for (double v : actual) {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                RandomStream bench_rng(derive_seed(config.master_seed, std::string("benchmark"),
                                                   attr.name));
                const std::vector<double> reference =
                    benchmark_uniform(lo, hi, actual.size(), bench_rng);
                row.benchmark_kl = kl_divergence(actual, reference, config.kl_bins);
            }
        }
        rows.push_back(row);
    }
    return rows;
}

/// Test I: given age and the previous inspection, score one-step generation.
inline std::vector<ConditionMetrics> run_test1(const InspectionDataset& train_raw,
                                               const InspectionDataset& test_raw,
                                               const ValidationConfig& config) {
    const FitReport fit = fit_model_set(train_raw, config.specs, config.fit);
    return score_one_step(fit, test_raw, config, GenerationMode::full);
}

/// Test II: age only. Correlation terms are pinned to weight 0 and the
/// remaining weights re-estimated, then generation runs in age-only mode.
inline std::vector<ConditionMetrics> run_test2(const InspectionDataset& train_raw,
                                               const InspectionDataset& test_raw,
                                               const ValidationConfig& config) {
    ValidationConfig age_only = config;
    for (auto& spec : age_only.specs)
        for (auto& term : spec.correlation) term.fixed_weight = 0.0;
    const FitReport fit = fit_model_set(train_raw, age_only.specs, age_only.fit);
    return score_one_step(fit, test_raw, age_only, GenerationMode::age_only);
}

// ---------------------------------------------------------------------------
// Test III: health-index level comparison
// ---------------------------------------------------------------------------

struct HiValidation {
    HealthIndexMode mode = HealthIndexMode::continuous;
    std::size_t sample_count = 0;
    std::optional<double> mape_value; // continuous HI
    std::optional<double> himp_value; // discrete HI
};

/// Trains the health index model on labeled training conditions, then
/// compares HI predicted from actual test conditions (ground truth) against
/// HI predicted from generated test conditions.
inline HiValidation run_test3(const InspectionDataset& train_raw, const InspectionDataset& test_raw,
                              const ValidationConfig& config, const HealthIndexConfig& hi_config,
                              const std::function<double(const InspectionRecord&)>& label_of) {
    const FitReport fit = fit_model_set(train_raw, config.specs, config.fit);

    // Health index rules are extracted over the model-space view so actual
    // and generated conditions feed the model identically.
    const InspectionDataset train_model_space = to_model_space_dataset(
        apply_direction(train_raw, fit.models.direction_transforms));
    std::vector<std::string> features;
    for (const auto& a : train_model_space.schema) features.push_back(a.name);

    std::vector<AttributeValues> hi_rows;
    std::vector<double> hi_labels;
    for (std::size_t i = 0; i < train_model_space.records.size(); ++i) {
        const InspectionRecord& rec = train_model_space.records[i];
        bool complete = true;
        for (const auto& f : features) complete &= rec.has_value(f);
        if (!complete) continue;
        hi_rows.push_back(rec.values);
        hi_labels.push_back(label_of(train_raw.records[i]));
    }
    const HealthIndexModel hi_model = train_health_index(features, hi_rows, hi_labels, hi_config).model;

    const InspectionDataset test_normalized = apply_direction(test_raw, fit.models.direction_transforms);
    const detail::PairedSets pairs = detail::paired_test_sets(test_normalized);
    if (pairs.current.empty())
        throw InsufficientDataError("validation: no complete consecutive-inspection pairs in test data");

    GenerationPlan plan;
    plan.steps = 1;
    plan.interval_years = test_raw.inspection_interval_years;
    plan.mode = GenerationMode::full;
    plan.master_seed = config.master_seed;
    GenerationOptions opts;
    opts.threads = config.threads;
    const InspectionDataset generated = generate_step(fit.models, pairs.previous, plan, 1, opts);

    HiValidation out;
    out.mode = hi_config.mode;
    std::vector<double> hi_actual, hi_generated;
    std::vector<int> level_actual, level_generated;
    for (std::size_t k = 0; k < pairs.current.size(); ++k) {
        const InspectionRecord& actual = test_normalized.records[pairs.current[k]];
        bool complete = true;
        for (const auto& f : features) complete &= actual.has_value(f);
        if (!complete) continue;
        const AttributeValues actual_values = detail::to_model_space(actual, test_normalized.schema);
        const AttributeValues generated_values =
            detail::to_model_space(generated.records[k], test_normalized.schema);
        if (hi_config.mode == HealthIndexMode::discrete) {
            level_actual.push_back(hi_model.predict_level(actual_values));
            level_generated.push_back(hi_model.predict_level(generated_values));
        } else {
            hi_actual.push_back(hi_model.predict(actual_values));
            hi_generated.push_back(hi_model.predict(generated_values));
        }
    }
    if (hi_config.mode == HealthIndexMode::discrete) {
        out.sample_count = level_actual.size();
        out.himp_value = himp(level_actual, level_generated);
    } else {
        out.sample_count = hi_actual.size();
        out.mape_value = mape(hi_actual, hi_generated);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Test IV: training size sweep
// ---------------------------------------------------------------------------

struct SizeSweepPoint {
    std::size_t training_assets = 0;
    double mean_mape = 0.0; // expectation-path MAPE averaged over numerical conditions
    double stderr_mape = 0.0;
    std::size_t repeats = 0;
};

/// Subsamples the training assets at each size (fresh random subset per
/// repeat), refits, and scores expectation-path MAPE on the fixed test set.
inline std::vector<SizeSweepPoint> run_test4(const InspectionDataset& train_raw,
                                             const InspectionDataset& test_raw,
                                             const ValidationConfig& config,
                                             const std::vector<std::size_t>& sizes,
                                             std::size_t repeats = 10) {
    std::vector<std::string> asset_ids;
    {
        std::set<std::string> unique;
        for (const auto& r : train_raw.records) unique.insert(r.asset_id);
        asset_ids.assign(unique.begin(), unique.end());
    }

    std::vector<SizeSweepPoint> out;
    for (std::size_t size : sizes) {
        if (size > asset_ids.size())
            throw ConfigError("size sweep: requested " + std::to_string(size) + " assets, have " +
                              std::to_string(asset_ids.size()));
        SizeSweepPoint point;
        point.training_assets = size;
        point.repeats = repeats;
        std::vector<double> scores;
        for (std::size_t rep = 0; rep < repeats; ++rep) {
            // Deterministic subsample: order assets by a per-(size, rep) hash.
            std::vector<std::string> order = asset_ids;
            const std::uint64_t salt = derive_seed(config.master_seed, std::string("sweep"),
                                                   static_cast<std::uint64_t>(size),
                                                   static_cast<std::uint64_t>(rep));
            std::sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
                return mix64(salt ^ hash_text(a)) < mix64(salt ^ hash_text(b));
            });
            order.resize(size);
            const std::set<std::string> chosen(order.begin(), order.end());

            InspectionDataset subset;
            subset.schema = train_raw.schema;
            subset.inspection_interval_years = train_raw.inspection_interval_years;
            for (const auto& r : train_raw.records)
                if (chosen.count(r.asset_id)) subset.records.push_back(r);

            const FitReport fit = fit_model_set(subset, config.specs, config.fit);
            const auto rows = score_one_step(fit, test_raw, config, GenerationMode::full,
                                             /*with_distributions=*/false);
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto& row : rows) {
                if (!row.mape_expected) continue;
                sum += *row.mape_expected;
                ++n;
            }
            if (n == 0) throw InsufficientDataError("size sweep: no numerical conditions scored");
            scores.push_back(sum / static_cast<double>(n));
        }
        double mean = 0.0;
        for (double s : scores) mean += s;
        mean /= static_cast<double>(scores.size());
        double var = 0.0;
        for (double s : scores) var += (s - mean) * (s - mean);
        point.mean_mape = mean;
        point.stderr_mape = scores.size() > 1
                                ? std::sqrt(var / (static_cast<double>(scores.size()) - 1.0) /
                                            static_cast<double>(scores.size()))
                                : 0.0;
        out.push_back(point);
    }
    return out;
}

// --- JSON / CSV rendering ----------------------------------------------------

inline nlohmann::json to_json(const ConditionMetrics& m) {
    auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    return {{"condition", m.condition},
            {"is_rating", m.is_rating},
            {"sample_count", m.sample_count},
            {"kl", opt(m.kl)},
            {"benchmark_kl", opt(m.benchmark_kl)},
            {"mape_expected", opt(m.mape_expected)},
            {"mape_diversified", opt(m.mape_diversified)},
            {"r2_expected", opt(m.r2_expected)},
            {"cmp_expected", opt(m.cmp_expected)},
            {"cmp_diversified", opt(m.cmp_diversified)}};
}

inline std::string metrics_table_csv(const std::vector<ConditionMetrics>& rows) {
    std::ostringstream out;
    out << "condition,kind,samples,kl,benchmark_kl,mape_expected,mape_diversified,r2_expected,"
           "cmp_expected,cmp_diversified\n";
    auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& r : rows) {
        out << r.condition << ',' << (r.is_rating ? "rating" : "numerical") << ',' << r.sample_count
            << ',' << cell(r.kl) << ',' << cell(r.benchmark_kl) << ',' << cell(r.mape_expected) << ','
            << cell(r.mape_diversified) << ',' << cell(r.r2_expected) << ',' << cell(r.cmp_expected)
            << ',' << cell(r.cmp_diversified) << '\n';
    }
    return out.str();
}

inline nlohmann::json to_json(const SizeSweepPoint& p) {
    return {{"training_assets", p.training_assets},
            {"mean_mape", p.mean_mape},
            {"stderr_mape", p.stderr_mape},
            {"repeats", p.repeats}};
}

inline std::string size_sweep_csv(const std::vector<SizeSweepPoint>& points) {
    std::ostringstream out;
    out << "training_assets,mean_mape,stderr_mape,repeats\n";
    for (const auto& p : points)
        out << p.training_assets << ',' << format_double(p.mean_mape) << ','
            << format_double(p.stderr_mape) << ',' << p.repeats << '\n';
    return out.str();
}

} // namespace condgen
