#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "condgen/combined.hpp"
#include "condgen/csv.hpp"
#include "condgen/dataset.hpp"
#include "condgen/error.hpp"
#include "condgen/parallel.hpp"
#include "condgen/rng.hpp"
#include "condgen/stochastic.hpp"

namespace condgen {

enum class GenerationMode { full, age_only };

struct GenerationPlan {
    int start_year = 0;
    int steps = 1;
    int interval_years = 1;
    GenerationMode mode = GenerationMode::full;
    std::uint64_t master_seed = 0;
};

struct GenerationOptions {
    bool diversify = true;         // false = deterministic expectation path
    bool truncate_at_zero = true;  // negative draws: resample once, then clamp
    unsigned threads = 1;
};

/// Everything needed to generate one attribute. Rating attributes either
/// carry a categorical age model, or (convert policy) a combined model over
/// the (0,1) conversion of levels.
struct AttributeModels {
    std::optional<CombinedModel> combined;
    SigmaTable sigma;
    std::optional<CategoricalAgeModel> categorical;
    RatingPolicy rating_policy = RatingPolicy::categorical;
};

/// The full fitted bundle for a dataset: per-attribute models plus the
/// schema they were fitted against. Values inside the models live in
/// model space: direction-normalized, with every rating attribute mapped
/// through its (i - 1/2)/N conversion. The recorded direction transforms
/// let callers map generated data back to raw values.
struct ModelSet {
    std::vector<ConditionAttribute> schema;
    int inspection_interval_years = 1;
    DirectionTransforms direction_transforms;
    std::map<std::string, AttributeModels> attributes;

    const AttributeModels& models_for(const std::string& name) const {
        auto it = attributes.find(name);
        if (it == attributes.end()) throw ConfigError("no models for attribute '" + name + "'");
        return it->second;
    }

    /// Every schema attribute must have a usable model; uncovered attributes
    /// are all listed in one error.
    void check_covers(const std::vector<ConditionAttribute>& target_schema) const {
        std::string uncovered;
        for (const auto& a : target_schema) {
            auto it = attributes.find(a.name);
            bool ok = it != attributes.end();
            if (ok) {
                const AttributeModels& m = it->second;
                if (a.is_rating() && m.rating_policy == RatingPolicy::categorical)
                    ok = m.categorical.has_value();
                else
                    ok = m.combined.has_value();
            }
            if (!ok) uncovered += (uncovered.empty() ? "" : ", ") + a.name;
        }
        if (!uncovered.empty())
            throw ConfigError("attributes without models: " + uncovered);
    }
};

namespace detail {

/// Record values as the numerical models see them: ratings mapped through
/// their (i - 1/2)/N conversion, numericals untouched.
inline AttributeValues to_model_space(const InspectionRecord& r,
                                      const std::vector<ConditionAttribute>& schema) {
    AttributeValues out;
    for (const auto& a : schema) {
        auto it = r.values.find(a.name);
        if (it == r.values.end()) continue;
        out[a.name] = a.is_rating() ? rating_to_numeric(static_cast<int>(it->second), a.rating_levels)
                                    : it->second;
    }
    return out;
}

inline InspectionRecord generate_record(const ModelSet& models, const InspectionRecord& current,
                                        const GenerationPlan& plan, int step_index,
                                        const GenerationOptions& options) {
    InspectionRecord out;
    out.asset_id = current.asset_id;
    out.inspection_year = current.inspection_year + plan.interval_years;
    out.age_years = current.age_years + plan.interval_years;

    RandomStream stream(derive_seed(plan.master_seed, static_cast<std::uint64_t>(step_index),
                                    current.asset_id));
    const AttributeValues previous = to_model_space(current, models.schema);
    const AttributeValues* prev_ptr = plan.mode == GenerationMode::full ? &previous : nullptr;

    for (const auto& attr : models.schema) {
        const AttributeModels& am = models.models_for(attr.name);
        try {
            if (attr.is_rating() && am.rating_policy == RatingPolicy::categorical) {
                const int level = sample_categorical(*am.categorical, out.age_years, stream);
                out.values[attr.name] = static_cast<double>(level);
                continue;
            }
            if (!am.combined)
                throw ConfigError("attribute '" + attr.name + "' has no combined model");
            double value = evaluate_combined(*am.combined, out.age_years, prev_ptr);
            if (options.diversify) {
                const double sigma = am.sigma.lookup(out.age_years, value);
                value = options.truncate_at_zero ? diversify_nonnegative(value, sigma, stream)
                                                 : diversify(value, sigma, stream);
            }
            if (attr.is_rating())
                out.values[attr.name] =
                    static_cast<double>(numeric_to_rating(value, attr.rating_levels));
            else
                out.values[attr.name] = value;
        } catch (const Error& e) {
            throw ValidationError("asset '" + current.asset_id + "', attribute '" + attr.name +
                                  "': " + e.what());
        }
    }
    return out;
}

} // namespace detail

/// One inspection cycle forward: every asset ages by the interval and every
/// schema attribute is drawn from its model. Per-asset random streams are
/// derived from (master seed, step, asset id), so output is byte-identical
/// for any worker count or record order.
inline InspectionDataset generate_step(const ModelSet& models, const InspectionDataset& current,
                                       const GenerationPlan& plan, int step_index = 1,
                                       const GenerationOptions& options = {}) {
    models.check_covers(current.schema);
    InspectionDataset out;
    out.schema = current.schema;
    out.inspection_interval_years = plan.interval_years;
    out.records.resize(current.records.size());
    std::vector<std::string> failures(current.records.size());
    parallel_for(current.records.size(), options.threads, [&](std::size_t i) {
        try {
            out.records[i] =
                detail::generate_record(models, current.records[i], plan, step_index, options);
        } catch (const Error& e) {
            failures[i] = e.what();
        }
    });
    for (const auto& f : failures)
        if (!f.empty()) throw ValidationError(f);
    return out;
}

/// Sequential rollout: step k consumes step k-1's output.
inline std::vector<InspectionDataset> generate_sequence(const ModelSet& models,
                                                        const InspectionDataset& seed,
                                                        const GenerationPlan& plan,
                                                        const GenerationOptions& options = {}) {
    if (plan.steps < 1) throw ConfigError("generation plan needs at least one step");
    std::vector<InspectionDataset> out;
    const InspectionDataset* current = &seed;
    for (int step = 1; step <= plan.steps; ++step) {
        try {
            out.push_back(generate_step(models, *current, plan, step, options));
        } catch (const Error& e) {
            throw ValidationError("generation step " + std::to_string(step) + ": " + e.what());
        }
        current = &out.back();
    }
    return out;
}

/// Age-only view of a model bundle: every correlation-backed weight is
/// pinned to 0, leaving the age-driven terms. This is how a combined model
/// is applied when no inspection history exists.
inline ModelSet age_only_view(const ModelSet& models) {
    ModelSet out = models;
    for (auto& [name, am] : out.attributes) {
        if (!am.combined) continue;
        for (auto& t : am.combined->correlation_terms) {
            t.weight = 0.0;
            t.policy = 0.0;
        }
        for (auto& t : am.combined->empirical_terms) {
            if (std::holds_alternative<CorrelationModel>(t.model.form)) {
                t.weight = 0.0;
                t.policy = 0.0;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hypothetical cohorts
// ---------------------------------------------------------------------------

struct AgeDistribution {
    enum class Kind { constant, uniform };
    Kind kind = Kind::constant;
    double value = 0.0;       // constant
    double low = 0.0, high = 0.0; // uniform

    double sample(RandomStream& rng) const {
        if (kind == Kind::constant) return value;
        return rng.uniform(low, high);
    }
};

/// Builds a cohort from scratch (ages drawn from the given distribution,
/// conditions from the age-driven models) and rolls it forward. Element 0
/// of the result is the synthesized starting cohort, followed by one
/// dataset per plan step.
inline std::vector<InspectionDataset> generate_hypothetical(const ModelSet& models,
                                                            std::size_t asset_count,
                                                            const AgeDistribution& ages,
                                                            const GenerationPlan& plan,
                                                            const GenerationOptions& options = {}) {
    InspectionDataset cohort;
    cohort.schema = models.schema;
    cohort.inspection_interval_years = plan.interval_years;
    models.check_covers(cohort.schema);

    cohort.records.resize(asset_count);
    std::vector<std::string> failures(asset_count);
    parallel_for(asset_count, options.threads, [&](std::size_t i) {
        try {
            InspectionRecord seed;
            seed.asset_id = "h" + std::to_string(i);
            seed.inspection_year = plan.start_year - plan.interval_years;
            RandomStream age_stream(derive_seed(plan.master_seed, std::uint64_t{0}, seed.asset_id));
            seed.age_years = ages.sample(age_stream) - plan.interval_years;
            if (seed.age_years < -plan.interval_years)
                throw ConfigError("age distribution produced a negative age");
            // Synthesize the starting cohort as one age-only step onto the
            // drawn age, so initial values follow the same draw path.
            GenerationPlan initial = plan;
            initial.mode = GenerationMode::age_only;
            cohort.records[i] = detail::generate_record(models, seed, initial, 0, options);
        } catch (const Error& e) {
            failures[i] = e.what();
        }
    });
    for (const auto& f : failures)
        if (!f.empty()) throw ValidationError(f);

    std::vector<InspectionDataset> out;
    out.push_back(std::move(cohort));
    if (plan.steps > 0) {
        GenerationPlan forward = plan;
        auto rolled = generate_sequence(models, out.front(), forward, options);
        for (auto& ds : rolled) out.push_back(std::move(ds));
    }
    return out;
}

// --- JSON ------------------------------------------------------------------

inline nlohmann::json to_json(const AttributeModels& m) {
    nlohmann::json j;
    if (m.combined) j["combined"] = to_json(*m.combined);
    j["sigma"] = to_json(m.sigma);
    if (m.categorical) j["categorical"] = to_json(*m.categorical);
    j["rating_policy"] = m.rating_policy == RatingPolicy::convert ? "convert" : "categorical";
    return j;
}

inline AttributeModels attribute_models_from_json(const nlohmann::json& j) {
    AttributeModels m;
    if (j.contains("combined")) m.combined = combined_from_json(j.at("combined"));
    m.sigma = sigma_table_from_json(j.at("sigma"));
    if (j.contains("categorical")) m.categorical = categorical_from_json(j.at("categorical"));
    m.rating_policy =
        j.value("rating_policy", "categorical") == std::string("convert") ? RatingPolicy::convert
                                                                          : RatingPolicy::categorical;
    return m;
}

inline nlohmann::json to_json(const ModelSet& s) {
    nlohmann::json j;
    j["schema"] = nlohmann::json::array();
    for (const auto& a : s.schema) j["schema"].push_back(attribute_to_json(a));
    j["inspection_interval_years"] = s.inspection_interval_years;
    j["direction_transforms"] = nlohmann::json::object();
    for (const auto& [name, t] : s.direction_transforms)
        j["direction_transforms"][name] = {
            {"kind", t.kind == DirectionTransform::Kind::rating_flip ? "rating_flip" : "numeric_reflect"},
            {"reference", t.reference}};
    j["attributes"] = nlohmann::json::object();
    for (const auto& [name, m] : s.attributes) j["attributes"][name] = to_json(m);
    return j;
}

inline ModelSet model_set_from_json(const nlohmann::json& j) {
    ModelSet s;
    for (const auto& a : j.at("schema")) s.schema.push_back(attribute_from_json(a));
    s.inspection_interval_years = j.at("inspection_interval_years").get<int>();
    for (const auto& [name, t] : j.at("direction_transforms").items()) {
        DirectionTransform dt;
        dt.kind = t.at("kind").get<std::string>() == "rating_flip"
                      ? DirectionTransform::Kind::rating_flip
                      : DirectionTransform::Kind::numeric_reflect;
        dt.reference = t.at("reference").get<double>();
        s.direction_transforms.emplace(name, dt);
    }
    for (const auto& [name, m] : j.at("attributes").items())
        s.attributes.emplace(name, attribute_models_from_json(m));
    return s;
}

inline nlohmann::json to_json(const GenerationPlan& p) {
    return {{"start_year", p.start_year},
            {"steps", p.steps},
            {"interval_years", p.interval_years},
            {"mode", p.mode == GenerationMode::age_only ? "age_only" : "full"},
            {"master_seed", p.master_seed}};
}

inline GenerationPlan plan_from_json(const nlohmann::json& j) {
    GenerationPlan p;
    p.start_year = j.at("start_year").get<int>();
    p.steps = j.at("steps").get<int>();
    p.interval_years = j.at("interval_years").get<int>();
    const std::string mode = j.value("mode", "full");
    if (mode == "age_only")
        p.mode = GenerationMode::age_only;
    else if (mode == "full")
        p.mode = GenerationMode::full;
    else
        throw ConfigError("unknown generation mode '" + mode + "'");
    p.master_seed = j.value("master_seed", std::uint64_t{0});
    if (p.steps < 1) throw ConfigError("generation plan needs steps >= 1");
    if (p.interval_years < 1) throw ConfigError("generation plan needs interval_years >= 1");
    return p;
}

inline nlohmann::json to_json(const AgeDistribution& d) {
    if (d.kind == AgeDistribution::Kind::constant)
        return {{"kind", "constant"}, {"value", d.value}};
    return {{"kind", "uniform"}, {"low", d.low}, {"high", d.high}};
}

inline AgeDistribution age_distribution_from_json(const nlohmann::json& j) {
    AgeDistribution d;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") {
        d.kind = AgeDistribution::Kind::constant;
        d.value = j.at("value").get<double>();
    } else if (kind == "uniform") {
        d.kind = AgeDistribution::Kind::uniform;
        d.low = j.at("low").get<double>();
        d.high = j.at("high").get<double>();
        if (d.low > d.high) throw ConfigError("age distribution: low > high");
    } else {
        throw ConfigError("unknown age distribution kind '" + kind + "'");
    }
    return d;
}

} // namespace condgen
