#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "condgen/combined.hpp"
#include "condgen/dataset.hpp"
#include "condgen/error.hpp"
#include "condgen/rng.hpp"

namespace condgen {

// ---------------------------------------------------------------------------
// Gaussian diversification
// ---------------------------------------------------------------------------

/// Per-age noise levels around the deterministic model value. Lookup never
/// fails: an absent age borrows the nearest tabulated age, and an empty
/// table falls back to fallback_fraction of the reference value.
struct SigmaTable {
    std::map<int, double> by_age;
    double fallback_fraction = 0.05;

    double lookup(double age, double reference_value) const {
        if (fallback_fraction <= 0.0 || fallback_fraction > 1.0)
            throw ConfigError("sigma fallback fraction must be in (0,1]");
        const int key = static_cast<int>(std::llround(age));
        auto it = by_age.find(key);
        if (it != by_age.end()) return it->second;
        const double* nearest = nullptr;
        int best_distance = 0;
        for (const auto& [a, sigma] : by_age) {
            const int d = std::abs(a - key);
            if (!nearest || d < best_distance) {
                nearest = &sigma;
                best_distance = d;
            }
        }
        if (nearest) return *nearest;
        return fallback_fraction * std::abs(reference_value);
    }

    void validate() const {
        for (const auto& [age, sigma] : by_age)
            if (sigma < 0.0)
                throw ValidationError("sigma for age " + std::to_string(age) + " is negative");
    }
};

/// Population standard deviation of model residuals, grouped by rounded age.
/// Ages with fewer than two residuals get no entry; lookup handles them via
/// the fallback chain. Population (not sample) std: sigma parameterizes a
/// generator here, and single ages often hold very few records.
inline SigmaTable estimate_sigma(const InspectionDataset& training, const CombinedModel& model,
                                 double fallback_fraction = 0.05) {
    SigmaTable table;
    table.fallback_fraction = fallback_fraction;

    std::map<int, std::vector<double>> residuals;
    auto add_residual = [&](double age, const AttributeValues* previous, double actual) {
        double predicted;
        try {
            predicted = evaluate_combined(model, age, previous);
        } catch (const DomainError&) {
            return; // record outside some term's age domain; skip
        }
        residuals[static_cast<int>(std::llround(age))].push_back(actual - predicted);
    };

    if (model.needs_previous()) {
        for (const RecordPair& p : consecutive_pairs(training)) {
            const InspectionRecord& prev = training.records[p.previous];
            const InspectionRecord& curr = training.records[p.current];
            if (!curr.has_value(model.target)) continue;
            try {
                add_residual(curr.age_years, &prev.values, curr.value(model.target));
            } catch (const ValidationError&) {
                // previous record misses a regressor; skip the pair
            }
        }
    } else {
        for (const auto& r : training.records)
            if (r.has_value(model.target)) add_residual(r.age_years, nullptr, r.value(model.target));
    }

    for (const auto& [age, rs] : residuals) {
        if (rs.size() < 2) continue;
        double mean = 0.0;
        for (double r : rs) mean += r;
        mean /= static_cast<double>(rs.size());
        double var = 0.0;
        for (double r : rs) var += (r - mean) * (r - mean);
        var /= static_cast<double>(rs.size());
        table.by_age.emplace(age, std::sqrt(var));
    }
    return table;
}

/// One Gaussian draw around the model value. sigma == 0 returns the value
/// exactly; negative sigma is an error.
inline double diversify(double value, double sigma, RandomStream& rng) {
    return rng.normal(value, sigma);
}

/// Diversification for physically non-negative conditions: a negative draw
/// is resampled once, and a second negative draw clamps to 0.
inline double diversify_nonnegative(double value, double sigma, RandomStream& rng) {
    double draw = rng.normal(value, sigma);
    if (draw < 0.0) draw = rng.normal(value, sigma);
    return std::max(draw, 0.0);
}

// ---------------------------------------------------------------------------
// Rating <-> numeric conversion
// ---------------------------------------------------------------------------

/// Level i of N maps to the bucket midpoint (i - 1/2) / N in (0, 1).
inline double rating_to_numeric(int level, int levels) {
    if (levels < 2) throw DomainError("rating conversion needs at least 2 levels");
    if (level < 1 || level > levels)
        throw DomainError("rating level " + std::to_string(level) + " outside [1," +
                          std::to_string(levels) + "]");
    return (static_cast<double>(level) - 0.5) / static_cast<double>(levels);
}

/// Nearest bucket midpoint, clamped to [1, N]; exact midway ties go to the
/// lower level. Total function: any real input maps to a valid level.
inline int numeric_to_rating(double x, int levels) {
    if (levels < 2) throw DomainError("rating conversion needs at least 2 levels");
    int best = 1;
    double best_distance = std::abs(x - rating_to_numeric(1, levels));
    for (int i = 2; i <= levels; ++i) {
        const double d = std::abs(x - rating_to_numeric(i, levels));
        if (d < best_distance) {
            best = i;
            best_distance = d;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Per-age categorical distributions
// ---------------------------------------------------------------------------

/// Discrete probability vector over rating levels for every age seen in
/// training. Absent ages average the vectors of present ages within
/// neighbor_window; if none are in the window the single nearest present
/// age is used; an empty table resolves to the user-supplied empirical
/// distribution.
struct CategoricalAgeModel {
    int levels = 0;
    std::map<int, std::vector<double>> by_age;
    int neighbor_window = 2;
    std::optional<std::vector<double>> empirical_default;

    void validate() const {
        if (levels < 2) throw ValidationError("categorical model needs at least 2 levels");
        if (neighbor_window < 1) throw ValidationError("neighbor_window must be >= 1");
        auto check_vector = [&](const std::vector<double>& p, const std::string& where) {
            if (p.size() != static_cast<std::size_t>(levels))
                throw ValidationError("categorical vector " + where + " has wrong length");
            double sum = 0.0;
            for (double v : p) {
                if (v < 0.0) throw ValidationError("categorical vector " + where + " has negative entry");
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw ValidationError("categorical vector " + where + " sums to " + std::to_string(sum));
        };
        for (const auto& [age, p] : by_age) check_vector(p, "for age " + std::to_string(age));
        if (empirical_default) check_vector(*empirical_default, "(empirical default)");
    }

    std::vector<double> resolve(double age) const {
        const int key = static_cast<int>(std::llround(age));
        auto it = by_age.find(key);
        if (it != by_age.end()) return it->second;

        std::vector<double> averaged(static_cast<std::size_t>(levels), 0.0);
        int contributors = 0;
        for (int d = 1; d <= neighbor_window; ++d) {
            for (int neighbor : {key - d, key + d}) {
                auto n = by_age.find(neighbor);
                if (n == by_age.end()) continue;
                for (std::size_t i = 0; i < averaged.size(); ++i) averaged[i] += n->second[i];
                ++contributors;
            }
        }
        if (contributors > 0) {
            for (double& v : averaged) v /= static_cast<double>(contributors);
            return averaged;
        }
        // Nothing in the window: take the single nearest tabulated age.
        const std::vector<double>* nearest = nullptr;
        int best_distance = 0;
        for (const auto& [a, p] : by_age) {
            const int dist = std::abs(a - key);
            if (!nearest || dist < best_distance) {
                nearest = &p;
                best_distance = dist;
            }
        }
        if (nearest) return *nearest;
        if (empirical_default) return *empirical_default;
        throw ConfigError("no categorical distribution resolvable for age " + std::to_string(age) +
                          "; supply an empirical distribution");
    }
};

/// Empirical level frequencies per age: p_i = (records at this age with
/// level i) / (records at this age).
inline CategoricalAgeModel fit_categorical(const InspectionDataset& training,
                                           const std::string& attribute, int neighbor_window = 2) {
    const ConditionAttribute& attr = training.attribute(attribute);
    if (!attr.is_rating())
        throw SchemaError("attribute '" + attribute + "' is not rating-kind");

    CategoricalAgeModel model;
    model.levels = attr.rating_levels;
    model.neighbor_window = neighbor_window;

    std::map<int, std::vector<std::size_t>> counts;
    for (const auto& r : training.records) {
        if (!r.has_value(attribute)) continue;
        const int age = static_cast<int>(std::llround(r.age_years));
        auto& c = counts[age];
        if (c.empty()) c.assign(static_cast<std::size_t>(model.levels), 0);
        const int level = static_cast<int>(r.value(attribute));
        ++c[static_cast<std::size_t>(level - 1)];
    }
    for (const auto& [age, c] : counts) {
        std::size_t total = 0;
        for (std::size_t n : c) total += n;
        std::vector<double> p(c.size());
        for (std::size_t i = 0; i < c.size(); ++i)
            p[i] = static_cast<double>(c[i]) / static_cast<double>(total);
        model.by_age.emplace(age, std::move(p));
    }
    model.validate();
    return model;
}

/// One draw from the distribution resolved for this age; returns a level in
/// [1, N]. Deterministic given the stream state.
inline int sample_categorical(const CategoricalAgeModel& model, double age, RandomStream& rng) {
    const std::vector<double> p = model.resolve(age);
    return static_cast<int>(rng.categorical(p)) + 1;
}

// --- JSON ------------------------------------------------------------------

inline nlohmann::json to_json(const SigmaTable& t) {
    nlohmann::json ages = nlohmann::json::object();
    for (const auto& [age, sigma] : t.by_age) ages[std::to_string(age)] = sigma;
    return {{"fallback_fraction", t.fallback_fraction}, {"by_age", ages}};
}

inline SigmaTable sigma_table_from_json(const nlohmann::json& j) {
    SigmaTable t;
    t.fallback_fraction = j.at("fallback_fraction").get<double>();
    for (const auto& [key, value] : j.at("by_age").items())
        t.by_age.emplace(std::stoi(key), value.get<double>());
    t.validate();
    return t;
}

inline nlohmann::json to_json(const CategoricalAgeModel& m) {
    nlohmann::json ages = nlohmann::json::object();
    for (const auto& [age, p] : m.by_age) ages[std::to_string(age)] = p;
    nlohmann::json j{{"levels", m.levels}, {"neighbor_window", m.neighbor_window}, {"by_age", ages}};
    if (m.empirical_default) j["empirical_default"] = *m.empirical_default;
    return j;
}

inline CategoricalAgeModel categorical_from_json(const nlohmann::json& j) {
    CategoricalAgeModel m;
    m.levels = j.at("levels").get<int>();
    m.neighbor_window = j.at("neighbor_window").get<int>();
    for (const auto& [key, value] : j.at("by_age").items())
        m.by_age.emplace(std::stoi(key), value.get<std::vector<double>>());
    if (j.contains("empirical_default"))
        m.empirical_default = j.at("empirical_default").get<std::vector<double>>();
    m.validate();
    return m;
}

} // namespace condgen
