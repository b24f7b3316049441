#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "condgen/correlation.hpp"
#include "condgen/dataset.hpp"
#include "condgen/degradation.hpp"
#include "condgen/error.hpp"
#include "condgen/linalg.hpp"

namespace condgen {

/// nullopt = weight is estimated; a value = weight is pinned by the engineer.
using WeightPolicy = std::optional<double>;

/// An expert-supplied sub-model. Locked models keep their parameters
/// bit-identical through any fitting pass.
struct EmpiricalModel {
    std::string description;
    std::variant<DegradationModel, CorrelationModel> form;
    bool locked = true;
};

struct DegradationTerm {
    DegradationModel model;
    double weight = 1.0;
    WeightPolicy policy; // nullopt = free
};

struct CorrelationTerm {
    CorrelationModel model;
    double weight = 1.0;
    WeightPolicy policy;
};

struct EmpiricalTerm {
    EmpiricalModel model;
    double weight = 1.0;
    WeightPolicy policy;
};

/// Weighted sum of age-driven, correlation and expert models for one
/// condition attribute. Weights are plain reals; nothing forces them
/// non-negative or normalized (an optional non-negativity constraint is
/// available at estimation time for interpretability).
struct CombinedModel {
    std::string target;
    std::vector<DegradationTerm> degradation_terms;
    std::vector<CorrelationTerm> correlation_terms;
    std::vector<EmpiricalTerm> empirical_terms;

    std::size_t term_count() const {
        return degradation_terms.size() + correlation_terms.size() + empirical_terms.size();
    }

    bool needs_previous() const {
        for (const auto& t : correlation_terms)
            if (t.weight != 0.0) return true;
        for (const auto& t : empirical_terms)
            if (t.weight != 0.0 && std::holds_alternative<CorrelationModel>(t.model.form)) return true;
        return false;
    }
};

namespace detail {

inline double empirical_value(const EmpiricalModel& m, double age, const AttributeValues* previous) {
    if (const auto* d = std::get_if<DegradationModel>(&m.form)) return evaluate(*d, age);
    const auto& c = std::get<CorrelationModel>(m.form);
    if (!previous)
        throw ValidationError("empirical correlation term needs a previous-inspection record");
    return predict(c, *previous);
}

} // namespace detail

/// Weighted sum over all terms. Zero-weight terms are skipped entirely so
/// that adding one never changes the result or introduces new domain
/// requirements. Correlation terms with nonzero weight require a
/// previous-inspection record.
inline double evaluate_combined(const CombinedModel& m, double age, const AttributeValues* previous) {
    double sum = 0.0;
    for (const auto& t : m.degradation_terms) {
        if (t.weight == 0.0) continue;
        sum += t.weight * evaluate(t.model, age);
    }
    for (const auto& t : m.correlation_terms) {
        if (t.weight == 0.0) continue;
        if (!previous)
            throw ValidationError("combined model '" + m.target +
                                  "': correlation term has nonzero weight but no previous record given");
        sum += t.weight * predict(t.model, *previous);
    }
    for (const auto& t : m.empirical_terms) {
        if (t.weight == 0.0) continue;
        sum += t.weight * detail::empirical_value(t.model, age, previous);
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Condition model specification and two-step estimation
// ---------------------------------------------------------------------------

struct DegradationTermSpec {
    DegradationFamily family = DegradationFamily::linear;
    WeightPolicy fixed_weight;
};

struct CorrelationTermSpec {
    std::vector<std::string> regressors;
    WeightPolicy fixed_weight;
};

struct EmpiricalTermSpec {
    EmpiricalModel model;
    WeightPolicy fixed_weight;
};

/// How a rating attribute is generated: from per-age categorical
/// distributions, or by converting to (0,1), running the numerical models
/// and converting back.
enum class RatingPolicy { categorical, convert };

/// Per-condition modelling recipe. Families and correlated sets are chosen
/// by the user from observed degradation patterns; nothing here is
/// auto-selected.
struct ConditionModelSpec {
    std::string target;
    std::vector<DegradationTermSpec> degradation;
    std::vector<CorrelationTermSpec> correlation;
    std::vector<EmpiricalTermSpec> empirical;
    RatingPolicy rating_policy = RatingPolicy::categorical;

    std::size_t term_count() const { return degradation.size() + correlation.size() + empirical.size(); }
};

struct EstimateOptions {
    bool nonnegative_weights = false;
};

struct EstimateDiagnostics {
    double residual_sum_of_squares = 0.0;
    std::size_t weight_rows = 0;        // rows used by the weight regression
    std::size_t skipped_rows = 0;       // rows outside some term's age domain
    bool rank_deficient = false;        // collinear term outputs, minimum-norm weights
    bool correlation_disabled = false;  // no usable pairs; correlation weights fixed to 0
    std::vector<std::string> notes;
};

struct CombinedEstimate {
    CombinedModel model;
    EstimateDiagnostics diagnostics;
};

/// Two-step estimation: (1) each unlocked sub-model is fitted on its own by
/// its module's least-squares fit; (2) the free weights are solved by least
/// squares over the sub-model outputs, holding engineer-fixed weights
/// constant. With single-year data (no consecutive pairs) all correlation
/// weights are fixed to 0 and the remaining terms are estimated from ages
/// alone.
inline CombinedEstimate estimate(const ConditionModelSpec& spec, const InspectionDataset& training,
                                 const EstimateOptions& options = {}) {
    if (spec.term_count() == 0)
        throw ConfigError("condition '" + spec.target + "': needs at least one term");
    training.attribute(spec.target); // throws on unknown target

    CombinedEstimate out;
    out.model.target = spec.target;

    // Age samples: every record carrying the target.
    std::vector<AgeSample> age_samples;
    for (const auto& r : training.records)
        if (r.has_value(spec.target)) age_samples.push_back({r.age_years, r.value(spec.target)});

    // Consecutive-inspection pairs; previous record must carry every
    // regressor of at least the requesting term, current must carry the target.
    const std::vector<RecordPair> all_pairs = consecutive_pairs(training);

    auto pairs_for = [&](const std::vector<std::string>& regressors) {
        std::vector<CorrelationSample> ps;
        for (const RecordPair& p : all_pairs) {
            const InspectionRecord& prev = training.records[p.previous];
            const InspectionRecord& curr = training.records[p.current];
            if (!curr.has_value(spec.target)) continue;
            bool complete = true;
            for (const auto& reg : regressors) complete &= prev.has_value(reg);
            if (!complete) continue;
            ps.push_back({prev.values, curr.value(spec.target)});
        }
        return ps;
    };

    // Step 1: fit sub-models.
    for (const auto& ts : spec.degradation) {
        DegradationTerm term;
        term.model = fit_degradation(ts.family, age_samples).model;
        term.policy = ts.fixed_weight;
        term.weight = ts.fixed_weight.value_or(0.0);
        out.model.degradation_terms.push_back(std::move(term));
    }
    bool any_correlation_data = false;
    for (const auto& ts : spec.correlation) {
        CorrelationTerm term;
        term.policy = ts.fixed_weight;
        term.weight = ts.fixed_weight.value_or(0.0);
        const auto ps = pairs_for(ts.regressors);
        if (ps.size() >= 2 * ts.regressors.size() + 1) {
            term.model = fit_correlation(spec.target, ts.regressors, ps).model;
            any_correlation_data = true;
        } else {
            // Keep the term present but inert: identity placeholder, weight 0.
            term.model.target = spec.target;
            term.model.regressors = ts.regressors;
            term.model.linear.assign(ts.regressors.size(), 0.0);
            term.model.quadratic.assign(ts.regressors.size(), 0.0);
            term.policy = 0.0;
            term.weight = 0.0;
        }
        out.model.correlation_terms.push_back(std::move(term));
    }
    for (const auto& ts : spec.empirical) {
        EmpiricalTerm term;
        term.model = ts.model;
        term.policy = ts.fixed_weight;
        term.weight = ts.fixed_weight.value_or(0.0);
        if (!term.model.locked) {
            if (const auto* d = std::get_if<DegradationModel>(&term.model.form)) {
                term.model.form = fit_degradation(d->family, age_samples).model;
            } else {
                const auto& c = std::get<CorrelationModel>(term.model.form);
                const auto ps = pairs_for(c.regressors);
                if (ps.size() >= 2 * c.regressors.size() + 1)
                    term.model.form = fit_correlation(spec.target, c.regressors, ps).model;
            }
        }
        out.model.empirical_terms.push_back(std::move(term));
    }

    if (!spec.correlation.empty() && !any_correlation_data) {
        out.diagnostics.correlation_disabled = true;
        out.diagnostics.notes.push_back(
            "no consecutive-inspection pairs available; correlation weights fixed to 0");
    }

    // Step 2: solve the free weights over term outputs as features.
    struct TermRef {
        enum class Kind { degradation, correlation, empirical } kind;
        std::size_t index;
    };
    std::vector<TermRef> free_terms, fixed_terms;
    auto classify = [&](TermRef::Kind kind, std::size_t i, const WeightPolicy& policy) {
        if (policy.has_value())
            fixed_terms.push_back({kind, i});
        else
            free_terms.push_back({kind, i});
    };
    for (std::size_t i = 0; i < out.model.degradation_terms.size(); ++i)
        classify(TermRef::Kind::degradation, i, out.model.degradation_terms[i].policy);
    for (std::size_t i = 0; i < out.model.correlation_terms.size(); ++i)
        classify(TermRef::Kind::correlation, i, out.model.correlation_terms[i].policy);
    for (std::size_t i = 0; i < out.model.empirical_terms.size(); ++i)
        classify(TermRef::Kind::empirical, i, out.model.empirical_terms[i].policy);

    const bool weights_need_pairs = [&] {
        for (const TermRef& t : free_terms) {
            if (t.kind == TermRef::Kind::correlation) return true;
            if (t.kind == TermRef::Kind::empirical &&
                std::holds_alternative<CorrelationModel>(out.model.empirical_terms[t.index].model.form))
                return true;
        }
        for (const TermRef& t : fixed_terms) {
            if (t.kind == TermRef::Kind::correlation &&
                out.model.correlation_terms[t.index].weight != 0.0)
                return true;
            if (t.kind == TermRef::Kind::empirical &&
                out.model.empirical_terms[t.index].weight != 0.0 &&
                std::holds_alternative<CorrelationModel>(out.model.empirical_terms[t.index].model.form))
                return true;
        }
        return false;
    }();

    auto term_value = [&](const TermRef& t, double age, const AttributeValues* prev) {
        switch (t.kind) {
            case TermRef::Kind::degradation:
                return evaluate(out.model.degradation_terms[t.index].model, age);
            case TermRef::Kind::correlation:
                return predict(out.model.correlation_terms[t.index].model, *prev);
            case TermRef::Kind::empirical:
                return detail::empirical_value(out.model.empirical_terms[t.index].model, age, prev);
        }
        throw ConfigError("unreachable");
    };
    auto term_weight = [&](const TermRef& t) -> double& {
        switch (t.kind) {
            case TermRef::Kind::degradation: return out.model.degradation_terms[t.index].weight;
            case TermRef::Kind::correlation: return out.model.correlation_terms[t.index].weight;
            case TermRef::Kind::empirical: return out.model.empirical_terms[t.index].weight;
        }
        throw ConfigError("unreachable");
    };
    auto domain_ok = [&](double age) {
        for (const auto& t : out.model.degradation_terms)
            if (age < t.model.domain_min()) return false;
        for (const auto& t : out.model.empirical_terms)
            if (const auto* d = std::get_if<DegradationModel>(&t.model.form))
                if (age < d->domain_min()) return false;
        return true;
    };

    // Assemble regression rows: (age, previous values or null, observed value).
    struct Row {
        double age;
        const AttributeValues* previous;
        double observed;
    };
    std::vector<Row> rows;
    if (weights_need_pairs) {
        for (const RecordPair& p : all_pairs) {
            const InspectionRecord& prev = training.records[p.previous];
            const InspectionRecord& curr = training.records[p.current];
            if (!curr.has_value(spec.target)) continue;
            if (!domain_ok(curr.age_years)) {
                ++out.diagnostics.skipped_rows;
                continue;
            }
            rows.push_back({curr.age_years, &prev.values, curr.value(spec.target)});
        }
    } else {
        for (const auto& r : training.records) {
            if (!r.has_value(spec.target)) continue;
            if (!domain_ok(r.age_years)) {
                ++out.diagnostics.skipped_rows;
                continue;
            }
            rows.push_back({r.age_years, nullptr, r.value(spec.target)});
        }
    }
    if (rows.empty())
        throw InsufficientDataError("condition '" + spec.target +
                                    "': no usable training rows for weight estimation");
    out.diagnostics.weight_rows = rows.size();

    if (free_terms.empty()) {
        out.diagnostics.notes.push_back("all weights fixed; nothing to estimate");
    } else {
        const auto n = static_cast<Eigen::Index>(rows.size());
        Eigen::VectorXd target_vec(n);
        Eigen::MatrixXd features(n, static_cast<Eigen::Index>(free_terms.size()));
        for (Eigen::Index i = 0; i < n; ++i) {
            const Row& row = rows[static_cast<std::size_t>(i)];
            double fixed_part = 0.0;
            for (const TermRef& t : fixed_terms) {
                const double w = term_weight(t);
                if (w != 0.0) fixed_part += w * term_value(t, row.age, row.previous);
            }
            target_vec(i) = row.observed - fixed_part;
            for (std::size_t j = 0; j < free_terms.size(); ++j)
                features(i, static_cast<Eigen::Index>(j)) = term_value(free_terms[j], row.age, row.previous);
        }
        if (options.nonnegative_weights) {
            Eigen::VectorXd w = solve_nonnegative_least_squares(features, target_vec);
            for (std::size_t j = 0; j < free_terms.size(); ++j)
                term_weight(free_terms[j]) = w(static_cast<Eigen::Index>(j));
        } else {
            const LeastSquaresSolution ls = solve_least_squares(features, target_vec);
            out.diagnostics.rank_deficient = ls.rank_deficient;
            if (ls.rank_deficient)
                out.diagnostics.notes.push_back("collinear term outputs; minimum-norm weights returned");
            for (std::size_t j = 0; j < free_terms.size(); ++j)
                term_weight(free_terms[j]) = ls.coefficients(static_cast<Eigen::Index>(j));
        }
    }

    double rss = 0.0;
    for (const Row& row : rows) {
        const double r = row.observed - evaluate_combined(out.model, row.age, row.previous);
        rss += r * r;
    }
    out.diagnostics.residual_sum_of_squares = rss;
    return out;
}

// --- JSON ------------------------------------------------------------------

inline nlohmann::json policy_to_json(const WeightPolicy& p) {
    if (p.has_value()) return {{"fixed", *p}};
    return "free";
}

inline WeightPolicy policy_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "free") return std::nullopt;
        throw ConfigError("weight policy must be \"free\" or {\"fixed\": value}");
    }
    return j.at("fixed").get<double>();
}

inline nlohmann::json to_json(const EmpiricalModel& m) {
    nlohmann::json j;
    j["description"] = m.description;
    j["locked"] = m.locked;
    if (const auto* d = std::get_if<DegradationModel>(&m.form)) {
        j["form"] = to_json(*d);
        j["form"]["kind"] = "degradation";
    } else {
        j["form"] = to_json(std::get<CorrelationModel>(m.form));
        j["form"]["kind"] = "correlation";
    }
    return j;
}

inline EmpiricalModel empirical_from_json(const nlohmann::json& j) {
    EmpiricalModel m;
    m.description = j.value("description", "");
    m.locked = j.value("locked", true);
    const nlohmann::json& form = j.at("form");
    const std::string kind = form.at("kind").get<std::string>();
    if (kind == "degradation")
        m.form = degradation_from_json(form);
    else if (kind == "correlation")
        m.form = correlation_from_json(form);
    else
        throw ConfigError("empirical model: unknown form kind '" + kind + "'");
    return m;
}

inline nlohmann::json to_json(const CombinedModel& m) {
    nlohmann::json j;
    j["target"] = m.target;
    j["degradation_terms"] = nlohmann::json::array();
    for (const auto& t : m.degradation_terms)
        j["degradation_terms"].push_back(
            {{"model", to_json(t.model)}, {"weight", t.weight}, {"policy", policy_to_json(t.policy)}});
    j["correlation_terms"] = nlohmann::json::array();
    for (const auto& t : m.correlation_terms)
        j["correlation_terms"].push_back(
            {{"model", to_json(t.model)}, {"weight", t.weight}, {"policy", policy_to_json(t.policy)}});
    j["empirical_terms"] = nlohmann::json::array();
    for (const auto& t : m.empirical_terms)
        j["empirical_terms"].push_back(
            {{"model", to_json(t.model)}, {"weight", t.weight}, {"policy", policy_to_json(t.policy)}});
    return j;
}

inline CombinedModel combined_from_json(const nlohmann::json& j) {
    CombinedModel m;
    m.target = j.at("target").get<std::string>();
    for (const auto& t : j.at("degradation_terms"))
        m.degradation_terms.push_back({degradation_from_json(t.at("model")), t.at("weight").get<double>(),
                                       policy_from_json(t.at("policy"))});
    for (const auto& t : j.at("correlation_terms"))
        m.correlation_terms.push_back({correlation_from_json(t.at("model")), t.at("weight").get<double>(),
                                       policy_from_json(t.at("policy"))});
    for (const auto& t : j.at("empirical_terms"))
        m.empirical_terms.push_back({empirical_from_json(t.at("model")), t.at("weight").get<double>(),
                                     policy_from_json(t.at("policy"))});
    return m;
}

inline nlohmann::json to_json(const ConditionModelSpec& s) {
    nlohmann::json j;
    j["target"] = s.target;
    j["degradation"] = nlohmann::json::array();
    for (const auto& t : s.degradation) {
        nlohmann::json e{{"family", to_string(t.family)}};
        if (t.fixed_weight) e["fixed_weight"] = *t.fixed_weight;
        j["degradation"].push_back(e);
    }
    j["correlation"] = nlohmann::json::array();
    for (const auto& t : s.correlation) {
        nlohmann::json e{{"regressors", t.regressors}};
        if (t.fixed_weight) e["fixed_weight"] = *t.fixed_weight;
        j["correlation"].push_back(e);
    }
    j["empirical"] = nlohmann::json::array();
    for (const auto& t : s.empirical) {
        nlohmann::json e = to_json(t.model);
        if (t.fixed_weight) e["fixed_weight"] = *t.fixed_weight;
        j["empirical"].push_back(e);
    }
    j["rating_policy"] = s.rating_policy == RatingPolicy::convert ? "convert" : "categorical";
    return j;
}

inline ConditionModelSpec condition_spec_from_json(const nlohmann::json& j) {
    ConditionModelSpec s;
    s.target = j.at("target").get<std::string>();
    for (const auto& t : j.value("degradation", nlohmann::json::array())) {
        DegradationTermSpec ts;
        ts.family = degradation_family_from_string(t.at("family").get<std::string>());
        if (t.contains("fixed_weight")) ts.fixed_weight = t.at("fixed_weight").get<double>();
        s.degradation.push_back(ts);
    }
    for (const auto& t : j.value("correlation", nlohmann::json::array())) {
        CorrelationTermSpec ts;
        ts.regressors = t.at("regressors").get<std::vector<std::string>>();
        if (t.contains("fixed_weight")) ts.fixed_weight = t.at("fixed_weight").get<double>();
        s.correlation.push_back(ts);
    }
    for (const auto& t : j.value("empirical", nlohmann::json::array())) {
        EmpiricalTermSpec ts;
        ts.model = empirical_from_json(t);
        if (t.contains("fixed_weight")) ts.fixed_weight = t.at("fixed_weight").get<double>();
        s.empirical.push_back(ts);
    }
    const std::string policy = j.value("rating_policy", "categorical");
    if (policy == "convert")
        s.rating_policy = RatingPolicy::convert;
    else if (policy == "categorical")
        s.rating_policy = RatingPolicy::categorical;
    else
        throw ConfigError("condition '" + s.target + "': unknown rating_policy '" + policy + "'");
    return s;
}

} // namespace condgen
