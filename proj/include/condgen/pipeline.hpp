#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "condgen/combined.hpp"
#include "condgen/dataset.hpp"
#include "condgen/error.hpp"
#include "condgen/generation.hpp"
#include "condgen/stochastic.hpp"

namespace condgen {

struct FitOptions {
    EstimateOptions estimate;
    double sigma_fallback_fraction = 0.05;
    int neighbor_window = 2;
};

struct FitReport {
    ModelSet models;
    std::map<std::string, EstimateDiagnostics> diagnostics;
    std::vector<std::string> notes;
};

/// The all-numerical view the combined models are estimated against:
/// directions already normalized, every rating value mapped through its
/// (i - 1/2)/N conversion, every attribute re-declared numerical.
inline InspectionDataset to_model_space_dataset(const InspectionDataset& normalized) {
    InspectionDataset out = normalized;
    for (auto& attr : out.schema) {
        if (!attr.is_rating()) continue;
        const int levels = attr.rating_levels;
        for (auto& r : out.records) {
            auto it = r.values.find(attr.name);
            if (it != r.values.end())
                it->second = rating_to_numeric(static_cast<int>(it->second), levels);
        }
        attr.kind = AttributeKind::numerical;
        attr.rating_levels = 0;
    }
    return out;
}

/// Fits the full model bundle for a dataset: direction normalization,
/// per-condition combined models with sigma tables (over the model-space
/// view), and categorical age models for rating attributes under the
/// categorical policy.
inline FitReport fit_model_set(const InspectionDataset& raw,
                               const std::vector<ConditionModelSpec>& specs,
                               const FitOptions& options = {}) {
    raw.validate();
    if (specs.empty()) throw ConfigError("no condition model specs given");
    for (const auto& spec : specs)
        if (!raw.find_attribute(spec.target))
            throw ConfigError("model spec references unknown attribute '" + spec.target + "'");

    const NormalizedDataset normalized = normalize_direction(raw);
    const InspectionDataset model_space = to_model_space_dataset(normalized.dataset);

    FitReport report;
    report.models.schema = normalized.dataset.schema;
    report.models.inspection_interval_years = raw.inspection_interval_years;
    report.models.direction_transforms = normalized.transforms;

    for (const auto& spec : specs) {
        const ConditionAttribute& attr = normalized.dataset.attribute(spec.target);
        AttributeModels out;
        out.rating_policy = spec.rating_policy;

        const bool wants_categorical = attr.is_rating() && spec.rating_policy == RatingPolicy::categorical;
        if (wants_categorical)
            out.categorical = fit_categorical(normalized.dataset, spec.target, options.neighbor_window);

        if (attr.is_rating() && spec.rating_policy == RatingPolicy::convert && spec.term_count() == 0)
            throw ConfigError("condition '" + spec.target +
                              "': convert policy needs at least one model term");

        if (spec.term_count() > 0) {
            const CombinedEstimate est = estimate(spec, model_space, options.estimate);
            out.combined = est.model;
            out.sigma = estimate_sigma(model_space, est.model, options.sigma_fallback_fraction);
            report.diagnostics.emplace(spec.target, est.diagnostics);
        } else if (!wants_categorical) {
            throw ConfigError("condition '" + spec.target + "': no terms and no categorical policy");
        } else {
            out.sigma.fallback_fraction = options.sigma_fallback_fraction;
        }
        report.models.attributes.emplace(spec.target, std::move(out));
    }
    return report;
}

/// Human-readable parameter report; the fitted models are meant to be
/// reviewed and challenged by asset engineers, so every coefficient is
/// printed.
inline std::string describe_model_set(const ModelSet& models,
                                      const std::map<std::string, EstimateDiagnostics>& diagnostics) {
    std::ostringstream out;
    out << "Fitted condition models\n";
    out << "=======================\n";
    out << "Inspection interval: " << models.inspection_interval_years << " years\n";
    if (!models.direction_transforms.empty()) {
        out << "Direction-normalized attributes:";
        for (const auto& [name, t] : models.direction_transforms)
            out << ' ' << name << " (v' = " << format_double(t.reference) << " - v)";
        out << '\n';
    }
    for (const auto& [name, am] : models.attributes) {
        out << '\n' << name << ":\n";
        if (am.combined) {
            for (const auto& term : am.combined->degradation_terms)
                out << "  degradation " << to_string(term.model.family) << "  a="
                    << format_double(term.model.a) << " b=" << format_double(term.model.b)
                    << "  weight=" << format_double(term.weight)
                    << (term.policy ? " (fixed)" : "") << '\n';
            for (const auto& term : am.combined->correlation_terms) {
                out << "  correlation over [";
                for (std::size_t i = 0; i < term.model.regressors.size(); ++i)
                    out << (i ? ", " : "") << term.model.regressors[i];
                out << "]  beta0=" << format_double(term.model.intercept)
                    << "  weight=" << format_double(term.weight)
                    << (term.policy ? " (fixed)" : "") << '\n';
                out << "    linear: ";
                for (std::size_t i = 0; i < term.model.linear.size(); ++i)
                    out << (i ? ", " : "") << format_double(term.model.linear[i]);
                out << "\n    quadratic: ";
                for (std::size_t i = 0; i < term.model.quadratic.size(); ++i)
                    out << (i ? ", " : "") << format_double(term.model.quadratic[i]);
                out << '\n';
            }
            for (const auto& term : am.combined->empirical_terms)
                out << "  empirical '" << term.model.description
                    << "'  weight=" << format_double(term.weight)
                    << (term.model.locked ? " (locked)" : "") << '\n';
            out << "  sigma: " << am.sigma.by_age.size() << " tabulated ages, fallback "
                << format_double(am.sigma.fallback_fraction * 100.0) << "% of value\n";
        }
        if (am.categorical)
            out << "  categorical distribution over " << am.categorical->levels << " levels, "
                << am.categorical->by_age.size() << " tabulated ages\n";
        auto d = diagnostics.find(name);
        if (d != diagnostics.end()) {
            out << "  fit: rows=" << d->second.weight_rows
                << " rss=" << format_double(d->second.residual_sum_of_squares) << '\n';
            for (const auto& note : d->second.notes) out << "  note: " << note << '\n';
        }
    }
    return out.str();
}

} // namespace condgen
