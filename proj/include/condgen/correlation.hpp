#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "condgen/error.hpp"
#include "condgen/linalg.hpp"

namespace condgen {

/// Second-degree polynomial linking a condition at inspection t to the
/// previous inspection's values of the target and its correlated attributes:
///   C_target(t) = beta0 + sum_j beta_j * x_j + sum_j beta'_j * x_j^2
/// over the regressor vector x at t-1. Pure squares only, no cross terms.
struct CorrelationModel {
    std::string target;
    std::vector<std::string> regressors; // always contains target
    double intercept = 0.0;
    std::vector<double> linear;    // one per regressor
    std::vector<double> quadratic; // one per regressor

    void validate() const {
        if (linear.size() != regressors.size() || quadratic.size() != regressors.size())
            throw ConfigError("correlation model '" + target + "': coefficient/regressor length mismatch");
        bool has_target = false;
        for (const auto& r : regressors) has_target |= (r == target);
        if (!has_target)
            throw ConfigError("correlation model '" + target + "': regressors must include the target");
    }

    bool operator==(const CorrelationModel&) const = default;
};

/// Values of all regressors at the previous inspection.
using AttributeValues = std::map<std::string, double>;

inline double predict(const CorrelationModel& m, const AttributeValues& previous) {
    double y = m.intercept;
    for (std::size_t j = 0; j < m.regressors.size(); ++j) {
        auto it = previous.find(m.regressors[j]);
        if (it == previous.end())
            throw ValidationError("correlation model '" + m.target + "': missing regressor value '" +
                                  m.regressors[j] + "'");
        y += m.linear[j] * it->second + m.quadratic[j] * it->second * it->second;
    }
    return y;
}

/// One training pair: the full previous-inspection record and the target's
/// observed value at the current inspection.
struct CorrelationSample {
    AttributeValues previous;
    double current = 0.0;
};

struct CorrelationFitDiagnostics {
    double residual_sum_of_squares = 0.0;
    std::size_t sample_count = 0;
    bool rank_deficient = false; // minimum-norm solution used; consider removing a regressor
};

struct CorrelationFit {
    CorrelationModel model;
    CorrelationFitDiagnostics diagnostics;
};

/// Ordinary least squares over the design [1, x_j, x_j^2]. Needs one pair per
/// free coefficient, i.e. 2*|regressors| + 1. Collinear regressors (common
/// for tan-delta style condition triples in small samples) resolve to the
/// minimum-norm solution with the rank_deficient diagnostic set.
inline CorrelationFit fit_correlation(const std::string& target,
                                      const std::vector<std::string>& regressors,
                                      std::span<const CorrelationSample> pairs) {
    const std::size_t k = regressors.size();
    if (k == 0) throw ConfigError("correlation fit: empty regressor list");
    const std::size_t min_pairs = 2 * k + 1;
    if (pairs.size() < min_pairs)
        throw InsufficientDataError("correlation fit for '" + target + "' needs at least " +
                                    std::to_string(min_pairs) + " pairs, got " +
                                    std::to_string(pairs.size()));

    const auto n = static_cast<Eigen::Index>(pairs.size());
    Eigen::MatrixXd design(n, static_cast<Eigen::Index>(2 * k + 1));
    Eigen::VectorXd target_vec(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const CorrelationSample& s = pairs[static_cast<std::size_t>(i)];
        design(i, 0) = 1.0;
        for (std::size_t j = 0; j < k; ++j) {
            auto it = s.previous.find(regressors[j]);
            if (it == s.previous.end())
                throw ValidationError("correlation fit for '" + target + "': pair " +
                                      std::to_string(i) + " misses regressor '" + regressors[j] + "'");
            design(i, static_cast<Eigen::Index>(1 + j)) = it->second;
            design(i, static_cast<Eigen::Index>(1 + k + j)) = it->second * it->second;
        }
        target_vec(i) = s.current;
    }

    const LeastSquaresSolution ls = solve_least_squares(design, target_vec);

    CorrelationFit out;
    out.model.target = target;
    out.model.regressors = regressors;
    out.model.intercept = ls.coefficients(0);
    out.model.linear.resize(k);
    out.model.quadratic.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        out.model.linear[j] = ls.coefficients(static_cast<Eigen::Index>(1 + j));
        out.model.quadratic[j] = ls.coefficients(static_cast<Eigen::Index>(1 + k + j));
    }
    out.model.validate();
    out.diagnostics.residual_sum_of_squares = ls.residual_sum_of_squares;
    out.diagnostics.sample_count = pairs.size();
    out.diagnostics.rank_deficient = ls.rank_deficient;
    return out;
}

/// Applies one model per attribute to the previous inspection's record.
/// Rows are independent; this is exactly k separate predict calls.
inline AttributeValues predict_joint(std::span<const CorrelationModel> models,
                                     const AttributeValues& previous) {
    std::set<std::string> seen;
    AttributeValues out;
    for (const auto& m : models) {
        if (!seen.insert(m.target).second)
            throw ConfigError("predict_joint: duplicate target '" + m.target + "'");
        out[m.target] = predict(m, previous);
    }
    return out;
}

inline nlohmann::json to_json(const CorrelationModel& m) {
    return {{"target", m.target},
            {"regressors", m.regressors},
            {"beta0", m.intercept},
            {"beta_linear", m.linear},
            {"beta_quadratic", m.quadratic}};
}

inline CorrelationModel correlation_from_json(const nlohmann::json& j) {
    CorrelationModel m;
    m.target = j.at("target").get<std::string>();
    m.regressors = j.at("regressors").get<std::vector<std::string>>();
    m.intercept = j.at("beta0").get<double>();
    m.linear = j.at("beta_linear").get<std::vector<double>>();
    m.quadratic = j.at("beta_quadratic").get<std::vector<double>>();
    m.validate();
    return m;
}

} // namespace condgen
