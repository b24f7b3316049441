#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "condgen/error.hpp"
#include "condgen/linalg.hpp"

namespace condgen {

/// Age below which the logarithm-based curves are undefined. Inspection ages
/// are whole years, so 1 is a natural floor; callers working in fractional
/// years can rescale before fitting.
inline constexpr double kLogAgeFloor = 1.0;

enum class DegradationFamily { linear, exponential, logarithmic, power };

inline std::string to_string(DegradationFamily f) {
    switch (f) {
        case DegradationFamily::linear: return "linear";
        case DegradationFamily::exponential: return "exponential";
        case DegradationFamily::logarithmic: return "logarithmic";
        case DegradationFamily::power: return "power";
    }
    throw ConfigError("unknown degradation family");
}

inline DegradationFamily degradation_family_from_string(const std::string& s) {
    if (s == "linear") return DegradationFamily::linear;
    if (s == "exponential") return DegradationFamily::exponential;
    if (s == "logarithmic") return DegradationFamily::logarithmic;
    if (s == "power") return DegradationFamily::power;
    throw ConfigError("unknown degradation family '" + s + "'");
}

/// One age-driven condition curve. The four families are
///   linear        C(t) = a*t + b
///   exponential   C(t) = b*exp(a*t)
///   logarithmic   C(t) = a*ln(t) + b
///   power         C(t) = b*t^a   (a = 1 collapses to a line through 0)
struct DegradationModel {
    DegradationFamily family = DegradationFamily::linear;
    double a = 0.0;
    double b = 0.0;

    /// Smallest age the model may be evaluated at.
    double domain_min() const {
        if (family == DegradationFamily::logarithmic) return kLogAgeFloor;
        if (family == DegradationFamily::power && a < 0.0) return kLogAgeFloor;
        return 0.0;
    }

    bool operator==(const DegradationModel&) const = default;
};

inline double evaluate(const DegradationModel& m, double age) {
    if (age < m.domain_min())
        throw DomainError("age " + std::to_string(age) + " below domain of " + to_string(m.family) +
                          " model (min " + std::to_string(m.domain_min()) + ")");
    switch (m.family) {
        case DegradationFamily::linear: return m.a * age + m.b;
        case DegradationFamily::exponential: return m.b * std::exp(m.a * age);
        case DegradationFamily::logarithmic: return m.a * std::log(age) + m.b;
        case DegradationFamily::power: return m.b * std::pow(age, m.a);
    }
    throw ConfigError("unknown degradation family");
}

struct AgeSample {
    double age = 0.0;
    double value = 0.0;
};

struct FitDiagnostics {
    double residual_sum_of_squares = 0.0;
    std::size_t sample_count = 0;
    bool degenerate = false; // all sample values equal; constant model returned
    bool rank_deficient = false;
};

struct DegradationFit {
    DegradationModel model;
    FitDiagnostics diagnostics;
};

namespace detail {

inline double degradation_rss(const DegradationModel& m, std::span<const AgeSample> samples) {
    double rss = 0.0;
    for (const auto& s : samples) {
        const double r = s.value - evaluate(m, s.age);
        rss += r * r;
    }
    return rss;
}

/// A few Gauss-Newton steps on the untransformed squared error. The
/// log-space estimate is already exact for noiseless data; this removes the
/// transform bias under noise. Steps that do not reduce the objective are
/// backtracked and iteration stops.
inline void refine_gauss_newton(DegradationModel& m, std::span<const AgeSample> samples,
                                int max_steps = 40) {
    const std::size_t n = samples.size();
    double rss = degradation_rss(m, samples);
    for (int step = 0; step < max_steps; ++step) {
        Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), 2);
        Eigen::VectorXd residual(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const double t = samples[i].age;
            double f, dfda, dfdb;
            if (m.family == DegradationFamily::exponential) {
                const double e = std::exp(m.a * t);
                f = m.b * e;
                dfda = m.b * t * e;
                dfdb = e;
            } else { // power
                const double p = std::pow(t, m.a);
                f = m.b * p;
                dfda = t > 0.0 ? m.b * p * std::log(t) : 0.0;
                dfdb = p;
            }
            jac(static_cast<Eigen::Index>(i), 0) = dfda;
            jac(static_cast<Eigen::Index>(i), 1) = dfdb;
            residual(static_cast<Eigen::Index>(i)) = samples[i].value - f;
        }
        Eigen::Vector2d delta =
            (jac.transpose() * jac).ldlt().solve(jac.transpose() * residual);
        if (!delta.allFinite()) break;

        double scale = 1.0;
        bool improved = false;
        for (int halving = 0; halving < 10; ++halving, scale *= 0.5) {
            DegradationModel trial = m;
            trial.a += scale * delta(0);
            trial.b += scale * delta(1);
            const double trial_rss = degradation_rss(trial, samples);
            if (std::isfinite(trial_rss) && trial_rss < rss) {
                const double gain = rss - trial_rss;
                m = trial;
                rss = trial_rss;
                improved = gain > 1e-14 * (1.0 + rss);
                break;
            }
        }
        if (!improved) break;
    }
}

} // namespace detail

/// Least-squares fit of one family. Exponential and power are fitted as
/// linear least squares on ln(C) (deterministic, initialization free), then
/// polished with Gauss-Newton on the original objective. All-equal values
/// short-circuit to the constant model a = 0, b = value with a degenerate
/// flag instead of failing.
inline DegradationFit fit_degradation(DegradationFamily family, std::span<const AgeSample> samples) {
    if (samples.size() < 2)
        throw InsufficientDataError("degradation fit needs at least 2 samples, got " +
                                    std::to_string(samples.size()));
    bool any_distinct_age = false;
    bool all_values_equal = true;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (samples[i].age != samples[0].age) any_distinct_age = true;
        if (samples[i].value != samples[0].value) all_values_equal = false;
    }
    if (!any_distinct_age)
        throw InsufficientDataError("degradation fit needs at least 2 distinct ages");

    DegradationFit out;
    out.model.family = family;
    out.diagnostics.sample_count = samples.size();

    if (all_values_equal) {
        out.model.a = 0.0;
        out.model.b = samples[0].value;
        out.diagnostics.degenerate = true;
        return out;
    }

    const auto n = static_cast<Eigen::Index>(samples.size());
    Eigen::MatrixXd design(n, 2);
    Eigen::VectorXd target(n);

    auto check_log_values = [&] {
        std::string bad;
        for (std::size_t i = 0; i < samples.size(); ++i)
            if (samples[i].value <= 0.0) bad += (bad.empty() ? "" : ", ") + std::to_string(i);
        if (!bad.empty())
            throw DomainError("log-space fit of " + to_string(family) +
                              " needs positive values; offending sample indices: " + bad);
    };
    auto check_age_floor = [&](double floor) {
        std::string bad;
        for (std::size_t i = 0; i < samples.size(); ++i)
            if (samples[i].age < floor) bad += (bad.empty() ? "" : ", ") + std::to_string(i);
        if (!bad.empty())
            throw DomainError(to_string(family) + " fit needs ages >= " + std::to_string(floor) +
                              "; offending sample indices: " + bad);
    };

    switch (family) {
        case DegradationFamily::linear:
            for (Eigen::Index i = 0; i < n; ++i) {
                design(i, 0) = samples[static_cast<std::size_t>(i)].age;
                design(i, 1) = 1.0;
                target(i) = samples[static_cast<std::size_t>(i)].value;
            }
            break;
        case DegradationFamily::logarithmic:
            check_age_floor(kLogAgeFloor);
            for (Eigen::Index i = 0; i < n; ++i) {
                design(i, 0) = std::log(samples[static_cast<std::size_t>(i)].age);
                design(i, 1) = 1.0;
                target(i) = samples[static_cast<std::size_t>(i)].value;
            }
            break;
        case DegradationFamily::exponential:
            check_log_values();
            for (Eigen::Index i = 0; i < n; ++i) {
                design(i, 0) = samples[static_cast<std::size_t>(i)].age;
                design(i, 1) = 1.0;
                target(i) = std::log(samples[static_cast<std::size_t>(i)].value);
            }
            break;
        case DegradationFamily::power:
            check_log_values();
            check_age_floor(std::nextafter(0.0, 1.0)); // ln(age) needs age > 0
            for (Eigen::Index i = 0; i < n; ++i) {
                design(i, 0) = std::log(samples[static_cast<std::size_t>(i)].age);
                design(i, 1) = 1.0;
                target(i) = std::log(samples[static_cast<std::size_t>(i)].value);
            }
            break;
    }

    const LeastSquaresSolution ls = solve_least_squares(design, target);
    out.diagnostics.rank_deficient = ls.rank_deficient;
    if (family == DegradationFamily::linear || family == DegradationFamily::logarithmic) {
        out.model.a = ls.coefficients(0);
        out.model.b = ls.coefficients(1);
    } else {
        out.model.a = ls.coefficients(0);
        out.model.b = std::exp(ls.coefficients(1));
        detail::refine_gauss_newton(out.model, samples);
    }
    out.diagnostics.residual_sum_of_squares = detail::degradation_rss(out.model, samples);
    return out;
}

inline nlohmann::json to_json(const DegradationModel& m) {
    return {{"family", to_string(m.family)}, {"a", m.a}, {"b", m.b}};
}

inline DegradationModel degradation_from_json(const nlohmann::json& j) {
    DegradationModel m;
    m.family = degradation_family_from_string(j.at("family").get<std::string>());
    m.a = j.at("a").get<double>();
    m.b = j.at("b").get<double>();
    return m;
}

} // namespace condgen
