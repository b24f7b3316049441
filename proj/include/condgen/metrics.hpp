#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "condgen/error.hpp"
#include "condgen/rng.hpp"

namespace condgen {

/// Mean absolute percent error between actual and generated values.
/// Zero actuals are rejected rather than skipped: the percent error of a
/// zero reference is undefined and silently dropping rows would bias
/// cross-condition comparisons.
inline double mape(std::span<const double> actual, std::span<const double> generated) {
    if (actual.size() != generated.size())
        throw ValidationError("mape: length mismatch (" + std::to_string(actual.size()) + " vs " +
                              std::to_string(generated.size()) + ")");
    if (actual.empty()) throw InsufficientDataError("mape: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] == 0.0)
            throw DomainError("mape: actual value at index " + std::to_string(i) + " is zero");
        sum += std::abs((actual[i] - generated[i]) / actual[i]);
    }
    return sum / static_cast<double>(actual.size()) * 100.0;
}

/// Condition mismatch percentage: mean absolute rating difference, as a
/// percentage. Can exceed 100% when ratings differ by more than one level.
inline double cmp(std::span<const int> actual, std::span<const int> generated) {
    if (actual.size() != generated.size())
        throw ValidationError("cmp: length mismatch (" + std::to_string(actual.size()) + " vs " +
                              std::to_string(generated.size()) + ")");
    if (actual.empty()) throw InsufficientDataError("cmp: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i)
        sum += std::abs(static_cast<double>(actual[i]) - static_cast<double>(generated[i]));
    return sum / static_cast<double>(actual.size()) * 100.0;
}

/// Health index mismatch percentage; same contract as cmp, applied to
/// discrete health index levels.
inline double himp(std::span<const int> actual_hi, std::span<const int> generated_hi) {
    return cmp(actual_hi, generated_hi);
}

/// Coefficient of determination, 1 - SS_res / SS_tot.
inline double r_squared(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) throw ValidationError("r_squared: length mismatch");
    if (actual.size() < 2) throw InsufficientDataError("r_squared: need at least 2 points");
    double mean = 0.0;
    for (double v : actual) mean += v;
    mean /= static_cast<double>(actual.size());
    double ss_tot = 0.0, ss_res = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        ss_tot += (actual[i] - mean) * (actual[i] - mean);
        ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    }
    if (ss_tot == 0.0) throw DomainError("r_squared: actual values are constant");
    return 1.0 - ss_res / ss_tot;
}

/// Histogram over fixed edges, normalized to probabilities.
struct BinnedDistribution {
    std::vector<double> bin_edges;     // ascending, size bins + 1
    std::vector<double> probabilities; // non-negative, sums to 1
    double smoothing_epsilon = 1e-9;

    void validate() const {
        if (bin_edges.size() != probabilities.size() + 1)
            throw ValidationError("binned distribution: edge/probability size mismatch");
        for (std::size_t i = 0; i + 1 < bin_edges.size(); ++i)
            if (!(bin_edges[i] < bin_edges[i + 1]))
                throw ValidationError("binned distribution: edges not strictly ascending");
        double sum = 0.0;
        for (double p : probabilities) {
            if (p < 0.0) throw ValidationError("binned distribution: negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ValidationError("binned distribution: probabilities sum to " + std::to_string(sum));
    }
};

inline BinnedDistribution bin_values(std::span<const double> values,
                                     const std::vector<double>& edges) {
    BinnedDistribution out;
    out.bin_edges = edges;
    out.probabilities.assign(edges.size() - 1, 0.0);
    if (values.empty()) throw InsufficientDataError("bin_values: empty input");
    const double low = edges.front();
    const double width = (edges.back() - low) / static_cast<double>(out.probabilities.size());
    for (double v : values) {
        auto idx = static_cast<long long>(std::floor((v - low) / width));
        idx = std::clamp<long long>(idx, 0, static_cast<long long>(out.probabilities.size()) - 1);
        out.probabilities[static_cast<std::size_t>(idx)] += 1.0;
    }
    for (double& p : out.probabilities) p /= static_cast<double>(values.size());
    return out;
}

/// KL divergence sum P ln(P/Q) over two probability vectors. Empty Q bins
/// under P mass get epsilon, with Q renormalized, so the result stays
/// finite; P = 0 terms contribute nothing.
inline double kl_divergence_binned(std::span<const double> p, std::span<const double> q,
                                   double epsilon = 1e-9) {
    if (p.size() != q.size()) throw ValidationError("kl: distribution size mismatch");
    std::vector<double> q_smooth(q.begin(), q.end());
    bool smoothed = false;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0 && q_smooth[i] == 0.0) {
            q_smooth[i] = epsilon;
            smoothed = true;
        }
    }
    if (smoothed) {
        double total = 0.0;
        for (double v : q_smooth) total += v;
        for (double& v : q_smooth) v /= total;
    }
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) d += p[i] * std::log(p[i] / q_smooth[i]);
    return d;
}

/// KL divergence between the real and generated sample distributions, both
/// binned over the pooled min-max range with equal-width bins.
inline double kl_divergence(std::span<const double> real_values,
                            std::span<const double> generated_values, int bins = 20) {
    if (bins < 2) throw ConfigError("kl_divergence: need at least 2 bins");
    if (real_values.empty() || generated_values.empty())
        throw InsufficientDataError("kl_divergence: empty input");
    double low = real_values[0], high = real_values[0];
    for (double v : real_values) {
        low = std::min(low, v);
        high = std::max(high, v);
    }
    for (double v : generated_values) {
        low = std::min(low, v);
        high = std::max(high, v);
    }
    if (low == high) { // all values identical: both distributions are a point mass
        low -= 0.5;
        high += 0.5;
    }
    std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
    for (std::size_t i = 0; i < edges.size(); ++i)
        edges[i] = low + (high - low) * static_cast<double>(i) / static_cast<double>(bins);
    const BinnedDistribution p = bin_values(real_values, edges);
    const BinnedDistribution q = bin_values(generated_values, edges);
    return kl_divergence_binned(p.probabilities, q.probabilities);
}

/// Reference generator for benchmark KL: uniform draws between the observed
/// minimum and maximum of a condition attribute, using no other information.
inline std::vector<double> benchmark_uniform(double min_value, double max_value, std::size_t count,
                                             RandomStream& rng) {
    if (min_value > max_value) throw DomainError("benchmark_uniform: min > max");
    std::vector<double> out(count);
    for (double& v : out) v = rng.uniform(min_value, max_value);
    return out;
}

} // namespace condgen
