#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "condgen/correlation.hpp" // AttributeValues
#include "condgen/error.hpp"

namespace condgen {

enum class HealthIndexMode { continuous, discrete };

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0; // leaf output
};

/// Axis-aligned regression tree; node 0 is the root.
struct RegressionTree {
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> x) const {
        int idx = 0;
        while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
            const TreeNode& n = nodes[static_cast<std::size_t>(idx)];
            idx = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(idx)].value;
    }
};

struct HealthIndexConfig {
    int tree_count = 50;
    int max_depth = 3;
    double learning_rate = 0.1;
    HealthIndexMode mode = HealthIndexMode::continuous;
    int levels = 5; // discrete mode only
};

/// Plain squared-error gradient boosting: each tree fits the residual of
/// the ensemble so far via greedy variance-reduction splits. No
/// subsampling, no randomness; identical data and config give an identical
/// model.
struct HealthIndexModel {
    HealthIndexMode mode = HealthIndexMode::continuous;
    int levels = 5;
    double base_score = 0.0;
    double learning_rate = 0.1;
    std::vector<std::string> features;
    std::vector<RegressionTree> trees;

    double predict_raw(std::span<const double> x) const {
        double sum = base_score;
        for (const auto& t : trees) sum += learning_rate * t.predict(x);
        return sum;
    }

    std::vector<double> feature_vector(const AttributeValues& record) const {
        std::vector<double> x(features.size());
        for (std::size_t i = 0; i < features.size(); ++i) {
            auto it = record.find(features[i]);
            if (it == record.end())
                throw ValidationError("health index prediction: missing attribute '" + features[i] + "'");
            x[i] = it->second;
        }
        return x;
    }

    /// Continuous health index, clamped to [0, 100].
    double predict(const AttributeValues& record) const {
        return std::clamp(predict_raw(feature_vector(record)), 0.0, 100.0);
    }

    /// Discrete health index level: round to nearest, clamp to [1, levels].
    int predict_level(const AttributeValues& record) const {
        const double raw = predict_raw(feature_vector(record));
        const int level = static_cast<int>(std::llround(raw));
        return std::clamp(level, 1, levels);
    }
};

struct HealthIndexTraining {
    HealthIndexModel model;
    std::vector<double> mse_by_round; // training MSE after 0, 1, ..., n trees
    bool constant_labels = false;
};

namespace detail {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

inline SplitChoice best_split(const std::vector<std::vector<double>>& rows,
                              const std::vector<double>& residual,
                              const std::vector<std::size_t>& members, std::size_t feature_count) {
    SplitChoice best;
    const double n = static_cast<double>(members.size());
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i : members) {
        sum += residual[i];
        sum_sq += residual[i] * residual[i];
    }
    const double parent_sse = sum_sq - sum * sum / n;

    std::vector<std::size_t> order = members;
    for (std::size_t f = 0; f < feature_count; ++f) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (rows[a][f] != rows[b][f]) return rows[a][f] < rows[b][f];
            return a < b;
        });
        double left_sum = 0.0, left_sq = 0.0;
        for (std::size_t k = 0; k + 1 < order.size(); ++k) {
            const std::size_t i = order[k];
            left_sum += residual[i];
            left_sq += residual[i] * residual[i];
            const double x_here = rows[i][f];
            const double x_next = rows[order[k + 1]][f];
            if (x_here == x_next) continue;
            const double nl = static_cast<double>(k + 1);
            const double nr = n - nl;
            const double right_sum = sum - left_sum;
            const double right_sq = sum_sq - left_sq;
            const double sse = (left_sq - left_sum * left_sum / nl) +
                               (right_sq - right_sum * right_sum / nr);
            const double gain = parent_sse - sse;
            // strict > keeps the first feature / lowest threshold on ties
            if (gain > best.gain + 1e-12 && gain > 1e-12) {
                best.found = true;
                best.feature = static_cast<int>(f);
                best.threshold = 0.5 * (x_here + x_next);
                best.gain = gain;
            }
        }
    }
    return best;
}

inline int grow_tree(RegressionTree& tree, const std::vector<std::vector<double>>& rows,
                     const std::vector<double>& residual, std::vector<std::size_t> members,
                     int depth, int max_depth, std::size_t feature_count) {
    double mean = 0.0;
    for (std::size_t i : members) mean += residual[i];
    mean /= static_cast<double>(members.size());

    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[static_cast<std::size_t>(index)].value = mean;

    if (depth >= max_depth || members.size() < 2) return index;
    const SplitChoice split = best_split(rows, residual, members, feature_count);
    if (!split.found) return index;

    std::vector<std::size_t> left, right;
    for (std::size_t i : members) {
        if (rows[i][static_cast<std::size_t>(split.feature)] < split.threshold)
            left.push_back(i);
        else
            right.push_back(i);
    }
    members.clear();
    members.shrink_to_fit();

    const int l = grow_tree(tree, rows, residual, std::move(left), depth + 1, max_depth, feature_count);
    const int r = grow_tree(tree, rows, residual, std::move(right), depth + 1, max_depth, feature_count);
    TreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return index;
}

} // namespace detail

/// Trains on pre-assembled numeric rows. Rating attributes must already be
/// converted to their (i - 1/2)/N numeric form. Discrete mode regresses on
/// the level numbers directly (the levels are ordered) and rounds at
/// prediction time.
inline HealthIndexTraining train_health_index(const std::vector<std::string>& features,
                                              const std::vector<std::vector<double>>& rows,
                                              const std::vector<double>& labels,
                                              const HealthIndexConfig& config) {
    if (rows.size() != labels.size())
        throw ValidationError("health index training: row/label count mismatch");
    if (rows.size() < 10)
        throw InsufficientDataError("health index training needs at least 10 labeled records, got " +
                                    std::to_string(rows.size()));
    if (config.learning_rate <= 0.0 || config.learning_rate > 1.0)
        throw ConfigError("health index learning_rate must be in (0,1]");
    if (config.tree_count < 0 || config.max_depth < 1)
        throw ConfigError("health index config: tree_count >= 0 and max_depth >= 1 required");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != features.size())
            throw ValidationError("health index training: row " + std::to_string(i) + " has " +
                                  std::to_string(rows[i].size()) + " features, expected " +
                                  std::to_string(features.size()));
        for (std::size_t f = 0; f < rows[i].size(); ++f)
            if (!std::isfinite(rows[i][f]))
                throw ValidationError("health index training: non-numeric value in row " +
                                      std::to_string(i) + ", feature '" + features[f] + "'");
    }

    HealthIndexTraining out;
    out.model.mode = config.mode;
    out.model.levels = config.levels;
    out.model.learning_rate = config.learning_rate;
    out.model.features = features;

    double base = 0.0;
    for (double y : labels) base += y;
    base /= static_cast<double>(labels.size());
    out.model.base_score = base;

    const bool constant =
        std::all_of(labels.begin(), labels.end(), [&](double y) { return y == labels.front(); });
    if (constant) {
        out.model.base_score = labels.front();
        out.constant_labels = true;
        out.mse_by_round.push_back(0.0);
        return out;
    }

    std::vector<double> prediction(labels.size(), base);
    std::vector<double> residual(labels.size());
    std::vector<std::size_t> all(labels.size());
    std::iota(all.begin(), all.end(), std::size_t{0});

    auto mse = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < labels.size(); ++i)
            s += (labels[i] - prediction[i]) * (labels[i] - prediction[i]);
        return s / static_cast<double>(labels.size());
    };
    out.mse_by_round.push_back(mse());

    for (int round = 0; round < config.tree_count; ++round) {
        for (std::size_t i = 0; i < labels.size(); ++i) residual[i] = labels[i] - prediction[i];
        RegressionTree tree;
        detail::grow_tree(tree, rows, residual, all, 0, config.max_depth, features.size());
        for (std::size_t i = 0; i < labels.size(); ++i)
            prediction[i] += config.learning_rate * tree.predict(rows[i]);
        out.model.trees.push_back(std::move(tree));
        out.mse_by_round.push_back(mse());
    }
    return out;
}

/// Convenience wrapper over attribute-keyed records.
inline HealthIndexTraining train_health_index(const std::vector<std::string>& features,
                                              const std::vector<AttributeValues>& records,
                                              const std::vector<double>& labels,
                                              const HealthIndexConfig& config) {
    std::vector<std::vector<double>> rows;
    rows.reserve(records.size());
    for (const auto& rec : records) {
        std::vector<double> row(features.size());
        for (std::size_t f = 0; f < features.size(); ++f) {
            auto it = rec.find(features[f]);
            if (it == rec.end())
                throw ValidationError("health index training: record misses attribute '" + features[f] +
                                      "'");
            row[f] = it->second;
        }
        rows.push_back(std::move(row));
    }
    return train_health_index(features, rows, labels, config);
}

// --- JSON ------------------------------------------------------------------

inline nlohmann::json to_json(const HealthIndexModel& m) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : m.trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : t.nodes)
            nodes.push_back({{"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right},
                             {"value", n.value}});
        trees.push_back({{"nodes", nodes}});
    }
    return {{"mode", m.mode == HealthIndexMode::discrete ? "discrete" : "continuous"},
            {"levels", m.levels},
            {"base_score", m.base_score},
            {"learning_rate", m.learning_rate},
            {"features", m.features},
            {"trees", trees}};
}

inline HealthIndexModel health_index_from_json(const nlohmann::json& j) {
    HealthIndexModel m;
    m.mode = j.at("mode").get<std::string>() == "discrete" ? HealthIndexMode::discrete
                                                           : HealthIndexMode::continuous;
    m.levels = j.at("levels").get<int>();
    m.base_score = j.at("base_score").get<double>();
    m.learning_rate = j.at("learning_rate").get<double>();
    m.features = j.at("features").get<std::vector<std::string>>();
    for (const auto& t : j.at("trees")) {
        RegressionTree tree;
        for (const auto& n : t.at("nodes"))
            tree.nodes.push_back({n.at("feature").get<int>(), n.at("threshold").get<double>(),
                                  n.at("left").get<int>(), n.at("right").get<int>(),
                                  n.at("value").get<double>()});
        m.trees.push_back(std::move(tree));
    }
    return m;
}

} // namespace condgen
