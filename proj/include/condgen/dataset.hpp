#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "condgen/error.hpp"

namespace condgen {

enum class AttributeKind { numerical, rating };

enum class Direction { increasing_with_age, decreasing_with_age };

/// One column of the inspection schema.
struct ConditionAttribute {
    std::string name;
    AttributeKind kind = AttributeKind::numerical;
    int rating_levels = 0; // >= 2 when kind == rating, unused otherwise
    Direction direction = Direction::increasing_with_age;

    bool is_rating() const { return kind == AttributeKind::rating; }

    bool operator==(const ConditionAttribute&) const = default;
};

/// One asset observed at one inspection. Missing cells are simply absent
/// from `values`; operations that need a value fail loudly per record.
/// Rating levels are stored as integral doubles in [1, N].
struct InspectionRecord {
    std::string asset_id;
    int inspection_year = 0;
    double age_years = 0.0;
    std::map<std::string, double> values;

    bool has_value(const std::string& attribute) const { return values.count(attribute) > 0; }

    double value(const std::string& attribute) const {
        auto it = values.find(attribute);
        if (it == values.end())
            throw ValidationError("record for asset '" + asset_id + "' has no value for attribute '" +
                                  attribute + "'");
        return it->second;
    }

    bool operator==(const InspectionRecord&) const = default;
};

/// Immutable after construction; safe for concurrent reads.
struct InspectionDataset {
    std::vector<ConditionAttribute> schema;
    std::vector<InspectionRecord> records;
    int inspection_interval_years = 1;

    const ConditionAttribute* find_attribute(const std::string& name) const {
        for (const auto& a : schema)
            if (a.name == name) return &a;
        return nullptr;
    }

    const ConditionAttribute& attribute(const std::string& name) const {
        const ConditionAttribute* a = find_attribute(name);
        if (!a) throw SchemaError("unknown attribute '" + name + "'");
        return *a;
    }

    /// Checks schema invariants and that every record conforms.
    void validate() const {
        if (inspection_interval_years < 1) throw ValidationError("inspection interval must be >= 1 year");
        for (std::size_t i = 0; i < schema.size(); ++i) {
            const auto& a = schema[i];
            if (a.name.empty()) throw SchemaError("attribute with empty name");
            if (a.is_rating() && a.rating_levels < 2)
                throw SchemaError("rating attribute '" + a.name + "' needs at least 2 levels");
            for (std::size_t j = i + 1; j < schema.size(); ++j)
                if (schema[j].name == a.name)
                    throw SchemaError("duplicate attribute name '" + a.name + "'");
        }
        for (const auto& r : records) {
            if (r.age_years < 0.0)
                throw ValidationError("asset '" + r.asset_id + "': negative age");
            for (const auto& [name, v] : r.values) {
                const ConditionAttribute* a = find_attribute(name);
                if (!a)
                    throw SchemaError("asset '" + r.asset_id + "': value for unknown attribute '" + name + "'");
                if (a->is_rating()) {
                    if (v != std::floor(v) || v < 1.0 || v > a->rating_levels)
                        throw ValidationError("asset '" + r.asset_id + "': rating '" + name +
                                              "' out of [1," + std::to_string(a->rating_levels) + "]");
                }
                if (!std::isfinite(v))
                    throw ValidationError("asset '" + r.asset_id + "': non-finite value for '" + name + "'");
            }
        }
    }

    bool operator==(const InspectionDataset&) const = default;
};

/// Index pair (previous, current) of records for the same asset one
/// inspection interval apart. The raw material for correlation fitting.
struct RecordPair {
    std::size_t previous = 0;
    std::size_t current = 0;
};

inline std::vector<RecordPair> consecutive_pairs(const InspectionDataset& ds) {
    std::map<std::string, std::vector<std::size_t>> by_asset;
    for (std::size_t i = 0; i < ds.records.size(); ++i)
        by_asset[ds.records[i].asset_id].push_back(i);

    std::vector<RecordPair> pairs;
    for (auto& [asset, idx] : by_asset) {
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return ds.records[a].inspection_year < ds.records[b].inspection_year;
        });
        for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
            const int gap = ds.records[idx[k + 1]].inspection_year - ds.records[idx[k]].inspection_year;
            if (gap == ds.inspection_interval_years)
                pairs.push_back({idx[k], idx[k + 1]});
        }
    }
    return pairs;
}

// ---------------------------------------------------------------------------
// Direction normalization
//
// Attributes flagged decreasing-with-age are reflected so that every value
// series increases with age, which is what the degradation families expect.
// Numerical attributes use v' = M - v with M the attribute's dataset maximum;
// rating attributes flip levels, v' = (N + 1) - v, which keeps levels in
// [1, N]. Both are involutions and the applied constant is recorded so the
// transform is exactly invertible.
// ---------------------------------------------------------------------------

struct DirectionTransform {
    enum class Kind { numeric_reflect, rating_flip };
    Kind kind = Kind::numeric_reflect;
    double reference = 0.0; // M for numeric_reflect, N + 1 for rating_flip

    double apply(double v) const { return reference - v; }
    double invert(double v) const { return reference - v; }
};

using DirectionTransforms = std::map<std::string, DirectionTransform>;

struct NormalizedDataset {
    InspectionDataset dataset;
    DirectionTransforms transforms;
};

inline NormalizedDataset normalize_direction(const InspectionDataset& input) {
    NormalizedDataset out;
    out.dataset = input;
    for (auto& attr : out.dataset.schema) {
        if (attr.direction != Direction::decreasing_with_age) continue;

        DirectionTransform t;
        if (attr.is_rating()) {
            t.kind = DirectionTransform::Kind::rating_flip;
            t.reference = static_cast<double>(attr.rating_levels + 1);
        } else {
            double max_value = -std::numeric_limits<double>::infinity();
            for (const auto& r : input.records) {
                auto it = r.values.find(attr.name);
                if (it != r.values.end() && std::isfinite(it->second))
                    max_value = std::max(max_value, it->second);
            }
            if (!std::isfinite(max_value))
                throw ValidationError("attribute '" + attr.name +
                                      "' has no finite values; cannot normalize direction");
            t.kind = DirectionTransform::Kind::numeric_reflect;
            t.reference = max_value;
        }
        for (auto& r : out.dataset.records) {
            auto it = r.values.find(attr.name);
            if (it != r.values.end()) it->second = t.apply(it->second);
        }
        attr.direction = Direction::increasing_with_age;
        out.transforms.emplace(attr.name, t);
    }
    return out;
}

/// Applies previously recorded transforms to another dataset (e.g. a fresh
/// seed dataset entering models fitted elsewhere). Uses the recorded
/// reference constants, not this dataset's maxima.
inline InspectionDataset apply_direction(const InspectionDataset& input,
                                         const DirectionTransforms& transforms) {
    InspectionDataset out = input;
    for (const auto& [name, t] : transforms) {
        for (auto& r : out.records) {
            auto it = r.values.find(name);
            if (it != r.values.end()) it->second = t.apply(it->second);
        }
        for (auto& attr : out.schema)
            if (attr.name == name) attr.direction = Direction::increasing_with_age;
    }
    return out;
}

/// Undoes normalize_direction / apply_direction. Restores the
/// decreasing-with-age flag for every transformed attribute.
inline InspectionDataset invert_direction(const InspectionDataset& input,
                                          const DirectionTransforms& transforms) {
    InspectionDataset out = input;
    for (const auto& [name, t] : transforms) {
        for (auto& r : out.records) {
            auto it = r.values.find(name);
            if (it != r.values.end()) it->second = t.invert(it->second);
        }
        for (auto& attr : out.schema)
            if (attr.name == name) attr.direction = Direction::decreasing_with_age;
    }
    return out;
}

} // namespace condgen
