#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "condgen/dataset.hpp"
#include "condgen/error.hpp"
#include "condgen/io_util.hpp"

namespace condgen {

/// One rejected row or soft violation, always carrying the 1-based row number.
struct RowDiagnostic {
    std::size_t row = 0;
    std::string message;
};

struct IngestReport {
    InspectionDataset dataset;
    std::vector<RowDiagnostic> rejected_rows; // unparseable / out-of-range rows
    std::vector<RowDiagnostic> warnings;      // soft issues (interval gaps)
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(cell);
    return cells;
}

} // namespace detail

/// Reads a UTF-8 comma-separated file with header
/// `asset_id,inspection_year,age_years,<attr>...`. Rows with unparseable or
/// out-of-range cells are rejected with row-level diagnostics, never silently
/// dropped. Columns not named in the schema are ignored. Missing cells
/// (empty text) leave the attribute absent on that record.
inline IngestReport ingest_csv(const std::filesystem::path& path,
                               const std::vector<ConditionAttribute>& schema,
                               int interval_years) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    if (interval_years < 1) throw ValidationError("inspection interval must be >= 1 year");

    std::string header_line;
    if (!std::getline(in, header_line) || header_line.empty())
        throw IoError("'" + path.string() + "' is empty");

    const std::vector<std::string> header = detail::split_csv_line(header_line);
    auto column_of = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    };

    const int col_asset = column_of("asset_id");
    const int col_year = column_of("inspection_year");
    const int col_age = column_of("age_years");
    if (col_asset < 0) throw SchemaError("missing column 'asset_id'");
    if (col_year < 0) throw SchemaError("missing column 'inspection_year'");
    if (col_age < 0) throw SchemaError("missing column 'age_years'");

    std::vector<int> attr_col(schema.size());
    for (std::size_t a = 0; a < schema.size(); ++a) {
        attr_col[a] = column_of(schema[a].name);
        if (attr_col[a] < 0) throw SchemaError("missing column '" + schema[a].name + "'");
    }

    IngestReport report;
    report.dataset.schema = schema;
    report.dataset.inspection_interval_years = interval_years;

    std::string line;
    std::size_t row = 1; // header was row 1
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() < header.size()) {
            report.rejected_rows.push_back({row, "expected " + std::to_string(header.size()) +
                                                     " cells, got " + std::to_string(cells.size())});
            continue;
        }

        InspectionRecord rec;
        rec.asset_id = cells[static_cast<std::size_t>(col_asset)];
        std::string problem;

        bool ok = false;
        const double year = parse_double(cells[static_cast<std::size_t>(col_year)], ok);
        if (!ok || year != std::floor(year))
            problem = "unparseable inspection_year '" + cells[static_cast<std::size_t>(col_year)] + "'";
        rec.inspection_year = static_cast<int>(year);

        if (problem.empty()) {
            rec.age_years = parse_double(cells[static_cast<std::size_t>(col_age)], ok);
            if (!ok)
                problem = "unparseable age_years '" + cells[static_cast<std::size_t>(col_age)] + "'";
            else if (rec.age_years < 0.0)
                problem = "negative age_years";
        }

        for (std::size_t a = 0; problem.empty() && a < schema.size(); ++a) {
            const std::string& cell = cells[static_cast<std::size_t>(attr_col[a])];
            if (cell.empty()) continue; // missing cell: value stays absent
            const double v = parse_double(cell, ok);
            if (!ok) {
                problem = "unparseable value '" + cell + "' for '" + schema[a].name + "'";
                break;
            }
            if (schema[a].is_rating() &&
                (v != std::floor(v) || v < 1.0 || v > schema[a].rating_levels)) {
                problem = "rating '" + schema[a].name + "' value " + cell + " outside [1," +
                          std::to_string(schema[a].rating_levels) + "]";
                break;
            }
            rec.values.emplace(schema[a].name, v);
        }

        if (!problem.empty()) {
            report.rejected_rows.push_back({row, problem});
            continue;
        }
        report.dataset.records.push_back(std::move(rec));
    }

    if (report.dataset.records.empty() && report.rejected_rows.empty())
        throw ValidationError("'" + path.string() + "' contains a header but no records");

    report.dataset.validate();

    // Year gaps between successive inspections of one asset must be whole
    // multiples of the interval (a missed cycle is fine, an off-cycle year
    // is reported).
    std::map<std::string, std::vector<int>> years_by_asset;
    for (const auto& r : report.dataset.records) years_by_asset[r.asset_id].push_back(r.inspection_year);
    for (auto& [asset, years] : years_by_asset) {
        std::sort(years.begin(), years.end());
        for (std::size_t i = 0; i + 1 < years.size(); ++i) {
            const int gap = years[i + 1] - years[i];
            if (gap % interval_years != 0)
                report.warnings.push_back(
                    {0, "asset '" + asset + "': years " + std::to_string(years[i]) + " and " +
                            std::to_string(years[i + 1]) + " are " + std::to_string(gap) +
                            " apart, not a multiple of the " + std::to_string(interval_years) +
                            "-year interval"});
        }
    }
    return report;
}

/// Serializes back to the ingest format. Ratings as plain integers,
/// numerical values with shortest round-tripping decimals; missing cells
/// become empty fields.
inline std::string to_csv(const InspectionDataset& ds) {
    std::ostringstream out;
    out << "asset_id,inspection_year,age_years";
    for (const auto& a : ds.schema) out << ',' << a.name;
    out << '\n';
    for (const auto& r : ds.records) {
        out << r.asset_id << ',' << r.inspection_year << ',' << format_double(r.age_years);
        for (const auto& a : ds.schema) {
            out << ',';
            auto it = r.values.find(a.name);
            if (it == r.values.end()) continue;
            if (a.is_rating())
                out << static_cast<long long>(it->second);
            else
                out << format_double(it->second);
        }
        out << '\n';
    }
    return out.str();
}

inline void emit_csv(const InspectionDataset& ds, const std::filesystem::path& path) {
    write_text_atomic(path, to_csv(ds));
}

// --- schema descriptor -----------------------------------------------------

inline nlohmann::json attribute_to_json(const ConditionAttribute& a) {
    nlohmann::json j;
    j["name"] = a.name;
    j["kind"] = a.is_rating() ? "rating" : "numerical";
    if (a.is_rating()) j["levels"] = a.rating_levels;
    j["direction"] = a.direction == Direction::decreasing_with_age ? "decreasing" : "increasing";
    return j;
}

inline ConditionAttribute attribute_from_json(const nlohmann::json& j) {
    ConditionAttribute a;
    a.name = j.at("name").get<std::string>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "rating") {
        a.kind = AttributeKind::rating;
        a.rating_levels = j.at("levels").get<int>();
        if (a.rating_levels < 2) throw SchemaError("attribute '" + a.name + "': levels must be >= 2");
    } else if (kind == "numerical") {
        a.kind = AttributeKind::numerical;
        if (j.contains("levels")) throw SchemaError("numerical attribute '" + a.name + "' must not declare levels");
    } else {
        throw SchemaError("attribute '" + a.name + "': unknown kind '" + kind + "'");
    }
    const std::string dir = j.value("direction", "increasing");
    if (dir == "decreasing")
        a.direction = Direction::decreasing_with_age;
    else if (dir == "increasing")
        a.direction = Direction::increasing_with_age;
    else
        throw SchemaError("attribute '" + a.name + "': unknown direction '" + dir + "'");
    return a;
}

struct SchemaFile {
    std::vector<ConditionAttribute> attributes;
    int inspection_interval_years = 1;
};

inline SchemaFile load_schema(const std::filesystem::path& path) {
    nlohmann::json j = nlohmann::json::parse(read_text(path));
    SchemaFile out;
    for (const auto& a : j.at("attributes")) out.attributes.push_back(attribute_from_json(a));
    out.inspection_interval_years = j.value("inspection_interval_years", 1);
    return out;
}

inline void save_schema(const SchemaFile& schema, const std::filesystem::path& path) {
    nlohmann::json j;
    j["attributes"] = nlohmann::json::array();
    for (const auto& a : schema.attributes) j["attributes"].push_back(attribute_to_json(a));
    j["inspection_interval_years"] = schema.inspection_interval_years;
    write_text_atomic(path, j.dump(2) + "\n");
}

} // namespace condgen
