#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "condgen/csv.hpp"
#include "condgen/dataset.hpp"

using namespace condgen;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path, std::ios::trunc);
    out << content;
    return path;
}

std::vector<ConditionAttribute> pole_schema() {
    return {
        {"ST1", AttributeKind::numerical, 0, Direction::decreasing_with_age},
        {"GC", AttributeKind::numerical, 0, Direction::increasing_with_age},
        {"SC", AttributeKind::rating, 5, Direction::increasing_with_age},
    };
}

} // namespace

TEST_CASE("ingest parses a well-formed file", "[dataset]") {
    const auto path = write_temp("cg_ingest_ok.csv",
                                 "asset_id,inspection_year,age_years,ST1,GC,SC\n"
                                 "p1,2018,20,9.5,101.2,2\n"
                                 "p2,2018,31,8.1,99.0,3\n"
                                 "p3,2018,5,10.0,105.5,1\n");
    const IngestReport report = ingest_csv(path, pole_schema(), 10);
    REQUIRE(report.dataset.records.size() == 3);
    REQUIRE(report.rejected_rows.empty());
    CHECK(report.dataset.records[0].value("ST1") == 9.5);
    CHECK(report.dataset.records[2].value("SC") == 1.0);
}

TEST_CASE("ingest rejects out-of-range ratings with the row number", "[dataset]") {
    const auto path = write_temp("cg_ingest_badrating.csv",
                                 "asset_id,inspection_year,age_years,ST1,GC,SC\n"
                                 "p1,2018,20,9.5,101.2,2\n"
                                 "p2,2018,31,8.1,99.0,7\n");
    const IngestReport report = ingest_csv(path, pole_schema(), 10);
    REQUIRE(report.dataset.records.size() == 1);
    REQUIRE(report.rejected_rows.size() == 1);
    CHECK(report.rejected_rows[0].row == 3);
    CHECK(report.rejected_rows[0].message.find("SC") != std::string::npos);
}

TEST_CASE("ingest error cases", "[dataset]") {
    SECTION("header-only file") {
        const auto path = write_temp("cg_ingest_headeronly.csv",
                                     "asset_id,inspection_year,age_years,ST1,GC,SC\n");
        REQUIRE_THROWS_AS(ingest_csv(path, pole_schema(), 10), ValidationError);
    }
    SECTION("empty file") {
        const auto path = write_temp("cg_ingest_empty.csv", "");
        REQUIRE_THROWS_AS(ingest_csv(path, pole_schema(), 10), IoError);
    }
    SECTION("missing schema column is named") {
        const auto path = write_temp("cg_ingest_nocol.csv",
                                     "asset_id,inspection_year,age_years,ST1,GC\n"
                                     "p1,2018,20,9.5,101.2\n");
        REQUIRE_THROWS_WITH(ingest_csv(path, pole_schema(), 10),
                            Catch::Matchers::ContainsSubstring("SC"));
    }
    SECTION("missing file") {
        REQUIRE_THROWS_AS(ingest_csv("/nonexistent/x.csv", pole_schema(), 10), IoError);
    }
}

TEST_CASE("missing cells stay absent and unparseable rows are reported", "[dataset]") {
    const auto path = write_temp("cg_ingest_missing.csv",
                                 "asset_id,inspection_year,age_years,ST1,GC,SC\n"
                                 "p1,2018,20,,101.2,2\n"
                                 "p2,2018,oops,8.1,99.0,3\n");
    const IngestReport report = ingest_csv(path, pole_schema(), 10);
    REQUIRE(report.dataset.records.size() == 1);
    CHECK_FALSE(report.dataset.records[0].has_value("ST1"));
    REQUIRE(report.rejected_rows.size() == 1);
    CHECK(report.rejected_rows[0].row == 3);
    CHECK(report.rejected_rows[0].message.find("age_years") != std::string::npos);
}

TEST_CASE("ingest-emit-ingest round trip is exact", "[dataset]") {
    const auto path = write_temp("cg_roundtrip.csv",
                                 "asset_id,inspection_year,age_years,ST1,GC,SC\n"
                                 "p1,2008,10,9.625,101.25,2\n"
                                 "p1,2018,20,9.5,,3\n"
                                 "p2,2018,31.5,8.0625,99.03125,5\n");
    const InspectionDataset first = ingest_csv(path, pole_schema(), 10).dataset;
    const auto emitted = std::filesystem::temp_directory_path() / "cg_roundtrip_out.csv";
    emit_csv(first, emitted);
    const InspectionDataset second = ingest_csv(emitted, pole_schema(), 10).dataset;
    REQUIRE(first == second);
}

TEST_CASE("off-cycle inspection years are reported", "[dataset]") {
    const auto path = write_temp("cg_offcycle.csv",
                                 "asset_id,inspection_year,age_years,ST1,GC,SC\n"
                                 "p1,2010,10,9.5,100,2\n"
                                 "p1,2013,13,9.0,100,2\n"
                                 "p2,2010,4,9.5,100,1\n"
                                 "p2,2012,6,9.2,100,1\n");
    const IngestReport report = ingest_csv(path, pole_schema(), 3);
    REQUIRE(report.warnings.size() == 1);
    CHECK(report.warnings[0].message.find("p2") != std::string::npos);
}

TEST_CASE("consecutive_pairs picks exactly interval-apart records", "[dataset]") {
    const auto path = write_temp("cg_pairs.csv",
                                 "asset_id,inspection_year,age_years,ST1,GC,SC\n"
                                 "c1,2010,4,9.5,100,1\n"
                                 "c1,2013,7,9.0,101,1\n"
                                 "c1,2019,13,8.0,103,2\n" // 2016 missed: no pair 2013->2019
                                 "c2,2013,2,9.9,100,1\n");
    const InspectionDataset ds = ingest_csv(path, pole_schema(), 3).dataset;
    const auto pairs = consecutive_pairs(ds);
    REQUIRE(pairs.size() == 1);
    CHECK(ds.records[pairs[0].previous].inspection_year == 2010);
    CHECK(ds.records[pairs[0].current].inspection_year == 2013);
}

TEST_CASE("direction normalization", "[dataset]") {
    InspectionDataset ds;
    ds.schema = pole_schema();
    ds.inspection_interval_years = 10;
    auto rec = [](std::string id, double age, double st1, double gc, double sc) {
        InspectionRecord r;
        r.asset_id = std::move(id);
        r.inspection_year = 2018;
        r.age_years = age;
        r.values = {{"ST1", st1}, {"GC", gc}, {"SC", sc}};
        return r;
    };
    ds.records = {rec("a", 1, 10, 1, 1), rec("b", 2, 8, 2, 2), rec("c", 3, 5, 3, 5)};

    const NormalizedDataset norm = normalize_direction(ds);

    SECTION("increasing attribute unchanged") {
        for (std::size_t i = 0; i < ds.records.size(); ++i)
            CHECK(norm.dataset.records[i].value("GC") == ds.records[i].value("GC"));
    }
    SECTION("decreasing numerical attribute reflected about its maximum") {
        CHECK(norm.dataset.records[0].value("ST1") == 0.0);
        CHECK(norm.dataset.records[1].value("ST1") == 2.0);
        CHECK(norm.dataset.records[2].value("ST1") == 5.0);
        CHECK(norm.dataset.schema[0].direction == Direction::increasing_with_age);
    }
    SECTION("round trip restores the dataset exactly") {
        const InspectionDataset back = invert_direction(norm.dataset, norm.transforms);
        REQUIRE(back == ds);
    }
    SECTION("normalized dataset still validates") { norm.dataset.validate(); }
}

TEST_CASE("direction normalization flips decreasing ratings within [1,N]", "[dataset]") {
    InspectionDataset ds;
    ds.schema = {{"VC", AttributeKind::rating, 5, Direction::decreasing_with_age}};
    InspectionRecord r;
    r.asset_id = "x";
    r.age_years = 3;
    r.values = {{"VC", 2.0}};
    ds.records = {r};

    const NormalizedDataset norm = normalize_direction(ds);
    CHECK(norm.dataset.records[0].value("VC") == 4.0); // (5+1) - 2
    norm.dataset.validate();
    CHECK(invert_direction(norm.dataset, norm.transforms) == ds);
}

TEST_CASE("normalization of an all-missing attribute fails loudly", "[dataset]") {
    InspectionDataset ds;
    ds.schema = {{"ST1", AttributeKind::numerical, 0, Direction::decreasing_with_age}};
    InspectionRecord r;
    r.asset_id = "x";
    r.age_years = 3;
    ds.records = {r};
    REQUIRE_THROWS_AS(normalize_direction(ds), ValidationError);
}

TEST_CASE("dataset validation catches schema violations", "[dataset]") {
    InspectionDataset ds;
    ds.schema = {{"A", AttributeKind::numerical, 0, Direction::increasing_with_age},
                 {"A", AttributeKind::numerical, 0, Direction::increasing_with_age}};
    REQUIRE_THROWS_AS(ds.validate(), SchemaError);

    InspectionDataset ds2;
    ds2.schema = {{"R", AttributeKind::rating, 1, Direction::increasing_with_age}};
    REQUIRE_THROWS_AS(ds2.validate(), SchemaError);
}

TEST_CASE("schema descriptor JSON round trip", "[dataset]") {
    SchemaFile schema{pole_schema(), 10};
    const auto path = std::filesystem::temp_directory_path() / "cg_schema.json";
    save_schema(schema, path);
    const SchemaFile loaded = load_schema(path);
    REQUIRE(loaded.attributes.size() == 3);
    CHECK(loaded.inspection_interval_years == 10);
    CHECK(loaded.attributes[0].direction == Direction::decreasing_with_age);
    CHECK(loaded.attributes[2].rating_levels == 5);
}
