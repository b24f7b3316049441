// End-to-end checks of the condgen command line: every subcommand runs
// against the bundled fixture, outputs are byte-identical across reruns and
// thread counts, and the documented error paths exit with code 1.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "condgen/csv.hpp"
#include "condgen/fixture.hpp"
#include "condgen/io_util.hpp"
#include "condgen/reliability.hpp"

namespace fs = std::filesystem;
using namespace condgen;

namespace {

int failures = 0;

#define REQUIRE(cond, msg)                                                     \
    do {                                                                       \
        if (!(cond)) {                                                         \
            std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << " " << msg \
                      << "\n";                                                 \
            ++failures;                                                        \
        }                                                                      \
    } while (0)

std::string cli_path;
fs::path work;

int run_cli(const std::string& args, const std::string& log_name) {
    const std::string cmd = "cd '" + work.string() + "' && '" + cli_path + "' " + args + " > " +
                            log_name + " 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc < 0) return -1;
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool same_bytes(const fs::path& a, const fs::path& b) { return slurp(a) == slurp(b); }

void write_fixture_files() {
    FixtureConfig train_cfg;
    train_cfg.asset_count = 400;
    train_cfg.seed = 811;
    FixtureConfig test_cfg = train_cfg;
    test_cfg.seed = 812;

    const InspectionDataset train = make_fixture_dataset(train_cfg);
    const InspectionDataset test = make_fixture_dataset(test_cfg);
    emit_csv(train, work / "train.csv");
    emit_csv(test, work / "test.csv");
    save_schema(fixture_schema(train_cfg), work / "schema.json");

    // training CSV with an extra health-index label column
    {
        std::ostringstream out;
        out << "asset_id,inspection_year,age_years";
        for (const auto& a : train.schema) out << ',' << a.name;
        out << ",hi\n";
        for (const auto& r : train.records) {
            out << r.asset_id << ',' << r.inspection_year << ',' << format_double(r.age_years);
            for (const auto& a : train.schema) {
                out << ',';
                if (a.is_rating())
                    out << static_cast<long long>(r.value(a.name));
                else
                    out << format_double(r.value(a.name));
            }
            out << ',' << format_double(fixture_hi(r)) << '\n';
        }
        write_text_atomic(work / "hi_train.csv", out.str());
    }

    // 2019-only seed for the reliability flow
    {
        InspectionDataset seed;
        seed.schema = train.schema;
        seed.inspection_interval_years = train.inspection_interval_years;
        for (const auto& r : test.records)
            if (r.inspection_year == 2019) seed.records.push_back(r);
        emit_csv(seed, work / "seed_2019.csv");
    }

    nlohmann::json spec;
    spec["conditions"] = nlohmann::json::array();
    for (const auto& s : fixture_model_specs()) spec["conditions"].push_back(to_json(s));
    write_text_atomic(work / "modelspec.json", spec.dump(2) + "\n");

    write_text_atomic(work / "assumptions.json", to_json(SimulationAssumptions{}).dump(2) + "\n");

    nlohmann::json config;
    config["schema"] = "schema.json";
    config["train_csv"] = "train.csv";
    config["test_csv"] = "test.csv";
    config["dataset_csv"] = "seed_2019.csv";
    config["model_spec"] = "modelspec.json";
    config["models"] = "fit1/models.json";
    config["assumptions"] = "assumptions.json";
    config["master_seed"] = 20190811;
    config["plan"] = {{"start_year", 2019}, {"steps", 3}, {"interval_years", 3}, {"mode", "full"}};
    config["hi"] = {{"mode", "continuous"},
                    {"trees", 30},
                    {"max_depth", 3},
                    {"learning_rate", 0.15},
                    {"label_column", "hi"},
                    {"train_csv", "hi_train.csv"},
                    {"model", "hi1/hi_model.json"}};
    config["simulate"] = {{"replacement_count", 5}, {"iterations", 400}};
    config["optimize"] = {{"candidates", {0, 5, 10}}, {"iterations", 150}};
    config["validate"] = {{"kl_bins", 20}, {"sizes", {50, 100, 200}}, {"repeats", 2}};
    write_text_atomic(work / "config.json", config.dump(2) + "\n");

    // age-only recipe for the hypothetical path: a synthesized cohort has no
    // inspection history, so correlation terms cannot participate
    nlohmann::json age_spec;
    age_spec["conditions"] = nlohmann::json::array();
    for (auto s : fixture_model_specs()) {
        s.correlation.clear();
        age_spec["conditions"].push_back(to_json(s));
    }
    write_text_atomic(work / "modelspec_age.json", age_spec.dump(2) + "\n");

    nlohmann::json age_config = config;
    age_config["model_spec"] = "modelspec_age.json";
    write_text_atomic(work / "config_age.json", age_config.dump(2) + "\n");

    nlohmann::json hypo = config;
    hypo["models"] = "fit_age/models.json";
    hypo["generate"] = {{"source", "hypothetical"}};
    hypo["plan"] = {{"start_year", 2019}, {"steps", 3}, {"interval_years", 3}, {"mode", "age_only"}};
    hypo["hypothetical"] = {{"asset_count", 40},
                            {"ages", {{"kind", "uniform"}, {"low", 1.0}, {"high", 30.0}}}};
    write_text_atomic(work / "config_hypo.json", hypo.dump(2) + "\n");
}

void check_fit_and_generate() {
    REQUIRE(run_cli("--config config.json --out fit1 fit", "log_fit1.txt") == 0, "fit failed");
    REQUIRE(fs::exists(work / "fit1/models.json"), "models.json missing");
    REQUIRE(fs::exists(work / "fit1/fit_report.txt"), "fit_report.txt missing");
    REQUIRE(fs::exists(work / "fit1/manifest.json"), "manifest.json missing");

    const std::string fit_report = slurp(work / "fit1/fit_report.txt");
    REQUIRE(fit_report.find("degradation exponential") != std::string::npos,
            "fit report should print the fitted families");
    REQUIRE(fit_report.find("correlation over [PD]") != std::string::npos,
            "fit report should print correlation sets");
    REQUIRE(fit_report.find("categorical distribution over 3 levels") != std::string::npos,
            "fit report should mention the categorical model");

    REQUIRE(run_cli("--config config.json --out fit2 fit", "log_fit2.txt") == 0, "fit rerun failed");
    REQUIRE(same_bytes(work / "fit1/models.json", work / "fit2/models.json"),
            "fit rerun not byte-identical");
    REQUIRE(same_bytes(work / "fit1/manifest.json", work / "fit2/manifest.json"),
            "fit manifests differ");
    std::puts("[PASS] fit: outputs written, report readable, rerun byte-identical");

    REQUIRE(run_cli("--config config.json --out gen1 generate", "log_gen1.txt") == 0,
            "generate failed");
    for (int step : {1, 2, 3})
        REQUIRE(fs::exists(work / ("gen1/gen_step" + std::to_string(step) + ".csv")),
                "generated step file missing");
    REQUIRE(run_cli("--config config.json --out gen2 generate", "log_gen2.txt") == 0,
            "generate rerun failed");
    REQUIRE(run_cli("--config config.json --threads 4 --out gen4 generate", "log_gen4.txt") == 0,
            "generate with threads failed");
    for (int step : {1, 2, 3}) {
        const std::string name = "gen_step" + std::to_string(step) + ".csv";
        REQUIRE(same_bytes(work / "gen1" / name, work / "gen2" / name), "generate rerun differs");
        REQUIRE(same_bytes(work / "gen1" / name, work / "gen4" / name),
                "generate differs across thread counts");
    }
    const std::string other_seed_rc =
        std::to_string(run_cli("--config config.json --seed 999 --out gen_seed generate",
                               "log_gen_seed.txt"));
    REQUIRE(other_seed_rc == "0", "generate with explicit seed failed");
    REQUIRE(!same_bytes(work / "gen1/gen_step1.csv", work / "gen_seed/gen_step1.csv"),
            "different seed produced identical data");
    std::puts("[PASS] generate: sequential outputs, deterministic across reruns and threads");

    REQUIRE(run_cli("--config config_age.json --out fit_age fit", "log_fit_age.txt") == 0,
            "age-only fit failed");
    REQUIRE(run_cli("--config config_hypo.json --out hypo generate", "log_hypo.txt") == 0,
            "hypothetical generate failed");
    REQUIRE(fs::exists(work / "hypo/gen_step0.csv"), "hypothetical cohort file missing");
    const InspectionDataset cohort =
        ingest_csv(work / "hypo/gen_step0.csv", fixture_schema().attributes, 3).dataset;
    REQUIRE(cohort.records.size() == 40, "hypothetical cohort size wrong");
    std::puts("[PASS] generate: hypothetical cohort synthesized");
}

void check_validate() {
    for (const std::string mode : {"test1", "test2", "test4"}) {
        REQUIRE(run_cli("--config config.json --out val_" + mode + " validate --mode " + mode,
                        "log_val_" + mode + ".txt") == 0,
                mode + " failed");
    }
    REQUIRE(fs::exists(work / "val_test1/metrics_test1.csv"), "test1 table missing");
    REQUIRE(fs::exists(work / "val_test2/metrics_test2.json"), "test2 table missing");
    REQUIRE(fs::exists(work / "val_test4/size_sweep.csv"), "test4 series missing");

    const auto t1 = nlohmann::json::parse(slurp(work / "val_test1/metrics_test1.json"));
    const auto t2 = nlohmann::json::parse(slurp(work / "val_test2/metrics_test2.json"));
    for (std::size_t i = 0; i < t1.size(); ++i) {
        if (t1[i]["kl"].is_null()) continue;
        REQUIRE(t1[i]["kl"].get<double>() < t1[i]["benchmark_kl"].get<double>(),
                "test1 KL should beat the uniform benchmark");
        REQUIRE(t2[i]["mape_expected"].get<double>() >= t1[i]["mape_expected"].get<double>(),
                "age-only MAPE should not beat full-information MAPE");
    }
    std::puts("[PASS] validate: test1/test2/test4 tables with the expected relationships");

    REQUIRE(run_cli("--config config.json --out val_test3 validate --mode test3",
                    "log_val_test3.txt") == 0,
            "test3 failed");
    const auto t3 = nlohmann::json::parse(slurp(work / "val_test3/hi_comparison.json"));
    REQUIRE(t3["mape"].is_number(), "test3 should report continuous MAPE");
    REQUIRE(t3["mape"].get<double>() < 25.0, "test3 MAPE implausibly high");
    std::puts("[PASS] validate: test3 health-index comparison");
}

void check_hi_and_reliability() {
    REQUIRE(run_cli("--config config.json --out hi1 hi-train", "log_hi1.txt") == 0,
            "hi-train failed");
    REQUIRE(fs::exists(work / "hi1/hi_model.json"), "hi_model.json missing");

    REQUIRE(run_cli("--config config.json --out hiap hi-apply", "log_hiap.txt") == 0,
            "hi-apply failed");
    const std::string predictions = slurp(work / "hiap/hi_predictions.csv");
    REQUIRE(predictions.find("asset_id,inspection_year,age_years,hi") == 0,
            "hi_predictions.csv header wrong");
    std::puts("[PASS] hi-train / hi-apply");

    REQUIRE(run_cli("--config config.json --out sim1 simulate", "log_sim1.txt") == 0,
            "simulate failed");
    REQUIRE(run_cli("--config config.json --out sim2 simulate", "log_sim2.txt") == 0,
            "simulate rerun failed");
    REQUIRE(run_cli("--config config.json --threads 4 --out sim4 simulate", "log_sim4.txt") == 0,
            "simulate with threads failed");
    REQUIRE(same_bytes(work / "sim1/cost_report.json", work / "sim2/cost_report.json"),
            "simulate rerun differs");
    REQUIRE(same_bytes(work / "sim1/cost_report.json", work / "sim4/cost_report.json"),
            "simulate differs across thread counts");

    const auto report = nlohmann::json::parse(slurp(work / "sim1/cost_report.json"));
    const auto total = report["total_mean"];
    REQUIRE(total["toc"].get<double>() ==
                total["prc"].get<double>() + total["rrc"].get<double>() + total["fc"].get<double>(),
            "TOC identity violated in CLI output");
    REQUIRE(report["per_year"].size() == 10, "expected a 10-year horizon");

    // the standard assumption set is echoed verbatim in the manifest
    const auto sim_manifest = nlohmann::json::parse(slurp(work / "sim1/manifest.json"));
    REQUIRE(sim_manifest["assumptions"]["unit_replacement_cost"].get<double>() == 500.0,
            "assumptions not echoed in manifest");
    REQUIRE(sim_manifest["assumptions"]["value_of_lost_energy_per_mwh"].get<double>() == 10000.0,
            "assumptions not echoed in manifest");
    std::puts("[PASS] simulate: deterministic, identity holds, assumptions echoed");

    REQUIRE(run_cli("--config config.json --out opt1 optimize", "log_opt1.txt") == 0,
            "optimize failed");
    const auto opt = nlohmann::json::parse(slurp(work / "opt1/optimize_report.json"));
    const int best = opt["best_replacement_count"].get<int>();
    REQUIRE(best == 0 || best == 5 || best == 10, "optimizer returned a non-candidate");
    REQUIRE(fs::exists(work / "opt1/cost_by_strategy.csv"), "strategy sweep CSV missing");
    std::puts("[PASS] optimize: sweep report and argmin");
}

void check_error_paths() {
    write_text_atomic(work / "empty_config.json", "{}\n");
    REQUIRE(run_cli("--config empty_config.json --out err1 simulate", "log_err1.txt") == 1,
            "missing fields should exit 1");
    const std::string log = slurp(work / "log_err1.txt");
    for (const std::string field : {"assumptions", "models", "hi.model", "dataset_csv"})
        REQUIRE(log.find(field) != std::string::npos,
                "aggregated error should list missing field " + field);
    std::puts("[PASS] errors: missing config fields aggregated into one message");

    REQUIRE(run_cli("--config config.json --out err2 validate --mode bogus", "log_err2.txt") == 1,
            "unknown validate mode should exit 1");

    // single-inspection-year training data with correlation terms
    {
        const InspectionDataset train =
            ingest_csv(work / "train.csv", fixture_schema().attributes, 3).dataset;
        InspectionDataset single;
        single.schema = train.schema;
        single.inspection_interval_years = 3;
        for (const auto& r : train.records)
            if (r.inspection_year == 2016) single.records.push_back(r);
        emit_csv(single, work / "train_single_year.csv");
        nlohmann::json config = nlohmann::json::parse(slurp(work / "config.json"));
        config["train_csv"] = "train_single_year.csv";
        write_text_atomic(work / "config_single.json", config.dump(2) + "\n");
    }
    REQUIRE(run_cli("--config config_single.json --out err3 fit", "log_err3.txt") == 1,
            "correlation fit on single-year data should exit 1");
    REQUIRE(slurp(work / "log_err3.txt").find("two inspection years") != std::string::npos,
            "error should cite the two-inspection-year requirement");
    std::puts("[PASS] errors: single-year correlation precondition enforced");

    REQUIRE(run_cli("--out err4 fit", "log_err4.txt") == 1, "missing --config should exit 1");
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: cli_tests <path-to-condgen-cli>\n";
        return 2;
    }
    cli_path = fs::absolute(argv[1]).string();
    work = fs::temp_directory_path() / "condgen_cli_tests";
    fs::remove_all(work);
    fs::create_directories(work);

    write_fixture_files();
    check_fit_and_generate();
    check_validate();
    check_hi_and_reliability();
    check_error_paths();

    if (failures == 0) {
        std::puts("all cli checks passed");
        return 0;
    }
    std::cerr << failures << " cli check(s) failed\n";
    return 1;
}
