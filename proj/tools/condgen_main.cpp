// condgen: fit interpretable degradation/correlation models to inspection
// records, generate synthetic condition data, validate it, and drive
// health-index and replacement-cost studies from the generated conditions.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "condgen/csv.hpp"
#include "condgen/error.hpp"
#include "condgen/fixture.hpp"
#include "condgen/generation.hpp"
#include "condgen/health_index.hpp"
#include "condgen/io_util.hpp"
#include "condgen/pipeline.hpp"
#include "condgen/reliability.hpp"
#include "condgen/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::string out_dir = ".";
    unsigned threads = 1;
};

/// Fail-fast view over the run configuration: every missing field or absent
/// file is collected and reported in one aggregated error before any
/// computation starts.
class RunConfig {
public:
    RunConfig(json raw, fs::path base_dir)
        : raw_(std::move(raw)), base_(std::move(base_dir)) {}

    static RunConfig load(const std::string& path) {
        if (path.empty()) throw condgen::ConfigError("--config is required for this command");
        if (!fs::exists(path)) throw condgen::ConfigError("config file '" + path + "' does not exist");
        json parsed;
        try {
            parsed = json::parse(condgen::read_text(path));
        } catch (const json::exception& e) {
            throw condgen::ConfigError("config '" + path + "' is not valid JSON: " + e.what());
        }
        return RunConfig(std::move(parsed), fs::path(path).parent_path());
    }

    const json* find(const std::string& dotted) const {
        const json* node = &raw_;
        std::size_t start = 0;
        while (true) {
            const std::size_t dot = dotted.find('.', start);
            const std::string key = dotted.substr(start, dot - start);
            if (!node->is_object() || !node->contains(key)) return nullptr;
            node = &(*node)[key];
            if (dot == std::string::npos) return node;
            start = dot + 1;
        }
    }

    std::string require_string(const std::string& key) {
        const json* v = find(key);
        if (!v || !v->is_string()) {
            missing_.push_back(key);
            return {};
        }
        return v->get<std::string>();
    }

    fs::path require_file(const std::string& key) {
        const std::string s = require_string(key);
        if (s.empty()) return {};
        fs::path p = base_ / s;
        if (!fs::exists(p)) {
            missing_.push_back(key + " (file '" + p.string() + "' not found)");
            return {};
        }
        return p;
    }

    const json* require_object(const std::string& key) {
        const json* v = find(key);
        if (!v) missing_.push_back(key);
        return v;
    }

    template <typename T>
    T value_or(const std::string& key, T fallback) const {
        const json* v = find(key);
        if (!v) return fallback;
        return v->get<T>();
    }

    /// Throws one aggregated error listing everything that is missing.
    void check() const {
        if (missing_.empty()) return;
        std::string message = "configuration incomplete; missing or invalid fields:";
        for (const auto& m : missing_) message += "\n  - " + m;
        throw condgen::ConfigError(message);
    }

    const json& raw() const { return raw_; }
    const fs::path& base() const { return base_; }

private:
    json raw_;
    fs::path base_;
    std::vector<std::string> missing_;
};

std::uint64_t master_seed_of(const RunConfig& cfg, const GlobalArgs& args) {
    if (args.seed_override) return *args.seed_override;
    return cfg.value_or<std::uint64_t>("master_seed", 1);
}

void write_output(const fs::path& out_dir, const std::string& name, const std::string& content,
                  json& manifest) {
    fs::create_directories(out_dir);
    condgen::write_text_atomic(out_dir / name, content);
    manifest["outputs"].push_back(name);
}

void finish_manifest(const fs::path& out_dir, json manifest) {
    condgen::write_text_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

// The worker cap is not recorded: results are independent of it by design,
// and the manifest must be byte-identical for any thread count.
json new_manifest(const std::string& command, const GlobalArgs& args, std::uint64_t seed) {
    json m;
    m["command"] = command;
    m["config"] = args.config_path;
    m["master_seed"] = seed;
    m["outputs"] = json::array();
    return m;
}

std::vector<condgen::ConditionModelSpec> load_condition_specs(const fs::path& path) {
    const json j = json::parse(condgen::read_text(path));
    std::vector<condgen::ConditionModelSpec> specs;
    for (const auto& c : j.at("conditions")) specs.push_back(condgen::condition_spec_from_json(c));
    if (specs.empty()) throw condgen::ConfigError("model spec file lists no conditions");
    return specs;
}

condgen::InspectionDataset load_dataset(const fs::path& csv, const fs::path& schema_path,
                                        bool print_diagnostics = true) {
    const condgen::SchemaFile schema = condgen::load_schema(schema_path);
    const condgen::IngestReport report =
        condgen::ingest_csv(csv, schema.attributes, schema.inspection_interval_years);
    if (print_diagnostics) {
        for (const auto& d : report.rejected_rows)
            std::cerr << csv.filename().string() << ": rejected row " << d.row << ": " << d.message
                      << '\n';
        for (const auto& d : report.warnings)
            std::cerr << csv.filename().string() << ": " << d.message << '\n';
    }
    return report.dataset;
}

condgen::FitOptions fit_options_of(const RunConfig& cfg, const GlobalArgs&) {
    condgen::FitOptions options;
    options.sigma_fallback_fraction = cfg.value_or<double>("sigma_fallback_fraction", 0.05);
    options.neighbor_window = cfg.value_or<int>("neighbor_window", 2);
    options.estimate.nonnegative_weights = cfg.value_or<bool>("nonnegative_weights", false);
    return options;
}

condgen::GenerationOptions generation_options_of(const RunConfig& cfg, const GlobalArgs& args) {
    condgen::GenerationOptions options;
    options.diversify = cfg.value_or<bool>("generation.diversify", true);
    options.truncate_at_zero = cfg.value_or<bool>("generation.truncate_at_zero", true);
    options.threads = args.threads;
    return options;
}

condgen::HealthIndexConfig hi_config_of(const RunConfig& cfg) {
    condgen::HealthIndexConfig hi;
    hi.tree_count = cfg.value_or<int>("hi.trees", 50);
    hi.max_depth = cfg.value_or<int>("hi.max_depth", 3);
    hi.learning_rate = cfg.value_or<double>("hi.learning_rate", 0.1);
    hi.levels = cfg.value_or<int>("hi.levels", 5);
    hi.mode = cfg.value_or<std::string>("hi.mode", "continuous") == std::string("discrete")
                  ? condgen::HealthIndexMode::discrete
                  : condgen::HealthIndexMode::continuous;
    return hi;
}

/// Ingests a raw-space CSV against the schema a fitted model bundle expects
/// (direction flags restored from the recorded transforms).
condgen::InspectionDataset ingest_raw_for_models(const fs::path& csv,
                                                 const condgen::ModelSet& models) {
    const condgen::InspectionDataset schema_holder{models.schema, {}, models.inspection_interval_years};
    const auto raw_schema =
        condgen::invert_direction(schema_holder, models.direction_transforms).schema;
    const condgen::IngestReport report =
        condgen::ingest_csv(csv, raw_schema, models.inspection_interval_years);
    for (const auto& d : report.rejected_rows)
        std::cerr << csv.filename().string() << ": rejected row " << d.row << ": " << d.message << '\n';
    for (const auto& d : report.warnings) std::cerr << csv.filename().string() << ": " << d.message << '\n';
    return report.dataset;
}

/// Reads one numeric column from a CSV keyed by (asset_id, inspection_year).
std::map<std::pair<std::string, int>, double> read_label_column(const fs::path& csv,
                                                                const std::string& column) {
    const std::string text = condgen::read_text(csv);
    std::istringstream in(text);
    std::string header_line;
    if (!std::getline(in, header_line)) throw condgen::IoError("'" + csv.string() + "' is empty");
    const auto header = condgen::detail::split_csv_line(header_line);
    int col_label = -1, col_asset = -1, col_year = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == column) col_label = static_cast<int>(i);
        if (header[i] == "asset_id") col_asset = static_cast<int>(i);
        if (header[i] == "inspection_year") col_year = static_cast<int>(i);
    }
    if (col_label < 0)
        throw condgen::SchemaError("label column '" + column + "' not found in '" + csv.string() + "'");
    if (col_asset < 0 || col_year < 0)
        throw condgen::SchemaError("'" + csv.string() + "' needs asset_id and inspection_year columns");

    std::map<std::pair<std::string, int>, double> out;
    std::string line;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto cells = condgen::detail::split_csv_line(line);
        if (cells.size() < header.size()) continue;
        bool ok = false;
        const double label = condgen::parse_double(cells[static_cast<std::size_t>(col_label)], ok);
        if (!ok)
            throw condgen::ValidationError("'" + csv.string() + "' row " + std::to_string(row) +
                                           ": unparseable label '" +
                                           cells[static_cast<std::size_t>(col_label)] + "'");
        bool year_ok = false;
        const int year = static_cast<int>(
            condgen::parse_double(cells[static_cast<std::size_t>(col_year)], year_ok));
        if (!year_ok) continue;
        out[{cells[static_cast<std::size_t>(col_asset)], year}] = label;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int run_fit(const GlobalArgs& args) {
    RunConfig cfg = RunConfig::load(args.config_path);
    const fs::path schema_path = cfg.require_file("schema");
    const fs::path train_path = cfg.require_file("train_csv");
    const fs::path spec_path = cfg.require_file("model_spec");
    cfg.check();

    const condgen::InspectionDataset train = load_dataset(train_path, schema_path);
    const auto specs = load_condition_specs(spec_path);

    bool wants_correlation = false;
    for (const auto& spec : specs)
        for (const auto& term : spec.correlation)
            wants_correlation |= term.fixed_weight.value_or(1.0) != 0.0;
    if (wants_correlation && condgen::consecutive_pairs(train).empty())
        throw condgen::ConfigError(
            "model spec uses correlation terms but the training data holds no pair of consecutive "
            "inspections; correlation fitting needs records from at least two inspection years one "
            "interval apart");

    const condgen::FitReport fit = condgen::fit_model_set(train, specs, fit_options_of(cfg, args));

    const std::uint64_t seed = master_seed_of(cfg, args);
    json manifest = new_manifest("fit", args, seed);
    manifest["inputs"] = {{"schema", schema_path.string()},
                          {"train_csv", train_path.string()},
                          {"model_spec", spec_path.string()}};
    const fs::path out_dir(args.out_dir);
    write_output(out_dir, "models.json", condgen::to_json(fit.models).dump(2) + "\n", manifest);
    write_output(out_dir, "fit_report.txt",
                 condgen::describe_model_set(fit.models, fit.diagnostics), manifest);
    finish_manifest(out_dir, manifest);
    return 0;
}

int run_generate(const GlobalArgs& args) {
    RunConfig cfg = RunConfig::load(args.config_path);
    const std::string source = cfg.value_or<std::string>("generate.source", "dataset");
    if (source != "dataset" && source != "hypothetical")
        throw condgen::ConfigError("generate.source must be 'dataset' or 'hypothetical'");
    const fs::path models_path = cfg.require_file("models");
    const json* plan_json = cfg.require_object("plan");
    fs::path seed_path;
    const json* ages_json = nullptr;
    if (source == "dataset")
        seed_path = cfg.require_file("dataset_csv");
    else
        ages_json = cfg.require_object("hypothetical.ages");
    cfg.check();

    const condgen::ModelSet models =
        condgen::model_set_from_json(json::parse(condgen::read_text(models_path)));
    condgen::GenerationPlan plan = condgen::plan_from_json(*plan_json);
    const std::uint64_t seed = master_seed_of(cfg, args);
    plan.master_seed = seed;
    const condgen::GenerationOptions options = generation_options_of(cfg, args);

    std::vector<condgen::InspectionDataset> generated;
    json manifest = new_manifest("generate", args, seed);
    manifest["plan"] = condgen::to_json(plan);
    manifest["inputs"] = {{"models", models_path.string()}};

    if (source == "dataset") {
        const condgen::InspectionDataset raw_seed = ingest_raw_for_models(seed_path, models);
        const condgen::InspectionDataset normalized =
            condgen::apply_direction(raw_seed, models.direction_transforms);
        generated = condgen::generate_sequence(models, normalized, plan, options);
        manifest["inputs"]["dataset_csv"] = seed_path.string();
    } else {
        const auto ages = condgen::age_distribution_from_json(*ages_json);
        const auto count = cfg.value_or<std::size_t>("hypothetical.asset_count", 100);
        generated = condgen::generate_hypothetical(models, count, ages, plan, options);
        manifest["hypothetical"] = {{"asset_count", count}, {"ages", condgen::to_json(ages)}};
    }

    const fs::path out_dir(args.out_dir);
    const std::size_t first_index = source == "hypothetical" ? 0 : 1;
    for (std::size_t k = 0; k < generated.size(); ++k) {
        const condgen::InspectionDataset raw_out =
            condgen::invert_direction(generated[k], models.direction_transforms);
        write_output(out_dir, "gen_step" + std::to_string(first_index + k) + ".csv",
                     condgen::to_csv(raw_out), manifest);
    }
    finish_manifest(out_dir, manifest);
    return 0;
}

int run_validate(const GlobalArgs& args, const std::string& mode) {
    RunConfig cfg = RunConfig::load(args.config_path);
    const fs::path schema_path = cfg.require_file("schema");
    const fs::path train_path = cfg.require_file("train_csv");
    const fs::path test_path = cfg.require_file("test_csv");
    const fs::path spec_path = cfg.require_file("model_spec");
    std::string label_column;
    fs::path label_path;
    if (mode == "test3") {
        label_column = cfg.require_string("hi.label_column");
        label_path = cfg.require_file("hi.train_csv");
    }
    cfg.check();

    const condgen::InspectionDataset train = load_dataset(train_path, schema_path);
    const condgen::InspectionDataset test = load_dataset(test_path, schema_path);

    condgen::ValidationConfig vcfg;
    vcfg.specs = load_condition_specs(spec_path);
    vcfg.master_seed = master_seed_of(cfg, args);
    vcfg.kl_bins = cfg.value_or<int>("validate.kl_bins", 20);
    vcfg.threads = args.threads;
    vcfg.fit = fit_options_of(cfg, args);

    json manifest = new_manifest("validate", args, vcfg.master_seed);
    manifest["mode"] = mode;
    manifest["inputs"] = {{"schema", schema_path.string()},
                          {"train_csv", train_path.string()},
                          {"test_csv", test_path.string()},
                          {"model_spec", spec_path.string()}};
    const fs::path out_dir(args.out_dir);

    if (mode == "test1" || mode == "test2") {
        const auto rows = mode == "test1" ? condgen::run_test1(train, test, vcfg)
                                          : condgen::run_test2(train, test, vcfg);
        json table = json::array();
        for (const auto& r : rows) table.push_back(condgen::to_json(r));
        write_output(out_dir, "metrics_" + mode + ".json", table.dump(2) + "\n", manifest);
        write_output(out_dir, "metrics_" + mode + ".csv", condgen::metrics_table_csv(rows), manifest);
    } else if (mode == "test3") {
        const auto labels = read_label_column(label_path, label_column);
        auto label_of = [&](const condgen::InspectionRecord& r) {
            auto it = labels.find({r.asset_id, r.inspection_year});
            if (it == labels.end())
                throw condgen::ValidationError("no health index label for asset '" + r.asset_id +
                                               "' year " + std::to_string(r.inspection_year));
            return it->second;
        };
        const condgen::HiValidation result =
            condgen::run_test3(train, test, vcfg, hi_config_of(cfg), label_of);
        json j{{"mode", result.mode == condgen::HealthIndexMode::discrete ? "discrete" : "continuous"},
               {"sample_count", result.sample_count}};
        j["mape"] = result.mape_value ? json(*result.mape_value) : json(nullptr);
        j["himp"] = result.himp_value ? json(*result.himp_value) : json(nullptr);
        write_output(out_dir, "hi_comparison.json", j.dump(2) + "\n", manifest);
    } else if (mode == "test4") {
        const std::vector<std::size_t> sizes =
            cfg.value_or<std::vector<std::size_t>>("validate.sizes", {50, 100, 250, 500, 1000});
        const auto repeats = cfg.value_or<std::size_t>("validate.repeats", 10);
        const auto points = condgen::run_test4(train, test, vcfg, sizes, repeats);
        json series = json::array();
        for (const auto& p : points) series.push_back(condgen::to_json(p));
        write_output(out_dir, "size_sweep.json", series.dump(2) + "\n", manifest);
        write_output(out_dir, "size_sweep.csv", condgen::size_sweep_csv(points), manifest);
    } else {
        throw condgen::ConfigError("validate mode must be one of test1|test2|test3|test4");
    }
    finish_manifest(out_dir, manifest);
    return 0;
}

int run_hi_train(const GlobalArgs& args) {
    RunConfig cfg = RunConfig::load(args.config_path);
    const fs::path models_path = cfg.require_file("models");
    const fs::path train_path = cfg.require_file("hi.train_csv");
    const std::string label_column = cfg.require_string("hi.label_column");
    cfg.check();

    const condgen::ModelSet models =
        condgen::model_set_from_json(json::parse(condgen::read_text(models_path)));
    const condgen::InspectionDataset raw = ingest_raw_for_models(train_path, models);
    const auto labels = read_label_column(train_path, label_column);

    const condgen::InspectionDataset model_space = condgen::to_model_space_dataset(
        condgen::apply_direction(raw, models.direction_transforms));
    std::vector<std::string> features;
    for (const auto& a : model_space.schema) features.push_back(a.name);

    std::vector<condgen::AttributeValues> rows;
    std::vector<double> label_values;
    for (std::size_t i = 0; i < model_space.records.size(); ++i) {
        const auto& rec = model_space.records[i];
        bool complete = true;
        for (const auto& f : features) complete &= rec.has_value(f);
        if (!complete) continue;
        auto it = labels.find({rec.asset_id, rec.inspection_year});
        if (it == labels.end()) continue;
        rows.push_back(rec.values);
        label_values.push_back(it->second);
    }

    const condgen::HealthIndexTraining trained =
        condgen::train_health_index(features, rows, label_values, hi_config_of(cfg));

    const std::uint64_t seed = master_seed_of(cfg, args);
    json manifest = new_manifest("hi-train", args, seed);
    manifest["inputs"] = {{"models", models_path.string()}, {"hi_train_csv", train_path.string()}};
    manifest["labeled_records"] = rows.size();
    if (trained.constant_labels) manifest["constant_labels"] = true;
    const fs::path out_dir(args.out_dir);
    write_output(out_dir, "hi_model.json", condgen::to_json(trained.model).dump(2) + "\n", manifest);
    finish_manifest(out_dir, manifest);
    return 0;
}

int run_hi_apply(const GlobalArgs& args) {
    RunConfig cfg = RunConfig::load(args.config_path);
    const fs::path models_path = cfg.require_file("models");
    const fs::path hi_path = cfg.require_file("hi.model");
    const fs::path data_path = cfg.require_file("dataset_csv");
    cfg.check();

    const condgen::ModelSet models =
        condgen::model_set_from_json(json::parse(condgen::read_text(models_path)));
    const condgen::HealthIndexModel hi =
        condgen::health_index_from_json(json::parse(condgen::read_text(hi_path)));

    const condgen::InspectionDataset raw = ingest_raw_for_models(data_path, models);
    const condgen::InspectionDataset model_space = condgen::to_model_space_dataset(
        condgen::apply_direction(raw, models.direction_transforms));

    std::ostringstream csv;
    csv << "asset_id,inspection_year,age_years,hi\n";
    for (const auto& rec : model_space.records) {
        csv << rec.asset_id << ',' << rec.inspection_year << ','
            << condgen::format_double(rec.age_years) << ',';
        if (hi.mode == condgen::HealthIndexMode::discrete)
            csv << hi.predict_level(rec.values);
        else
            csv << condgen::format_double(hi.predict(rec.values));
        csv << '\n';
    }

    const std::uint64_t seed = master_seed_of(cfg, args);
    json manifest = new_manifest("hi-apply", args, seed);
    manifest["inputs"] = {{"models", models_path.string()},
                          {"hi_model", hi_path.string()},
                          {"dataset_csv", data_path.string()}};
    const fs::path out_dir(args.out_dir);
    write_output(out_dir, "hi_predictions.csv", csv.str(), manifest);
    finish_manifest(out_dir, manifest);
    return 0;
}

struct SimulationInputs {
    fs::path assumptions_path;
    fs::path models_path;
    fs::path hi_path;
    fs::path seed_path;

    static SimulationInputs require(RunConfig& cfg) {
        SimulationInputs in;
        in.assumptions_path = cfg.require_file("assumptions");
        in.models_path = cfg.require_file("models");
        in.hi_path = cfg.require_file("hi.model");
        in.seed_path = cfg.require_file("dataset_csv");
        return in;
    }
};

condgen::TrajectorySet trajectories_of(const SimulationInputs& in, const RunConfig& cfg,
                                       const GlobalArgs& args,
                                       const condgen::SimulationAssumptions& assumptions,
                                       std::uint64_t seed, json& manifest) {
    const condgen::ModelSet models =
        condgen::model_set_from_json(json::parse(condgen::read_text(in.models_path)));
    const condgen::HealthIndexModel hi =
        condgen::health_index_from_json(json::parse(condgen::read_text(in.hi_path)));
    const condgen::InspectionDataset raw = ingest_raw_for_models(in.seed_path, models);
    const condgen::InspectionDataset normalized =
        condgen::apply_direction(raw, models.direction_transforms);

    manifest["inputs"] = {{"assumptions", in.assumptions_path.string()},
                          {"models", in.models_path.string()},
                          {"hi_model", in.hi_path.string()},
                          {"dataset_csv", in.seed_path.string()}};

    condgen::GenerationOptions options = generation_options_of(cfg, args);
    return condgen::build_trajectories(models, normalized, hi, assumptions, seed, options);
}

std::string cost_by_year_csv(const condgen::CostReport& report, int start_year) {
    std::ostringstream out;
    out << "year,prc,rrc,fc,toc,expected_failures,toc_stderr\n";
    for (std::size_t y = 0; y < report.per_year_mean.size(); ++y) {
        const auto& m = report.per_year_mean[y];
        out << (start_year + static_cast<int>(y)) << ',' << condgen::format_double(m.proactive) << ','
            << condgen::format_double(m.reactive) << ',' << condgen::format_double(m.failure) << ','
            << condgen::format_double(m.total) << ',' << condgen::format_double(m.failures) << ','
            << condgen::format_double(report.per_year_stderr[y].total) << '\n';
    }
    return out.str();
}

int run_simulate(const GlobalArgs& args) {
    RunConfig cfg = RunConfig::load(args.config_path);
    const SimulationInputs inputs = SimulationInputs::require(cfg);
    cfg.check();

    const std::uint64_t seed = master_seed_of(cfg, args);
    json manifest = new_manifest("simulate", args, seed);

    const condgen::SimulationAssumptions assumptions =
        condgen::assumptions_from_json(json::parse(condgen::read_text(inputs.assumptions_path)));
    manifest["assumptions"] = condgen::to_json(assumptions);

    const condgen::TrajectorySet trajectories =
        trajectories_of(inputs, cfg, args, assumptions, seed, manifest);

    const int x = cfg.value_or<int>("simulate.replacement_count", 0);
    const auto iterations = cfg.value_or<std::uint64_t>("simulate.iterations", 10000);
    const condgen::CostReport report =
        condgen::simulate(trajectories, assumptions, x, iterations, seed, args.threads);

    const fs::path out_dir(args.out_dir);
    write_output(out_dir, "cost_report.json", condgen::to_json(report).dump(2) + "\n", manifest);
    write_output(out_dir, "cost_by_year.csv", cost_by_year_csv(report, trajectories.start_year),
                 manifest);
    finish_manifest(out_dir, manifest);
    return 0;
}

int run_optimize(const GlobalArgs& args) {
    RunConfig cfg = RunConfig::load(args.config_path);
    const SimulationInputs inputs = SimulationInputs::require(cfg);
    const json* candidates_json = cfg.require_object("optimize.candidates");
    cfg.check();

    const std::uint64_t seed = master_seed_of(cfg, args);
    json manifest = new_manifest("optimize", args, seed);

    const condgen::SimulationAssumptions assumptions =
        condgen::assumptions_from_json(json::parse(condgen::read_text(inputs.assumptions_path)));
    manifest["assumptions"] = condgen::to_json(assumptions);

    const condgen::TrajectorySet trajectories =
        trajectories_of(inputs, cfg, args, assumptions, seed, manifest);

    const std::vector<int> candidates = candidates_json->get<std::vector<int>>();
    const auto iterations = cfg.value_or<std::uint64_t>("optimize.iterations", 2000);
    const condgen::OptimizationResult result = condgen::optimize_replacement(
        trajectories, assumptions, candidates, iterations, seed, args.threads);

    json j;
    j["best_replacement_count"] = result.best_replacement_count;
    j["reports"] = json::array();
    for (const auto& r : result.reports) j["reports"].push_back(condgen::to_json(r));

    std::ostringstream csv;
    csv << "replacement_count,prc,rrc,fc,toc,toc_stderr\n";
    for (const auto& r : result.reports)
        csv << r.replacement_count << ',' << condgen::format_double(r.total_mean.proactive) << ','
            << condgen::format_double(r.total_mean.reactive) << ','
            << condgen::format_double(r.total_mean.failure) << ','
            << condgen::format_double(r.total_mean.total) << ','
            << condgen::format_double(r.total_stderr.total) << '\n';

    const fs::path out_dir(args.out_dir);
    write_output(out_dir, "optimize_report.json", j.dump(2) + "\n", manifest);
    write_output(out_dir, "cost_by_strategy.csv", csv.str(), manifest);
    finish_manifest(out_dir, manifest);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"condgen: in-group asset condition data generation and reliability assessment"};
    app.require_subcommand(1);

    GlobalArgs args;
    app.add_option("--config", args.config_path, "Path to the run configuration JSON");
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "Master seed (overrides config)");
    app.add_option("--out", args.out_dir, "Output directory (default: current)");
    app.add_option("--threads", args.threads, "Worker thread cap (default 1)");

    auto* cmd_fit = app.add_subcommand("fit", "Fit condition models from inspection records");
    auto* cmd_generate = app.add_subcommand("generate", "Generate synthetic condition data");
    auto* cmd_validate = app.add_subcommand("validate", "Score generated data against held-out records");
    std::string validate_mode = "test1";
    cmd_validate->add_option("--mode", validate_mode, "test1|test2|test3|test4")->required();
    auto* cmd_hi_train = app.add_subcommand("hi-train", "Extract health index rules from labels");
    auto* cmd_hi_apply = app.add_subcommand("hi-apply", "Apply a health index model to a dataset");
    auto* cmd_simulate = app.add_subcommand("simulate", "Sequential Monte Carlo cost simulation");
    auto* cmd_optimize = app.add_subcommand("optimize", "Sweep annual replacement counts for minimum TOC");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    if (seed_opt->count() > 0) args.seed_override = seed_value;

    try {
        if (cmd_fit->parsed()) return run_fit(args);
        if (cmd_generate->parsed()) return run_generate(args);
        if (cmd_validate->parsed()) return run_validate(args, validate_mode);
        if (cmd_hi_train->parsed()) return run_hi_train(args);
        if (cmd_hi_apply->parsed()) return run_hi_apply(args);
        if (cmd_simulate->parsed()) return run_simulate(args);
        if (cmd_optimize->parsed()) return run_optimize(args);
    } catch (const condgen::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
