#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "condgen/combined.hpp"
#include "condgen/csv.hpp"
#include "condgen/dataset.hpp"
#include "condgen/rng.hpp"
#include "condgen/stochastic.hpp"

namespace condgen {

/// Bundled synthetic inspection fixture: a cable-style cohort drawn from
/// known ground-truth processes, with two inspections per asset. The whole
/// test suite runs against this generator, no external data needed.
///
/// Attributes:
///   PD  numerical, increasing  — exponential growth with persistence
///   ST  numerical, decreasing  — linear decline with persistence
///   VC  rating 1..5            — drifting latent score, convert policy
///   SC  rating 1..3            — age-driven categorical distribution
struct FixtureConfig {
    std::size_t asset_count = 1000;
    std::uint64_t seed = 811;
    int first_year = 2016;
    int interval_years = 3;
    int age_low = 1;
    int age_high = 37;
};

inline SchemaFile fixture_schema(const FixtureConfig& config = {}) {
    SchemaFile s;
    s.attributes = {
        {"PD", AttributeKind::numerical, 0, Direction::increasing_with_age},
        {"ST", AttributeKind::numerical, 0, Direction::decreasing_with_age},
        {"VC", AttributeKind::rating, 5, Direction::increasing_with_age},
        {"SC", AttributeKind::rating, 3, Direction::increasing_with_age},
    };
    s.inspection_interval_years = config.interval_years;
    return s;
}

namespace fixture_detail {

inline double pd_curve(double age) { return 0.6 * std::exp(0.055 * age); }
inline double st_curve(double age) { return 12.0 - 0.15 * age; }
inline double vc_latent(double age) { return std::clamp(0.10 + 0.018 * age, 0.0, 1.0); }

inline std::vector<double> sc_probabilities(double age) {
    const double p1 = std::clamp(0.90 - 0.022 * age, 0.02, 0.95);
    const double p3 = std::clamp(0.012 * age, 0.0, 0.6);
    return {p1, std::max(0.0, 1.0 - p1 - p3), p3};
}

} // namespace fixture_detail

/// Two inspection cycles per asset; the second inspection mixes persistence
/// of the asset's own first-cycle values with the age-driven trends, so both
/// the correlation and the degradation routes carry real signal.
inline InspectionDataset make_fixture_dataset(const FixtureConfig& config = {}) {
    using namespace fixture_detail;
    InspectionDataset ds;
    ds.schema = fixture_schema(config).attributes;
    ds.inspection_interval_years = config.interval_years;

    for (std::size_t i = 0; i < config.asset_count; ++i) {
        const std::string id = "fx" + std::to_string(i);
        RandomStream rng(derive_seed(config.seed, id));
        const double age0 = static_cast<double>(
            config.age_low + static_cast<int>(rng.uniform() *
                                              static_cast<double>(config.age_high - config.age_low + 1)));
        const double age1 = age0 + config.interval_years;

        // PD: multiplicative asset offset persists between inspections.
        const double pd_offset = std::max(-0.45, rng.normal(0.0, 0.08));
        const double pd0 = pd_curve(age0) * (1.0 + pd_offset);
        const double pd1 = std::max(
            0.05, 0.55 * pd0 + 0.45 * pd_curve(age1) + rng.normal(0.0, 0.03 * pd_curve(age1)));

        // ST: additive offset persists; declines with age.
        const double st0 = st_curve(age0) + rng.normal(0.0, 0.25);
        const double st1 = st0 - 0.15 * config.interval_years + rng.normal(0.0, 0.10);

        // VC: latent score in (0,1), persisted.
        const double x0 = std::clamp(vc_latent(age0) + rng.normal(0.0, 0.03), 0.01, 0.99);
        const int vc0 = numeric_to_rating(x0, 5);
        const double x1 = std::clamp(rating_to_numeric(vc0, 5) + 0.018 * config.interval_years +
                                         rng.normal(0.0, 0.02),
                                     0.01, 0.99);
        const int vc1 = numeric_to_rating(x1, 5);

        // SC: independent categorical draw per inspection.
        const auto p0 = sc_probabilities(age0);
        const auto p1 = sc_probabilities(age1);
        const int sc0 = static_cast<int>(rng.categorical(p0)) + 1;
        const int sc1 = static_cast<int>(rng.categorical(p1)) + 1;

        ds.records.push_back({id, config.first_year, age0,
                              {{"PD", pd0},
                               {"ST", st0},
                               {"VC", static_cast<double>(vc0)},
                               {"SC", static_cast<double>(sc0)}}});
        ds.records.push_back({id, config.first_year + config.interval_years, age1,
                              {{"PD", pd1},
                               {"ST", st1},
                               {"VC", static_cast<double>(vc1)},
                               {"SC", static_cast<double>(sc1)}}});
    }
    ds.validate();
    return ds;
}

/// Model recipes matching the fixture's generating processes: family choices
/// follow the observed degradation shapes, correlated sets follow the
/// built-in persistence.
inline std::vector<ConditionModelSpec> fixture_model_specs() {
    std::vector<ConditionModelSpec> specs;
    {
        ConditionModelSpec pd;
        pd.target = "PD";
        pd.degradation = {{DegradationFamily::exponential, std::nullopt},
                          {DegradationFamily::power, std::nullopt}};
        pd.correlation = {{{"PD"}, std::nullopt}};
        specs.push_back(pd);
    }
    {
        ConditionModelSpec st;
        st.target = "ST";
        // direction-normalized ST contains an exact zero at the dataset
        // maximum, so log-space families are off the menu here
        st.degradation = {{DegradationFamily::linear, std::nullopt},
                          {DegradationFamily::logarithmic, std::nullopt}};
        st.correlation = {{{"ST", "PD"}, std::nullopt}};
        specs.push_back(st);
    }
    {
        ConditionModelSpec vc;
        vc.target = "VC";
        vc.degradation = {{DegradationFamily::linear, std::nullopt}};
        vc.correlation = {{{"VC"}, std::nullopt}};
        vc.rating_policy = RatingPolicy::convert;
        specs.push_back(vc);
    }
    {
        ConditionModelSpec sc;
        sc.target = "SC";
        sc.rating_policy = RatingPolicy::categorical;
        specs.push_back(sc);
    }
    return specs;
}

/// Ground-truth health index rule over raw condition values, bounded away
/// from zero so percentage errors stay well defined.
inline double fixture_hi(const InspectionRecord& raw) {
    const double pd = raw.value("PD");
    const double st = raw.value("ST");
    const double vc = raw.value("VC");
    const double sc = raw.value("SC");
    const double hi =
        103.0 - 9.0 * pd - 6.0 * (12.0 - st) - 2.2 * (vc - 1.0) - 1.8 * (sc - 1.0);
    return std::clamp(hi, 5.0, 100.0);
}

/// Five-level discrete reading of the same rule (20-point bands).
inline int fixture_hi_level(const InspectionRecord& raw) {
    const double hi = fixture_hi(raw);
    return std::clamp(1 + static_cast<int>(hi / 20.0), 1, 5);
}

} // namespace condgen
