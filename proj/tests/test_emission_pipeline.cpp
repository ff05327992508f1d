#include "emitron/emission_pipeline.h"
#include "emitron/error.h"

#include "test_support.h"

#include <doctest.h>

#include <json.hpp>

#include <set>

using namespace emitron;
using doctest::Approx;

namespace {

TripLedger ledger_for(const TrajectoryStore& store, const FleetRegistry& registry, std::uint64_t seed = 5)
{
    return evaluate_trips(store, assign_vehicle_types(store, registry, seed), registry, test::panis_petrol_co2(), EmissionModel{}, 2);
}

}

TEST_CASE("macro_daily")
{
    // 10 miles at 10 m/s.
    const auto seconds = static_cast<std::size_t>(10 * kMetersPerMile / 10.0);
    auto traj          = test::make_trajectory("T1", {"A", "B"}, std::vector<double>(seconds, 10.0));
    traj.points.push_back(TrajectoryPoint{static_cast<double>(seconds), 10 * kMetersPerMile - 10.0 * seconds, 0.0});
    const TrajectoryStore store(std::vector<Trajectory>{traj});

    const auto daily = macro_daily(store, 368.0);
    CHECK(daily.total == Approx(3680.0));
    REQUIRE(daily.per_od.size() == 1);
    CHECK(daily.per_od[0] == daily.total);
    CHECK(macro_daily(store, 0.0).total == 0.0);
}

TEST_CASE("macro_monthly")
{
    const auto jan            = month_profile()[0];
    const double dailyVmt     = 2407e6 / 31; // miles
    const double dailyGrams   = dailyVmt * 368.0;
    const double megaton      = 1e12;
    const EstimatorVariant base{Basis::MacroEpa, false, false};
    const EstimatorVariant temp{Basis::MacroEpa, true, false};
    const EstimatorVariant both{Basis::MacroEpa, true, true};

    CHECK(macro_monthly(dailyGrams, jan, 1.0, base, 368.0, 246.0) / megaton == Approx(0.886).epsilon(0.001));
    CHECK(macro_monthly(dailyGrams, jan, 1.0, temp, 368.0, 246.0) / megaton == Approx(0.98).epsilon(0.01));
    CHECK(macro_monthly(dailyGrams, jan, 1.0, both, 368.0, 246.0) / megaton == Approx(0.657).epsilon(0.001));

    const MonthProfile unit{5, 1, 1.0, "May"};
    CHECK(macro_monthly(1234.5, unit, 1.0, temp, 368.0, 246.0) == 1234.5);
    CHECK(macro_monthly(100.0, unit, 1.5, base, 368.0, 246.0) == 150.0);
}

TEST_CASE("EstimatorVariant")
{
    std::set<std::size_t> columns;
    std::set<std::string> names;
    for (const auto& variant : EstimatorVariant::all()) {
        columns.insert(variant.column());
        names.insert(variant.name());
        CHECK(EstimatorVariant::parse(variant.name()) == variant);
    }
    CHECK(columns.size() == 8);
    CHECK(names.size() == 8);
    CHECK(EstimatorVariant::parse("epa_base") == EstimatorVariant{Basis::MacroEpa, false, false});
    CHECK(EstimatorVariant::parse("micro_type_temp") == EstimatorVariant{Basis::Micro, true, true});
    CHECK(EstimatorVariant{Basis::MacroEpa, false, false}.column() == 0);
    CHECK_THROWS_AS(EstimatorVariant::parse("macro"), ValidationError);
}

TEST_CASE("micro_daily")
{
    const auto store = test::constant_speed_store({{"A", "B"}, {"B", "A"}}, 20, 15.0, 120);
    const auto& table = test::panis_petrol_co2();

    double expected = 0.0;
    for (std::size_t i = 0; i < store.size(); ++i) {
        expected += trajectory_emission(store[i], table, VehicleCategory::PetrolCar, "CO2");
    }

    const auto unit       = test::make_registry({{2010, 1.0, 200.0}}, 200.0);
    const auto assignment = assign_vehicle_types(store, unit, 1);
    CHECK(micro_daily(store, assignment, unit, table, EmissionModel{}, false).total == Approx(expected));
    CHECK(micro_daily(store, assignment, unit, table, EmissionModel{}, true).total == Approx(expected));

    const auto doubled = test::make_registry({{2010, 1.0, 400.0}}, 200.0);
    CHECK(micro_daily(store, assignment, doubled, table, EmissionModel{}, true).total == 2.0 * micro_daily(store, assignment, doubled, table, EmissionModel{}, false).total);

    TypeAssignment empty;
    CHECK_THROWS_AS(micro_daily(store, empty, unit, table, EmissionModel{}, false), ValidationError);
}

TEST_CASE("TripLedger attribution")
{
    const auto store    = test::constant_speed_store({{"A", "B"}, {"B", "C"}, {"C", "A"}}, 30, 20.0, 300);
    const auto registry = test::make_registry({{2005, 2.0, 320.0}, {2012, 3.0, 240.0}, {2018, 1.0, 180.0}});
    const auto ledger   = ledger_for(store, registry);

    CHECK(ledger.fleet_mean_rate() == Approx((2 * 320.0 + 3 * 240.0 + 180.0) / 6));
    for (const auto& variant : EstimatorVariant::all()) {
        const auto daily = ledger.od_daily(variant);
        for (std::size_t od = 0; od < ledger.od_pairs().size(); ++od) {
            double sum = 0.0;
            for (auto trip : ledger.group(od)) {
                sum += ledger.trip_daily(trip, variant);
            }
            CHECK(sum == Approx(daily.per_od[od]).epsilon(1e-12));
        }
    }
    CHECK(ledger.index_of(store[4].trip_id) == 4);
    CHECK_FALSE(ledger.index_of("nope").has_value());
}

TEST_CASE("estimate_matrix properties")
{
    const auto store    = test::constant_speed_store({{"A", "B"}, {"B", "A"}}, 40, 22.0, 600);
    const auto registry = test::make_registry({{2005, 2.0, 320.0}, {2012, 3.0, 240.0}, {2018, 1.0, 180.0}}, 193.67);
    const auto ledger   = ledger_for(store, registry);
    const auto months   = month_profile();

    DemandFactors factors;
    const std::array<double, 12> level{0.8, 0.8, 0.9, 1.0, 1.05, 1.15, 1.25, 1.25, 1.05, 1.0, 0.9, 0.85};
    for (int m = 1; m <= 12; ++m) {
        factors.set_global(m, level[m - 1]);
    }
    factors.set({"A", "B"}, 7, 1.4);

    const auto report = estimate_matrix(ledger, months, factors);
    const double ratio = ledger.fleet_mean_rate() / ledger.gamma();

    for (std::size_t m = 0; m < 12; ++m) {
        for (auto basis : {Basis::MacroEpa, Basis::Micro}) {
            for (bool type : {false, true}) {
                CHECK(report.monthly({basis, true, type}, m) >= report.monthly({basis, false, type}, m));
            }
        }
        CHECK(report.monthly({Basis::MacroEpa, false, true}, m) == Approx(report.monthly({Basis::MacroEpa, false, false}, m) * ratio).epsilon(1e-12));
        CHECK(report.monthly({Basis::MacroEpa, true, true}, m) == Approx(report.monthly({Basis::MacroEpa, true, false}, m) * ratio).epsilon(1e-12));
    }

    for (const auto& variant : EstimatorVariant::all()) {
        double sum = 0.0;
        for (std::size_t m = 0; m < 12; ++m) {
            CHECK(report.monthly(variant, m) >= 0.0);
            sum += report.monthly(variant, m);
        }
        CHECK(report.annual(variant) == Approx(sum).epsilon(1e-12));
        CHECK(report.monthly(variant, 6) + report.monthly(variant, 7) > report.monthly(variant, 0) + report.monthly(variant, 1));
    }

    SUBCASE("deterministic")
    {
        const auto again = estimate_matrix(ledger_for(store, registry), months, factors);
        CHECK(again.monthly_mt == report.monthly_mt);
        CHECK(format_report_csv(again) == format_report_csv(report));
    }

    SUBCASE("duplicating every trip doubles the micro columns")
    {
        std::vector<Trajectory> trips;
        for (std::size_t i = 0; i < store.size(); ++i) {
            trips.push_back(store[i]);
            auto copy    = store[i];
            copy.trip_id += "_dup";
            trips.push_back(copy);
        }
        const TrajectoryStore twice(std::move(trips));
        TypeAssignment assignment;
        const auto original = assign_vehicle_types(store, registry, 5);
        for (std::size_t i = 0; i < store.size(); ++i) {
            const auto type = original.at(store[i].trip_id);
            assignment.type_of_trip[store[i].trip_id]          = type;
            assignment.type_of_trip[store[i].trip_id + "_dup"] = type;
        }
        const auto doubled = estimate_matrix(evaluate_trips(twice, assignment, registry, test::panis_petrol_co2(), EmissionModel{}, 1), months, factors);
        for (const auto& variant : EstimatorVariant::all()) {
            if (variant.basis == Basis::Micro) {
                CHECK(doubled.annual(variant) == Approx(2.0 * report.annual(variant)).epsilon(1e-12));
            }
        }
        CHECK(doubled.annual_vmt_million == Approx(2.0 * report.annual_vmt_million));
    }

    SUBCASE("output formats")
    {
        auto withDigest          = report;
        withDigest.config_digest = "abc";
        const auto csv           = format_report_csv(withDigest);
        CHECK(csv.starts_with("# config_digest=abc\n"));
        CHECK(csv.find("Annual") != std::string::npos);
        const auto doc = nlohmann::json::parse(format_report_json(withDigest));
        CHECK(doc.is_object());
        CHECK(format_monthly_plot_csv(withDigest).find("month,series,value") != std::string::npos);
    }
}
