#include "emitron/error.h"
#include "emitron/ev_scenarios.h"
#include "emitron/seeding.h"

#include "test_support.h"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace emitron;
using doctest::Approx;

namespace {

struct World
{
    TrajectoryStore store;
    FleetRegistry registry;
    TypeAssignment assignment;
    TripLedger ledger;
    MonthlyScaling scaling;

    World(TrajectoryStore s, FleetRegistry r, std::uint64_t seed = 3)
    : store(std::move(s))
    , registry(std::move(r))
    , assignment(assign_vehicle_types(store, registry, seed))
    , ledger(evaluate_trips(store, assignment, registry, test::panis_petrol_co2(), EmissionModel{}, 2))
    , scaling(month_profile(), DemandFactors{}, store.od_pairs())
    {
    }

    double baseline(const EstimatorVariant& variant) const
    {
        const auto daily = ledger.od_daily(variant);
        double total     = 0.0;
        for (std::size_t od = 0; od < daily.per_od.size(); ++od) {
            total += daily.per_od[od] * scaling.annual(od, variant.temp_adjusted);
        }
        return total / 1e12;
    }
};

const EstimatorVariant kMicro{Basis::Micro, true, true};
const EstimatorVariant kMacro{Basis::MacroEpa, true, true};

FleetRegistry mixed_fleet()
{
    return test::make_registry({{2003, 2.0, 330.0}, {2003, 1.0, 290.0}, {2008, 2.0, 270.0}, {2008, 1.0, 250.0}, {2013, 3.0, 230.0}, {2018, 2.0, 190.0}}, 193.67);
}

std::set<TripId> ids(const ReplacementSet& set)
{
    return {set.trip_ids.begin(), set.trip_ids.end()};
}

}

TEST_CASE("target_trip_count")
{
    CHECK(target_trip_count(0.06, 1000) == 60);
    CHECK(target_trip_count(0.0, 1000) == 0);
    CHECK(target_trip_count(1.0, 7) == 7);
    CHECK(target_trip_count(0.05, 10) == 1); // 0.5 rounds up
    CHECK(target_trip_count(0.03, 10) == 0);
}

TEST_CASE("ScenarioSpec validation")
{
    CHECK_THROWS_AS((ScenarioSpec{ScenarioKind::Random, -0.1}.validate()), ValidationError);
    CHECK_THROWS_AS((ScenarioSpec{ScenarioKind::Random, 1.1}.validate()), ValidationError);
    CHECK_NOTHROW((ScenarioSpec{ScenarioKind::Random, 1.0}.validate()));
    CHECK(parse_scenario_kind("old_pessimistic") == ScenarioKind::OldPessimistic);
    CHECK(to_string(ScenarioKind::Oldest) == "oldest");
    CHECK_THROWS_AS(parse_scenario_kind("newest"), ValidationError);
}

TEST_CASE("select_replaced")
{
    const World world(test::constant_speed_store({{"A", "B"}, {"B", "A"}}, 250, 20.0, 60), mixed_fleet());

    SUBCASE("full share replaces every trip")
    {
        const auto set = select_replaced(world.store, world.assignment, world.registry, {ScenarioKind::Random, 1.0, 10.0, 1});
        CHECK(set.trip_ids.size() == world.store.size());
        CHECK(set.achieved_share == 1.0);
        CHECK_FALSE(set.shortfall);
        CHECK(scenario_savings(world.ledger, world.scaling, set, kMicro) == Approx(world.baseline(kMicro)));
        CHECK(scenario_savings(world.ledger, world.scaling, set, kMacro) == Approx(world.baseline(kMacro)));
    }

    SUBCASE("a share rounding to zero trips replaces nothing")
    {
        for (auto kind : all_scenario_kinds()) {
            const auto set = select_replaced(world.store, world.assignment, world.registry, {kind, 0.0009, 10.0, 1});
            CHECK(set.trip_ids.empty());
            CHECK(scenario_savings(world.ledger, world.scaling, set, kMicro) == 0.0);
        }
        CHECK_THROWS_AS(select_replaced(world.store, world.assignment, world.registry, {ScenarioKind::Random, 0.0, 10.0, 1}), ValidationError);
    }

    SUBCASE("old scenarios only pick old vehicles")
    {
        for (auto kind : {ScenarioKind::OldRandom, ScenarioKind::OldPessimistic, ScenarioKind::OldOptimistic}) {
            const auto set = select_replaced(world.store, world.assignment, world.registry, {kind, 0.1, 10.0, 4});
            CHECK(set.trip_ids.size() == 50);
            for (const auto& id : set.trip_ids) {
                CHECK(world.registry.age(world.assignment.at(id)) > 10);
            }
        }
    }

    SUBCASE("oldest takes the oldest cohort first")
    {
        const auto set = select_replaced(world.store, world.assignment, world.registry, {ScenarioKind::Oldest, 0.05, 10.0, 4});
        for (const auto& id : set.trip_ids) {
            CHECK(world.registry.age(world.assignment.at(id)) == 17);
        }
    }

    SUBCASE("pessimistic and optimistic pick the low and high emitters of each cohort")
    {
        const auto pess = select_replaced(world.store, world.assignment, world.registry, {ScenarioKind::OldPessimistic, 0.1, 10.0, 4});
        const auto opt  = select_replaced(world.store, world.assignment, world.registry, {ScenarioKind::OldOptimistic, 0.1, 10.0, 4});
        CHECK(scenario_savings(world.ledger, world.scaling, opt, kMacro) > scenario_savings(world.ledger, world.scaling, pess, kMacro));
        std::set<std::size_t> pessTypes;
        std::set<std::size_t> optTypes;
        for (const auto& id : pess.trip_ids) {
            pessTypes.insert(world.assignment.at(id));
        }
        for (const auto& id : opt.trip_ids) {
            optTypes.insert(world.assignment.at(id));
        }
        CHECK(pessTypes == std::set<std::size_t>{1, 3});
        CHECK(optTypes == std::set<std::size_t>{0, 2});
    }

    SUBCASE("nested across shares")
    {
        for (auto kind : all_scenario_kinds()) {
            std::set<TripId> previous;
            for (double share : {0.03, 0.06, 0.10, 0.2}) {
                const auto current = ids(select_replaced(world.store, world.assignment, world.registry, {kind, share, 10.0, 9}));
                CHECK(std::includes(current.begin(), current.end(), previous.begin(), previous.end()));
                previous = current;
            }
        }
    }

    SUBCASE("shortfall when the eligible pool is too small")
    {
        const auto set = select_replaced(world.store, world.assignment, world.registry, {ScenarioKind::OldRandom, 0.9, 10.0, 1});
        CHECK(set.shortfall);
        CHECK(set.target_count == 450);
        CHECK(set.trip_ids.size() < 450);
        CHECK(set.achieved_share < 0.9);
    }

    SUBCASE("deterministic per seed")
    {
        const ScenarioSpec spec{ScenarioKind::Random, 0.1, 10.0, 77};
        CHECK(select_replaced(world.store, world.assignment, world.registry, spec).trip_ids == select_replaced(world.store, world.assignment, world.registry, spec).trip_ids);
        CHECK(select_replaced(world.store, world.assignment, world.registry, spec).trip_ids != select_replaced(world.store, world.assignment, world.registry, {ScenarioKind::Random, 0.1, 10.0, 78}).trip_ids);
    }
}

TEST_CASE("two-type fleet: old random only picks the 15-year-old type")
{
    const World world(test::constant_speed_store({{"A", "B"}}, 400, 20.0, 60), test::make_registry({{2005, 1.0, 300.0}, {2017, 1.0, 200.0}}));
    const auto set = select_replaced(world.store, world.assignment, world.registry, {ScenarioKind::OldRandom, 0.1, 10.0, 2});
    CHECK(set.trip_ids.size() == 40);
    for (const auto& id : set.trip_ids) {
        CHECK(world.assignment.at(id) == 0);
    }
}

TEST_CASE("homogeneous world: random savings are exactly share times baseline")
{
    const World world(test::constant_speed_store({{"A", "B"}, {"B", "A"}}, 500, 20.0, 60), test::make_registry({{2008, 1.0, 250.0}}));
    for (double share : {0.03, 0.06, 0.10}) {
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const auto set = select_replaced(world.store, world.assignment, world.registry, {ScenarioKind::Random, share, 10.0, seed});
            for (const auto& variant : {kMicro, kMacro}) {
                CHECK(scenario_savings(world.ledger, world.scaling, set, variant) == Approx(share * world.baseline(variant)).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("run_scenario_suite")
{
    const World world(test::constant_speed_store({{"A", "B"}, {"B", "C"}}, 300, 20.0, 60), mixed_fleet());
    ScenarioSuiteOptions options;
    options.n_draws     = 6;
    options.master_seed = 42;
    options.threads     = 3;

    const auto cells = run_scenario_suite(world.store, world.assignment, world.registry, world.ledger, world.scaling, options);
    REQUIRE(cells.size() == 30);

    SUBCASE("layout and draw statistics")
    {
        CHECK(cells.front().share == 0.03);
        CHECK(cells.front().kind == ScenarioKind::Random);
        CHECK(cells.front().variant == kMacro);
        CHECK(cells[1].variant == kMicro);
        CHECK(cells[2].kind == ScenarioKind::OldRandom);
        CHECK(cells.back().share == 0.10);
        for (const auto& cell : cells) {
            REQUIRE(cell.draws.size() == 6);
            CHECK(cell.min <= cell.mean * (1 + 1e-12));
            CHECK(cell.mean <= cell.max * (1 + 1e-12));
            double sum = 0.0;
            for (double d : cell.draws) {
                sum += d;
            }
            CHECK(cell.mean == Approx(sum / 6));
        }
    }

    SUBCASE("savings grow with share")
    {
        for (std::size_t i = 0; i + 20 < cells.size(); ++i) {
            for (std::size_t d = 0; d < 6; ++d) {
                CHECK(cells[i + 10].draws[d] >= cells[i].draws[d]);
            }
        }
    }

    SUBCASE("draw d matches select_replaced with the keyed seed")
    {
        const auto set = select_replaced(world.store, world.assignment, world.registry, {ScenarioKind::OldRandom, 0.06, 10.0, keyed_seed(42, std::uint64_t{4})});
        const auto& cell = cells[10 + 2 + 1];
        REQUIRE(cell.kind == ScenarioKind::OldRandom);
        REQUIRE(cell.variant == kMicro);
        CHECK(cell.draws[4] == Approx(scenario_savings(world.ledger, world.scaling, set, kMicro)).epsilon(1e-12));
    }

    SUBCASE("thread count does not change results")
    {
        options.threads  = 1;
        const auto again = run_scenario_suite(world.store, world.assignment, world.registry, world.ledger, world.scaling, options);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            CHECK(cells[i].draws == again[i].draws);
        }
        CHECK(format_scenario_csv(cells) == format_scenario_csv(again));
    }

    SUBCASE("zero draws rejected")
    {
        options.n_draws = 0;
        CHECK_THROWS_AS(run_scenario_suite(world.store, world.assignment, world.registry, world.ledger, world.scaling, options), ValidationError);
    }

    SUBCASE("csv shapes")
    {
        const auto table = format_scenario_csv(cells);
        CHECK(table.starts_with("share,scenario,variant,mean_savings_mt,min,max,n_draws\n"));
        CHECK(std::count(table.begin(), table.end(), '\n') == 31);
        const auto plot = format_scenario_plot_csv(cells);
        CHECK(std::count(plot.begin(), plot.end(), '\n') == 1 + 30 * 6);
    }
}

TEST_CASE("single-type fleet makes the old scenarios coincide")
{
    const World world(test::constant_speed_store({{"A", "B"}}, 300, 20.0, 60), test::make_registry({{2005, 1.0, 280.0}}));
    ScenarioSuiteOptions options;
    options.n_draws     = 3;
    options.master_seed = 7;
    const auto cells    = run_scenario_suite(world.store, world.assignment, world.registry, world.ledger, world.scaling, options);
    for (const auto& cell : cells) {
        // Identical trips: any selection of the same size saves the same.
        CHECK(cell.mean == Approx(cells[cell.variant == kMacro ? 0 : 1].mean * cell.share / 0.03).epsilon(1e-9));
    }
}
