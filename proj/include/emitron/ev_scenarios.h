#pragma once

#include "emitron/emission_pipeline.h"
#include "emitron/fleet_registry.h"
#include "emitron/trajectory_store.h"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emitron {

enum class ScenarioKind
{
    Random,         // uniform over all trips
    OldRandom,      // uniform over trips whose vehicle is older than the threshold
    OldPessimistic, // lowest emitters within each old age cohort
    OldOptimistic,  // highest emitters within each old age cohort
    Oldest,         // oldest vehicles first
};

std::string_view to_string(ScenarioKind kind) noexcept;
ScenarioKind parse_scenario_kind(std::string_view text);
const std::array<ScenarioKind, 5>& all_scenario_kinds() noexcept;

struct ScenarioSpec
{
    ScenarioKind kind    = ScenarioKind::Random;
    double market_share  = 0.06;
    double age_threshold = 10.0; // years
    std::uint64_t seed   = 0;

    void validate() const;
};

struct ReplacementSet
{
    ScenarioKind kind = ScenarioKind::Random;
    std::vector<TripId> trip_ids;
    std::size_t target_count = 0;
    double target_share      = 0.0;
    double achieved_share    = 0.0;
    bool shortfall           = false; // eligible pool smaller than the target
};

// Seeded total order over the eligible trips for a scenario. Replacement at
// any share is a prefix of this order, so sets are nested across shares.
std::vector<std::size_t> selection_order(const TrajectoryStore& store, const TypeAssignment& assignment, const FleetRegistry& registry, ScenarioKind kind, double ageThreshold, std::uint64_t seed);

// round(share · trips), ties up.
std::size_t target_trip_count(double share, std::size_t nTrips);

ReplacementSet select_replaced(const TrajectoryStore& store, const TypeAssignment& assignment, const FleetRegistry& registry, const ScenarioSpec& spec);

// Tailpipe-only annual savings in Mt: the baseline annual emission of the
// replaced trips under the given variant.
double scenario_savings(const TripLedger& ledger, const MonthlyScaling& scaling, const ReplacementSet& replacement, const EstimatorVariant& variant);

struct SavingsCell
{
    double share = 0.0;
    ScenarioKind kind = ScenarioKind::Random;
    EstimatorVariant variant;
    double mean = 0.0;
    double min  = 0.0;
    double max  = 0.0;
    std::vector<double> draws;
    double achieved_share = 0.0;
    bool shortfall        = false;
};

struct ScenarioSuiteOptions
{
    std::vector<double> shares{0.03, 0.06, 0.10};
    std::vector<ScenarioKind> kinds{all_scenario_kinds().begin(), all_scenario_kinds().end()};
    std::vector<EstimatorVariant> variants{EstimatorVariant{Basis::MacroEpa, true, true}, EstimatorVariant{Basis::Micro, true, true}};
    std::size_t n_draws  = 20;
    double age_threshold = 10.0;
    std::uint64_t master_seed = 0;
    unsigned threads     = 1;
};

// Draw d of every scenario uses seed keyed_seed(master_seed, d). Rows are
// ordered share, scenario, variant.
std::vector<SavingsCell> run_scenario_suite(const TrajectoryStore& store, const TypeAssignment& assignment, const FleetRegistry& registry, const TripLedger& ledger, const MonthlyScaling& scaling, const ScenarioSuiteOptions& options);

// share,scenario,variant,mean_savings_mt,min,max,n_draws
std::string format_scenario_csv(std::span<const SavingsCell> cells);
// share,scenario,variant,draw,savings_mt
std::string format_scenario_plot_csv(std::span<const SavingsCell> cells);

}
