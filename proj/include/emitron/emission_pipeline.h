#pragma once

#include "emitron/calendar_factors.h"
#include "emitron/fleet_registry.h"
#include "emitron/micro_emission.h"
#include "emitron/trajectory_store.h"

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emitron {

// EPA fleet-average CO₂ rate used by the VMT benchmark.
inline constexpr double kEpaAverageRate = 368.0; // g/mile

enum class Basis
{
    MacroEpa,
    Micro,
};

struct EstimatorVariant
{
    Basis basis        = Basis::MacroEpa;
    bool temp_adjusted = false;
    bool type_adjusted = false;

    auto operator<=>(const EstimatorVariant&) const = default;

    // epa_base, epa_temp, epa_type, epa_type_temp, micro_base, ...
    std::string name() const;
    static EstimatorVariant parse(std::string_view name);

    // Position in the report layout (0..7).
    std::size_t column() const noexcept;
    static const std::array<EstimatorVariant, 8>& all() noexcept;
};

struct EmissionModel
{
    double gamma             = kEpaAverageRate; // g/mile
    VehicleCategory category = VehicleCategory::PetrolCar;
    std::string pollutant    = "CO2";
};

// Daily macro emission e^i = γ Σ D_n^i, grams, indexed like store.od_pairs().
struct OdDaily
{
    std::vector<double> per_od;
    double total = 0.0;
};

OdDaily macro_daily(const TrajectoryStore& store, double gamma);

// E_m^i = e^i · N_m · T_m · φ_m^i. With type adjustment γ is swapped for the
// fleet-weighted mean rate.
double macro_monthly(double dailyGrams, const MonthProfile& month, double phi, const EstimatorVariant& variant, double gamma, double fleetMeanRate);

// Per-trip quantities shared by every estimator variant.
struct TripEvaluation
{
    double distance    = 0.0; // miles
    double micro_grams = 0.0; // unadjusted model output, g/day
    std::size_t type   = 0;   // registry index
    double epa_rate    = 0.0; // g/mile of the assigned type
    double mu          = 1.0; // epa_rate / E_b
};

class TripLedger
{
public:
    TripLedger(const TrajectoryStore& store, std::vector<TripEvaluation> trips, double gamma, double fleetMeanRate, double baselineRate);

    std::span<const TripEvaluation> trips() const noexcept { return _trips; }
    const std::vector<OdPair>& od_pairs() const noexcept { return _odPairs; }
    std::size_t od_of_trip(std::size_t trip) const { return _odOfTrip[trip]; }
    std::span<const std::size_t> group(std::size_t od) const { return _groups[od]; }
    const TripId& trip_id(std::size_t trip) const { return _tripIds[trip]; }
    std::optional<std::size_t> index_of(const TripId& tripId) const;

    double gamma() const noexcept { return _gamma; }
    double fleet_mean_rate() const noexcept { return _fleetMeanRate; }
    double baseline_rate() const noexcept { return _baselineRate; }

    // Daily OD totals for a variant, before monthly scaling.
    OdDaily od_daily(const EstimatorVariant& variant) const;

    // Daily grams attributed to one trip. Summed over an OD group this equals
    // od_daily() for that group. The macro type-adjusted column spreads the
    // fleet-mean total over trips in proportion to their assigned EPA rates.
    double trip_daily(std::size_t trip, const EstimatorVariant& variant) const;

private:
    std::vector<TripEvaluation> _trips;
    std::vector<TripId> _tripIds;
    std::vector<OdPair> _odPairs;
    std::vector<std::size_t> _odOfTrip;
    std::vector<std::vector<std::size_t>> _groups;
    std::vector<double> _typeAttribution; // per OD
    std::unordered_map<TripId, std::size_t> _index;
    double _gamma;
    double _fleetMeanRate;
    double _baselineRate;
};

// Evaluates every trip once (in parallel, slot per trip).
TripLedger evaluate_trips(const TrajectoryStore& store, const TypeAssignment& assignment, const FleetRegistry& registry, const CoefficientTable& table, const EmissionModel& model, unsigned threads = 1);

// Daily micro emission per OD, optionally scaled by μ of each trip's type.
OdDaily micro_daily(const TrajectoryStore& store, const TypeAssignment& assignment, const FleetRegistry& registry, const CoefficientTable& table, const EmissionModel& model, bool typeAdjusted, unsigned threads = 1);

// N_m · T_m · φ_m^i lookup per OD.
class MonthlyScaling
{
public:
    MonthlyScaling(const YearProfile& months, const DemandFactors& factors, std::span<const OdPair> ods);

    double factor(std::size_t od, std::size_t monthIndex, bool temperature) const;
    double annual(std::size_t od, bool temperature) const;
    double vmt_factor(std::size_t od, std::size_t monthIndex) const { return factor(od, monthIndex, false); }

private:
    YearProfile _months;
    std::vector<std::array<double, 12>> _phi;
};

struct EmissionReport
{
    YearProfile months{};
    std::array<std::array<double, 8>, 12> monthly_mt{}; // [month][variant column]
    std::array<double, 8> annual_mt{};
    std::array<double, 12> vmt_million{};
    double annual_vmt_million = 0.0;

    double gamma           = kEpaAverageRate;
    double fleet_mean_rate = 0.0;
    double baseline_rate   = 0.0;
    std::size_t n_trips    = 0;
    std::uint64_t seed     = 0;
    std::string config_digest;

    double monthly(const EstimatorVariant& variant, std::size_t monthIndex) const { return monthly_mt[monthIndex][variant.column()]; }
    double annual(const EstimatorVariant& variant) const { return annual_mt[variant.column()]; }
};

// All eight variants for twelve months plus the annual row, in Mt CO₂.
EmissionReport estimate_matrix(const TripLedger& ledger, const YearProfile& months, const DemandFactors& factors);

// Table layout: month,vmt_million_miles,<variant columns>; final row "Annual".
std::string format_report_csv(const EmissionReport& report);
std::string format_report_json(const EmissionReport& report);
// Tidy long format: month,series,value
std::string format_monthly_plot_csv(const EmissionReport& report);

}
