#include "emitron/fleet_registry.h"
#include "emitron/csv.h"
#include "emitron/error.h"
#include "emitron/seeding.h"

#include <algorithm>
#include <cmath>

namespace emitron {

namespace {

VehicleKey read_key(const CsvReader& csv, std::size_t makeCol, std::size_t modelCol, std::size_t yearCol)
{
    VehicleKey key;
    key.make       = std::string(csv.field(makeCol));
    key.model      = std::string(csv.field(modelCol));
    key.model_year = static_cast<int>(csv.to_int(yearCol));
    if (key.make.empty() || key.model.empty()) {
        throw ValidationError("{}:{}: empty make or model", csv.source_name(), csv.line_number());
    }
    return key;
}

}

std::vector<EpaRow> read_epa_csv(const std::filesystem::path& path)
{
    CsvReader csv(path);
    const auto makeCol    = csv.required_column("make");
    const auto modelCol   = csv.required_column("model");
    const auto yearCol    = csv.required_column("model_year");
    const auto variantCol = csv.required_column("variant");
    const auto rateCol    = csv.required_column("co2_g_per_mile");

    std::vector<EpaRow> rows;
    while (csv.next()) {
        EpaRow row;
        row.key     = read_key(csv, makeCol, modelCol, yearCol);
        row.variant = std::string(csv.field(variantCol));
        row.rate    = csv.to_double(rateCol);
        if (!(row.rate > 0.0)) {
            throw ValidationError("{}:{}: CO2 rate must be positive", csv.source_name(), csv.line_number());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<FleetRow> read_fleet_csv(const std::filesystem::path& path)
{
    CsvReader csv(path);
    const auto makeCol   = csv.required_column("make");
    const auto modelCol  = csv.required_column("model");
    const auto yearCol   = csv.required_column("model_year");
    const auto weightCol = csv.required_column("weight");

    std::vector<FleetRow> rows;
    while (csv.next()) {
        FleetRow row;
        row.key    = read_key(csv, makeCol, modelCol, yearCol);
        row.weight = csv.to_double(weightCol);
        if (!(row.weight > 0.0)) {
            throw ValidationError("{}:{}: fleet weight must be positive", csv.source_name(), csv.line_number());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

EpaRates aggregate_epa_rates(std::span<const EpaRow> rows)
{
    std::map<VehicleKey, std::pair<double, std::size_t>> sums;
    for (const auto& row : rows) {
        auto& [sum, count] = sums[row.key];
        sum += row.rate;
        ++count;
    }

    EpaRates rates;
    for (const auto& [key, acc] : sums) {
        rates.emplace(key, acc.first / static_cast<double>(acc.second));
    }
    return rates;
}

double baseline_rate(const EpaRates& rates, std::span<const VehicleKey> calibrationVehicles)
{
    if (calibrationVehicles.empty()) {
        throw ConfigurationError("No calibration vehicles configured for the baseline rate");
    }

    double sum = 0.0;
    for (const auto& key : calibrationVehicles) {
        auto iter = rates.find(key);
        if (iter == rates.end()) {
            throw ConfigurationError("Calibration vehicle {} {} {} has no EPA rate", key.make, key.model, key.model_year);
        }
        sum += iter->second;
    }
    return sum / static_cast<double>(calibrationVehicles.size());
}

double vehicle_type_factor(const VehicleType& type, double baselineRate)
{
    return type.epa_rate / baselineRate;
}

FleetRegistry::FleetRegistry(std::vector<VehicleType> types, int analysisYear, double baselineRate)
: _types(std::move(types))
, _analysisYear(analysisYear)
, _baselineRate(baselineRate)
{
    if (_types.empty()) {
        throw ValidationError("Fleet registry is empty");
    }
    if (!(baselineRate > 0.0)) {
        throw ValidationError("Baseline rate must be positive, got {}", baselineRate);
    }

    double total = 0.0;
    _cumulative.reserve(_types.size());
    for (const auto& type : _types) {
        if (!(type.weight > 0.0) || !(type.epa_rate > 0.0)) {
            throw ValidationError("Vehicle type {} {} {} needs positive weight and rate", type.make, type.model, type.model_year);
        }
        total += type.weight;
        _cumulative.push_back(total);
    }
}

std::size_t FleetRegistry::sample(double u) const
{
    const double target = u * total_weight();
    auto index          = static_cast<std::size_t>(std::upper_bound(_cumulative.begin(), _cumulative.end(), target) - _cumulative.begin());
    return std::min(index, _types.size() - 1);
}

FleetLoadResult load_fleet(std::span<const FleetRow> fleet, const EpaRates& rates, const FleetOptions& options)
{
    FleetLoadReport report;
    report.fleet_rows = fleet.size();

    std::map<VehicleKey, double> weights;
    for (const auto& row : fleet) {
        if (row.key.model_year < options.first_model_year || row.key.model_year > options.last_model_year) {
            ++report.out_of_range;
            continue;
        }
        auto [iter, inserted] = weights.try_emplace(row.key, 0.0);
        if (!inserted) {
            ++report.merged_duplicates;
        }
        iter->second += row.weight;
    }

    std::vector<VehicleType> types;
    for (const auto& [key, weight] : weights) {
        auto rate = rates.find(key);
        if (rate == rates.end()) {
            ++report.dropped_unmatched;
            continue;
        }
        types.push_back(VehicleType{key.make, key.model, key.model_year, weight, rate->second});
    }
    if (types.empty()) {
        throw ValidationError("No fleet vehicle types matched an EPA rate");
    }

    const double eb = baseline_rate(rates, options.calibration_vehicles);
    return FleetLoadResult{FleetRegistry(std::move(types), options.analysis_year, eb), report};
}

FleetStats fleet_weighted_stats(const FleetRegistry& registry)
{
    const double total = registry.total_weight();

    FleetStats stats;
    for (std::size_t i = 0; i < registry.size(); ++i) {
        const double w = registry.type(i).weight / total;
        stats.mean_rate += w * registry.type(i).epa_rate;
        stats.mean_age += w * registry.age(i);
    }

    double varRate = 0.0;
    double varAge  = 0.0;
    for (std::size_t i = 0; i < registry.size(); ++i) {
        const double w     = registry.type(i).weight / total;
        const double dRate = registry.type(i).epa_rate - stats.mean_rate;
        const double dAge  = registry.age(i) - stats.mean_age;
        varRate += w * dRate * dRate;
        varAge += w * dAge * dAge;
    }
    stats.std_rate = std::sqrt(varRate);
    stats.std_age  = std::sqrt(varAge);
    return stats;
}

std::size_t TypeAssignment::at(const TripId& tripId) const
{
    auto iter = type_of_trip.find(tripId);
    if (iter == type_of_trip.end()) {
        throw ValidationError("Trip '{}' has no vehicle type assignment", tripId);
    }
    return iter->second;
}

TypeAssignment assign_vehicle_types(const TrajectoryStore& store, const FleetRegistry& registry, std::uint64_t seed)
{
    TypeAssignment assignment;
    assignment.seed = seed;
    assignment.type_of_trip.reserve(store.size());
    for (const auto& traj : store.trajectories()) {
        const auto bits = mix64(keyed_seed(seed, traj.trip_id));
        assignment.type_of_trip.emplace(traj.trip_id, registry.sample(unit_interval(bits)));
    }
    return assignment;
}

}
