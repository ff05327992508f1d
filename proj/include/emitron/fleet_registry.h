#pragma once

#include "emitron/trajectory_store.h"

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace emitron {

struct VehicleKey
{
    std::string make;
    std::string model;
    int model_year = 0;

    auto operator<=>(const VehicleKey&) const = default;
};

struct VehicleType
{
    std::string make;
    std::string model;
    int model_year  = 0;
    double weight   = 0.0; // vehicles
    double epa_rate = 0.0; // g CO₂ / mile

    VehicleKey key() const { return VehicleKey{make, model, model_year}; }
};

struct EpaRow
{
    VehicleKey key;
    std::string variant;
    double rate = 0.0; // g/mile
};

struct FleetRow
{
    VehicleKey key;
    double weight = 0.0;
};

using EpaRates = std::map<VehicleKey, double>;

std::vector<EpaRow> read_epa_csv(const std::filesystem::path& path);
std::vector<FleetRow> read_fleet_csv(const std::filesystem::path& path);

// Unweighted mean over test/engine variants per (make, model, model_year).
EpaRates aggregate_epa_rates(std::span<const EpaRow> rows);

// Unweighted mean of the calibration vehicles' aggregated rates (E_b).
double baseline_rate(const EpaRates& rates, std::span<const VehicleKey> calibrationVehicles);

// μ_t = E_t / E_b
double vehicle_type_factor(const VehicleType& type, double baselineRate);

struct FleetOptions
{
    int analysis_year   = 2020;
    int first_model_year = 2000;
    int last_model_year  = 2017;
    std::vector<VehicleKey> calibration_vehicles;
};

class FleetRegistry
{
public:
    FleetRegistry(std::vector<VehicleType> types, int analysisYear, double baselineRate);

    std::span<const VehicleType> types() const noexcept { return _types; }
    const VehicleType& type(std::size_t index) const { return _types[index]; }
    std::size_t size() const noexcept { return _types.size(); }

    int analysis_year() const noexcept { return _analysisYear; }
    double baseline_rate() const noexcept { return _baselineRate; }
    double total_weight() const noexcept { return _cumulative.back(); }

    int age(std::size_t index) const { return _analysisYear - _types[index].model_year; }
    double factor(std::size_t index) const { return vehicle_type_factor(_types[index], _baselineRate); }

    // Maps u in [0, 1) onto a type index proportional to weights.
    std::size_t sample(double u) const;

private:
    std::vector<VehicleType> _types;
    std::vector<double> _cumulative;
    int _analysisYear;
    double _baselineRate;
};

struct FleetLoadReport
{
    std::size_t fleet_rows        = 0;
    std::size_t merged_duplicates = 0;
    std::size_t out_of_range      = 0;
    std::size_t dropped_unmatched = 0;
};

struct FleetLoadResult
{
    FleetRegistry registry;
    FleetLoadReport report;
};

// Inner join of fleet weights with aggregated EPA rates. Duplicate fleet
// keys have their weights summed; unmatched rows are dropped and counted.
FleetLoadResult load_fleet(std::span<const FleetRow> fleet, const EpaRates& rates, const FleetOptions& options);

struct FleetStats
{
    double mean_rate = 0.0;
    double std_rate  = 0.0;
    double mean_age  = 0.0;
    double std_age   = 0.0;
};

// Weight-weighted means and population standard deviations.
FleetStats fleet_weighted_stats(const FleetRegistry& registry);

struct TypeAssignment
{
    std::uint64_t seed = 0;
    std::unordered_map<TripId, std::size_t> type_of_trip;

    std::size_t at(const TripId& tripId) const;
};

// Each trip draws its type from a stream keyed by (seed, trip_id).
TypeAssignment assign_vehicle_types(const TrajectoryStore& store, const FleetRegistry& registry, std::uint64_t seed);

}
