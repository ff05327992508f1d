#pragma once

#include "emitron/fleet_registry.h"
#include "emitron/micro_emission.h"
#include "emitron/trajectory_store.h"

#include <fmt/format.h>

#include <filesystem>
#include <string>
#include <vector>

namespace emitron::test {

inline const std::filesystem::path kSourceDir  = EMITRON_SOURCE_DIR;
inline const std::filesystem::path kScratchDir = EMITRON_SCRATCH_DIR;

// Fresh, empty directory below the build tree.
inline std::filesystem::path scratch_dir(std::string_view name)
{
    const auto dir = kScratchDir / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline Trajectory make_trajectory(TripId id, OdPair od, const std::vector<double>& speeds, double step = 1.0)
{
    Trajectory traj;
    traj.trip_id = std::move(id);
    traj.od      = std::move(od);
    traj.step    = step;
    for (std::size_t k = 0; k < speeds.size(); ++k) {
        traj.points.push_back(TrajectoryPoint{static_cast<double>(k) * step, speeds[k], std::nullopt});
    }
    return derive_acceleration(std::move(traj));
}

// n trips per OD at constant speed; trip k of an OD lasts `seconds` s.
inline TrajectoryStore constant_speed_store(const std::vector<OdPair>& ods, std::size_t tripsPerOd, double speed, std::size_t seconds)
{
    std::vector<Trajectory> trips;
    for (std::size_t o = 0; o < ods.size(); ++o) {
        for (std::size_t k = 0; k < tripsPerOd; ++k) {
            trips.push_back(make_trajectory(fmt::format("T{:02}{:05}", o, k), ods[o], std::vector<double>(seconds, speed)));
        }
    }
    return TrajectoryStore(std::move(trips));
}

inline CoefficientTable single_table(std::array<double, 6> c, VehicleCategory category = VehicleCategory::PetrolCar, std::string pollutant = "CO2")
{
    return CoefficientTable({CoefficientSet{category, std::move(pollutant), AccelRegime::All, 0.0, c}});
}

inline const CoefficientTable& panis_petrol_co2()
{
    static const auto table = single_table({0.553, 0.161, -0.00289, 0.266, 0.511, 0.183});
    return table;
}

struct TypeSpec
{
    int model_year;
    double weight;
    double rate;
};

inline FleetRegistry make_registry(const std::vector<TypeSpec>& specs, double baselineRate = 200.0, int analysisYear = 2020)
{
    std::vector<VehicleType> types;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        types.push_back(VehicleType{"Make", fmt::format("Model{}", i), specs[i].model_year, specs[i].weight, specs[i].rate});
    }
    return FleetRegistry(std::move(types), analysisYear, baselineRate);
}

}
