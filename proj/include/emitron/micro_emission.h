#pragma once

#include "emitron/trajectory_store.h"

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace emitron {

enum class VehicleCategory
{
    PetrolCar,
    DieselCar,
    LpgCar,
    HeavyDuty,
    Bus,
};

std::string_view to_string(VehicleCategory category) noexcept;
VehicleCategory parse_vehicle_category(std::string_view text);

enum class AccelRegime
{
    All,        // acceleration ignored
    AtOrAbove,  // a >= threshold ("accel" in files)
    Below,      // a <  threshold ("decel" in files)
};

std::string_view to_string(AccelRegime regime) noexcept;
AccelRegime parse_accel_regime(std::string_view text);

// Coefficients of E = max(0, c1 + c2 v + c3 v² + c4 a + c5 a² + c6 v a), in
// g/s for v in m/s and a in m/s².
struct CoefficientSet
{
    VehicleCategory category = VehicleCategory::PetrolCar;
    std::string pollutant;
    AccelRegime regime = AccelRegime::All;
    double threshold   = 0.0;
    std::array<double, 6> c{};
};

class CoefficientTable
{
public:
    CoefficientTable() = default;
    // Each (category, pollutant) must carry either one `all` set or an
    // accel/decel pair sharing one threshold.
    explicit CoefficientTable(std::vector<CoefficientSet> sets);

    static CoefficientTable load(const std::filesystem::path& path);
    static CoefficientTable from_csv(std::string text, std::string sourceName = "<memory>");

    const CoefficientSet& select(VehicleCategory category, std::string_view pollutant, double a) const;

    std::span<const CoefficientSet> sets() const noexcept { return _sets; }

private:
    std::vector<CoefficientSet> _sets;
};

double instantaneous_emission(const TrajectoryPoint& point, const CoefficientSet& coefficients) noexcept;
double instantaneous_emission(double v, double a, const CoefficientSet& coefficients) noexcept;

// Σ E(v_k, a_k) · step, in grams, with per-point regime selection.
double trajectory_emission(const Trajectory& trajectory, const CoefficientTable& table, VehicleCategory category, std::string_view pollutant);

}
