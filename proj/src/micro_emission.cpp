#include "emitron/micro_emission.h"
#include "emitron/csv.h"
#include "emitron/error.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace emitron {

std::string_view to_string(VehicleCategory category) noexcept
{
    switch (category) {
    case VehicleCategory::PetrolCar: return "petrol_car";
    case VehicleCategory::DieselCar: return "diesel_car";
    case VehicleCategory::LpgCar: return "lpg_car";
    case VehicleCategory::HeavyDuty: return "heavy_duty";
    case VehicleCategory::Bus: return "bus";
    }
    return "unknown";
}

VehicleCategory parse_vehicle_category(std::string_view text)
{
    for (auto category : {VehicleCategory::PetrolCar, VehicleCategory::DieselCar, VehicleCategory::LpgCar, VehicleCategory::HeavyDuty, VehicleCategory::Bus}) {
        if (to_string(category) == text) {
            return category;
        }
    }
    throw ValidationError("Unknown vehicle category '{}'", text);
}

std::string_view to_string(AccelRegime regime) noexcept
{
    switch (regime) {
    case AccelRegime::All: return "all";
    case AccelRegime::AtOrAbove: return "accel";
    case AccelRegime::Below: return "decel";
    }
    return "unknown";
}

AccelRegime parse_accel_regime(std::string_view text)
{
    for (auto regime : {AccelRegime::All, AccelRegime::AtOrAbove, AccelRegime::Below}) {
        if (to_string(regime) == text) {
            return regime;
        }
    }
    throw ValidationError("Unknown acceleration regime '{}', expected all, accel or decel", text);
}

CoefficientTable::CoefficientTable(std::vector<CoefficientSet> sets)
: _sets(std::move(sets))
{
    using Key = std::tuple<VehicleCategory, std::string>;
    std::map<Key, std::vector<const CoefficientSet*>> byKey;
    for (const auto& set : _sets) {
        byKey[Key(set.category, set.pollutant)].push_back(&set);
    }

    for (const auto& [key, group] : byKey) {
        const auto& [category, pollutant] = key;
        const auto count = [&group](AccelRegime regime) {
            return std::count_if(group.begin(), group.end(), [regime](const CoefficientSet* s) { return s->regime == regime; });
        };
        const auto all   = count(AccelRegime::All);
        const auto above = count(AccelRegime::AtOrAbove);
        const auto below = count(AccelRegime::Below);

        const bool single = all == 1 && above == 0 && below == 0;
        const bool split  = all == 0 && above == 1 && below == 1;
        if (!single && !split) {
            throw ConfigurationError("Coefficient table entries for ({}, {}) must be one 'all' set or one accel/decel pair", to_string(category), pollutant);
        }
        if (split && group[0]->threshold != group[1]->threshold) {
            throw ConfigurationError("Coefficient table accel/decel thresholds differ for ({}, {})", to_string(category), pollutant);
        }
    }
}

CoefficientTable CoefficientTable::load(const std::filesystem::path& path)
{
    return from_csv(read_file(path), path.string());
}

CoefficientTable CoefficientTable::from_csv(std::string text, std::string sourceName)
{
    auto csv = CsvReader::from_string(std::move(text), std::move(sourceName));

    const auto categoryCol  = csv.required_column("category");
    const auto pollutantCol = csv.required_column("pollutant");
    const auto regimeCol    = csv.required_column("regime");
    const auto thresholdCol = csv.required_column("threshold");
    std::array<std::size_t, 6> coefficientCols{};
    for (std::size_t i = 0; i < coefficientCols.size(); ++i) {
        coefficientCols[i] = csv.required_column(fmt::format("c{}", i + 1));
    }

    std::vector<CoefficientSet> sets;
    while (csv.next()) {
        CoefficientSet set;
        set.category  = parse_vehicle_category(csv.field(categoryCol));
        set.pollutant = std::string(csv.field(pollutantCol));
        set.regime    = parse_accel_regime(csv.field(regimeCol));
        set.threshold = csv.has_field(thresholdCol) ? csv.to_double(thresholdCol) : 0.0;
        for (std::size_t i = 0; i < coefficientCols.size(); ++i) {
            set.c[i] = csv.to_double(coefficientCols[i]);
        }
        sets.push_back(std::move(set));
    }
    return CoefficientTable(std::move(sets));
}

const CoefficientSet& CoefficientTable::select(VehicleCategory category, std::string_view pollutant, double a) const
{
    for (const auto& set : _sets) {
        if (set.category != category || set.pollutant != pollutant) {
            continue;
        }
        switch (set.regime) {
        case AccelRegime::All: return set;
        case AccelRegime::AtOrAbove:
            if (a >= set.threshold) {
                return set;
            }
            break;
        case AccelRegime::Below:
            if (a < set.threshold) {
                return set;
            }
            break;
        }
    }
    throw ConfigurationError("No coefficients for ({}, {}) at a = {}", to_string(category), pollutant, a);
}

double instantaneous_emission(double v, double a, const CoefficientSet& coefficients) noexcept
{
    const auto& c = coefficients.c;
    return std::max(0.0, c[0] + c[1] * v + c[2] * v * v + c[3] * a + c[4] * a * a + c[5] * v * a);
}

double instantaneous_emission(const TrajectoryPoint& point, const CoefficientSet& coefficients) noexcept
{
    return instantaneous_emission(point.v, point.a.value_or(0.0), coefficients);
}

double trajectory_emission(const Trajectory& trajectory, const CoefficientTable& table, VehicleCategory category, std::string_view pollutant)
{
    // Resolve once; re-select per point only for split-regime pollutants.
    const auto& first = table.select(category, pollutant, 0.0);
    const bool split  = first.regime != AccelRegime::All;

    double grams = 0.0;
    for (const auto& point : trajectory.points) {
        const double a   = point.a.value_or(0.0);
        const auto& set  = split ? table.select(category, pollutant, a) : first;
        grams += instantaneous_emission(point.v, a, set);
    }
    return grams * trajectory.step;
}

}
