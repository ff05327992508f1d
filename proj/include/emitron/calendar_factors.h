#pragma once

#include "emitron/trajectory_store.h"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace emitron {

struct MonthProfile
{
    int month          = 1; // 1..12
    int n_days         = 31;
    double temp_factor = 1.0;
    std::string label;
};

using YearProfile = std::array<MonthProfile, 12>;

// Cold-month CO₂ multiplier (20°F versus 73°F test conditions).
inline constexpr double kColdTemperatureFactor = 1.11;

struct CalendarConfig
{
    bool leap_year = false;
    // Dec-Mar cold, remaining months neutral.
    std::array<double, 12> temp_factors{kColdTemperatureFactor, kColdTemperatureFactor, kColdTemperatureFactor, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, kColdTemperatureFactor};
};

YearProfile month_profile(const CalendarConfig& config = {});

struct StationObservation
{
    std::string station_id;
    int month     = 1;
    double volume = 0.0; // mean daily vehicles
};

std::vector<StationObservation> read_observations(const std::filesystem::path& path);
std::string format_observations_csv(std::span<const StationObservation> observations);

// Base-day flow of each OD pair through each counting station.
class OdStationIncidence
{
public:
    void add(const OdPair& od, const std::string& stationId, double contribution);

    static OdStationIncidence load(const std::filesystem::path& path);
    std::string to_csv() const;

    const std::map<OdPair, std::map<std::string, double>>& entries() const noexcept { return _entries; }
    double base_volume(const std::string& stationId) const;

private:
    std::map<OdPair, std::map<std::string, double>> _entries;
};

// φ per (OD pair, month) with an optional network-wide value per month.
// Lookup order: per-OD entry, global entry, 1.
class DemandFactors
{
public:
    void set(const OdPair& od, int month, double phi);
    void set_global(int month, double phi);

    double phi(const OdPair& od, int month) const;
    std::optional<double> global(int month) const;

    // `od_id,month,phi` with od_id "*" for global rows.
    static DemandFactors load(const std::filesystem::path& path);
    std::string to_csv() const;

private:
    std::map<std::pair<OdPair, int>, double> _perOd;
    std::array<std::optional<double>, 12> _global{};
};

struct IpfOptions
{
    double tolerance   = 1e-3; // max relative station residual
    int max_iterations = 100;
};

struct IpfReport
{
    int month                    = 1;
    bool converged               = false;
    int iterations               = 0;
    double max_relative_residual = 0.0;
    std::vector<OdPair> uncovered; // φ set to the network-wide ratio
};

struct MonthlyFactorFit
{
    std::map<OdPair, double> phi;
    IpfReport report;
};

// Multiplicative fitting of OD factors to one month of station counts. Each
// sweep multiplies φ_i by the geometric mean of observed/modeled over the
// stations OD i crosses. Returns the best iterate if the cap is reached.
MonthlyFactorFit estimate_monthly_factors(const OdStationIncidence& incidence, std::span<const StationObservation> observations, int month, const IpfOptions& options = {});

// Network-wide φ_m that reproduces a monthly VMT column from the base-day
// store VMT: φ_m = VMT_m / (N_m · daily VMT).
DemandFactors factors_from_monthly_vmt(std::span<const double, 12> monthlyVmtMillion, double dailyVmtMiles, const YearProfile& profile);

// `month,vmt_million_miles`, twelve rows.
std::array<double, 12> read_monthly_vmt(const std::filesystem::path& path);

struct StationFixture
{
    OdStationIncidence incidence;
    std::vector<StationObservation> observations;
    std::map<std::pair<OdPair, int>, double> planted_phi;
};

// Synthetic counting-station data generated forward from planted factors.
// Every OD owns one dominant station, so the system is identifiable.
StationFixture synthesize_station_fixture(std::span<const OdPair> ods, std::size_t sharedStations, std::span<const double, 12> monthlyLevel, std::uint64_t seed);

}
