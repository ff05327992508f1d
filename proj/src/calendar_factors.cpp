#include "emitron/calendar_factors.h"
#include "emitron/csv.h"
#include "emitron/error.h"
#include "emitron/seeding.h"

#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace emitron {

namespace {

constexpr std::array<std::string_view, 12> kMonthLabels{"Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
constexpr std::array<int, 12> kMonthDays{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

void check_month(int month)
{
    if (month < 1 || month > 12) {
        throw ValidationError("Month {} outside 1..12", month);
    }
}

}

YearProfile month_profile(const CalendarConfig& config)
{
    YearProfile profile;
    for (int m = 0; m < 12; ++m) {
        const double factor = config.temp_factors[m];
        if (!(factor > 0.0) || !std::isfinite(factor)) {
            throw ValidationError("Temperature factor for {} must be positive, got {}", kMonthLabels[m], factor);
        }
        profile[m].month       = m + 1;
        profile[m].n_days      = kMonthDays[m] + (m == 1 && config.leap_year ? 1 : 0);
        profile[m].temp_factor = factor;
        profile[m].label       = std::string(kMonthLabels[m]);
    }
    return profile;
}

std::vector<StationObservation> read_observations(const std::filesystem::path& path)
{
    CsvReader csv(path);
    const auto stationCol = csv.required_column("station_id");
    const auto monthCol   = csv.required_column("month");
    const auto volumeCol  = csv.required_column("mean_daily_volume");

    std::vector<StationObservation> result;
    while (csv.next()) {
        StationObservation obs{std::string(csv.field(stationCol)), static_cast<int>(csv.to_int(monthCol)), csv.to_double(volumeCol)};
        check_month(obs.month);
        if (!(obs.volume >= 0.0)) {
            throw ValidationError("{}:{}: negative station volume", csv.source_name(), csv.line_number());
        }
        result.push_back(std::move(obs));
    }
    return result;
}

std::string format_observations_csv(std::span<const StationObservation> observations)
{
    std::string out = "station_id,month,mean_daily_volume\n";
    for (const auto& obs : observations) {
        out += fmt::format("{},{},{}\n", obs.station_id, obs.month, obs.volume);
    }
    return out;
}

void OdStationIncidence::add(const OdPair& od, const std::string& stationId, double contribution)
{
    if (!(contribution >= 0.0) || !std::isfinite(contribution)) {
        throw ValidationError("Incidence contribution of '{}' at station '{}' must be non-negative", od.label(), stationId);
    }
    _entries[od][stationId] += contribution;
}

OdStationIncidence OdStationIncidence::load(const std::filesystem::path& path)
{
    CsvReader csv(path);
    const auto odCol      = csv.required_column("od_id");
    const auto stationCol = csv.required_column("station_id");
    const auto valueCol   = csv.required_column("contribution");

    OdStationIncidence incidence;
    while (csv.next()) {
        incidence.add(OdPair::parse(csv.field(odCol)), std::string(csv.field(stationCol)), csv.to_double(valueCol));
    }
    return incidence;
}

std::string OdStationIncidence::to_csv() const
{
    std::string out = "od_id,station_id,contribution\n";
    for (const auto& [od, stations] : _entries) {
        for (const auto& [station, value] : stations) {
            out += fmt::format("{},{},{}\n", od.label(), station, value);
        }
    }
    return out;
}

double OdStationIncidence::base_volume(const std::string& stationId) const
{
    double sum = 0.0;
    for (const auto& [od, stations] : _entries) {
        if (auto iter = stations.find(stationId); iter != stations.end()) {
            sum += iter->second;
        }
    }
    return sum;
}

void DemandFactors::set(const OdPair& od, int month, double phi)
{
    check_month(month);
    if (!(phi > 0.0) || !std::isfinite(phi)) {
        throw ValidationError("Demand factor for '{}' month {} must be positive and finite, got {}", od.label(), month, phi);
    }
    _perOd[{od, month}] = phi;
}

void DemandFactors::set_global(int month, double phi)
{
    check_month(month);
    if (!(phi > 0.0) || !std::isfinite(phi)) {
        throw ValidationError("Global demand factor for month {} must be positive and finite, got {}", month, phi);
    }
    _global[month - 1] = phi;
}

double DemandFactors::phi(const OdPair& od, int month) const
{
    if (auto iter = _perOd.find({od, month}); iter != _perOd.end()) {
        return iter->second;
    }
    return _global[month - 1].value_or(1.0);
}

std::optional<double> DemandFactors::global(int month) const
{
    check_month(month);
    return _global[month - 1];
}

DemandFactors DemandFactors::load(const std::filesystem::path& path)
{
    CsvReader csv(path);
    const auto odCol    = csv.required_column("od_id");
    const auto monthCol = csv.required_column("month");
    const auto phiCol   = csv.required_column("phi");

    DemandFactors factors;
    while (csv.next()) {
        const auto od    = csv.field(odCol);
        const auto month = static_cast<int>(csv.to_int(monthCol));
        const auto phi   = csv.to_double(phiCol);
        if (od == "*") {
            factors.set_global(month, phi);
        } else {
            factors.set(OdPair::parse(od), month, phi);
        }
    }
    return factors;
}

std::string DemandFactors::to_csv() const
{
    std::string out = "od_id,month,phi\n";
    for (int m = 1; m <= 12; ++m) {
        if (_global[m - 1]) {
            out += fmt::format("*,{},{}\n", m, *_global[m - 1]);
        }
    }
    for (const auto& [key, phi] : _perOd) {
        out += fmt::format("{},{},{}\n", key.first.label(), key.second, phi);
    }
    return out;
}

MonthlyFactorFit estimate_monthly_factors(const OdStationIncidence& incidence, std::span<const StationObservation> observations, int month, const IpfOptions& options)
{
    check_month(month);

    std::map<std::string, double> observed;
    for (const auto& obs : observations) {
        if (obs.month == month && obs.volume > 0.0) {
            observed[obs.station_id] = obs.volume;
        }
    }

    std::set<std::string> usedStations;
    for (const auto& [station, volume] : observed) {
        if (incidence.base_volume(station) > 0.0) {
            usedStations.insert(station);
        }
    }

    // Covered ODs and their (station, contribution) lists restricted to used stations.
    struct OdTerms
    {
        OdPair od;
        std::vector<std::pair<std::string, double>> stations;
    };
    std::vector<OdTerms> covered;
    MonthlyFactorFit fit;
    fit.report.month = month;

    double observedTotal = 0.0;
    double baseTotal     = 0.0;
    for (const auto& station : usedStations) {
        observedTotal += observed.at(station);
        baseTotal += incidence.base_volume(station);
    }
    const double networkRatio = baseTotal > 0.0 ? observedTotal / baseTotal : 1.0;

    for (const auto& [od, stations] : incidence.entries()) {
        OdTerms terms{od, {}};
        for (const auto& [station, contribution] : stations) {
            if (contribution > 0.0 && usedStations.contains(station)) {
                terms.stations.emplace_back(station, contribution);
            }
        }
        if (terms.stations.empty()) {
            fit.report.uncovered.push_back(od);
            fit.phi[od] = networkRatio;
        } else {
            covered.push_back(std::move(terms));
        }
    }

    std::vector<double> phi(covered.size(), 1.0);
    std::vector<double> bestPhi = phi;
    double bestResidual         = std::numeric_limits<double>::infinity();
    std::map<std::string, double> modeled;

    for (int iteration = 0;; ++iteration) {
        modeled.clear();
        for (std::size_t i = 0; i < covered.size(); ++i) {
            for (const auto& [station, contribution] : covered[i].stations) {
                modeled[station] += phi[i] * contribution;
            }
        }

        // Used stations only carry flow from covered ODs, so every used
        // station has a positive modeled volume.
        double residual = 0.0;
        for (const auto& station : usedStations) {
            const double obs = observed.at(station);
            residual         = std::max(residual, std::abs(obs - modeled[station]) / obs);
        }
        if (residual < bestResidual) {
            bestResidual = residual;
            bestPhi      = phi;
        }

        fit.report.iterations = iteration;
        if (residual < options.tolerance) {
            fit.report.converged = true;
            break;
        }
        if (iteration >= options.max_iterations) {
            break;
        }

        for (std::size_t i = 0; i < covered.size(); ++i) {
            double logSum = 0.0;
            for (const auto& [station, contribution] : covered[i].stations) {
                logSum += std::log(observed.at(station) / modeled[station]);
            }
            phi[i] *= std::exp(logSum / static_cast<double>(covered[i].stations.size()));
        }
    }

    fit.report.max_relative_residual = bestResidual;
    for (std::size_t i = 0; i < covered.size(); ++i) {
        fit.phi[covered[i].od] = bestPhi[i];
    }
    return fit;
}

DemandFactors factors_from_monthly_vmt(std::span<const double, 12> monthlyVmtMillion, double dailyVmtMiles, const YearProfile& profile)
{
    if (!(dailyVmtMiles > 0.0)) {
        throw ValidationError("Base-day VMT must be positive to derive demand factors");
    }

    DemandFactors factors;
    for (int m = 0; m < 12; ++m) {
        factors.set_global(m + 1, monthlyVmtMillion[m] * 1e6 / (profile[m].n_days * dailyVmtMiles));
    }
    return factors;
}

std::array<double, 12> read_monthly_vmt(const std::filesystem::path& path)
{
    CsvReader csv(path);
    const auto monthCol = csv.required_column("month");
    const auto vmtCol   = csv.required_column("vmt_million_miles");

    std::array<double, 12> vmt{};
    std::array<bool, 12> seen{};
    while (csv.next()) {
        const auto month = static_cast<int>(csv.to_int(monthCol));
        check_month(month);
        if (seen[month - 1]) {
            throw ValidationError("{}:{}: month {} listed twice", csv.source_name(), csv.line_number(), month);
        }
        seen[month - 1] = true;
        vmt[month - 1]  = csv.to_double(vmtCol);
    }
    for (int m = 0; m < 12; ++m) {
        if (!seen[m]) {
            throw ValidationError("'{}' lacks month {}", csv.source_name(), m + 1);
        }
    }
    return vmt;
}

StationFixture synthesize_station_fixture(std::span<const OdPair> ods, std::size_t sharedStations, std::span<const double, 12> monthlyLevel, std::uint64_t seed)
{
    StationFixture fixture;
    std::mt19937_64 rng(seed);
    auto uniform = [&rng](double lo, double hi) { return lo + (hi - lo) * unit_interval(rng()); };

    std::vector<std::string> stationIds;
    for (std::size_t i = 0; i < ods.size(); ++i) {
        const auto station = fmt::format("S{:03}", i + 1);
        stationIds.push_back(station);
        fixture.incidence.add(ods[i], station, uniform(800.0, 1500.0));
    }
    for (std::size_t s = 0; s < sharedStations; ++s) {
        const auto station = fmt::format("S{:03}", ods.size() + s + 1);
        stationIds.push_back(station);
        for (const auto& od : ods) {
            if (unit_interval(rng()) < 0.4) {
                fixture.incidence.add(od, station, uniform(50.0, 400.0));
            }
        }
    }

    for (int m = 1; m <= 12; ++m) {
        for (const auto& od : ods) {
            fixture.planted_phi[{od, m}] = monthlyLevel[m - 1] * uniform(0.85, 1.15);
        }
        for (const auto& station : stationIds) {
            double volume = 0.0;
            for (const auto& [od, stations] : fixture.incidence.entries()) {
                if (auto iter = stations.find(station); iter != stations.end()) {
                    volume += fixture.planted_phi.at({od, m}) * iter->second;
                }
            }
            if (volume > 0.0) {
                fixture.observations.push_back(StationObservation{station, m, volume});
            }
        }
    }
    return fixture;
}

}
