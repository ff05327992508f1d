#include "emitron/energy_econ.h"
#include "emitron/csv.h"
#include "emitron/error.h"

#include <cmath>

namespace emitron {

void EconConfig::validate() const
{
    if (!(battery_perf > 0.0) || !(co2_cost > 0.0) || !(infra_lifetime > 0.0)) {
        throw ValidationError("Battery performance, CO2 cost and infrastructure lifetime must be positive");
    }
    if (!(inflation >= 0.0)) {
        throw ValidationError("Inflation rate must be non-negative, got {}", inflation);
    }
}

std::string_view to_string(Tech tech) noexcept
{
    switch (tech) {
    case Tech::LowTech: return "Low-Tech";
    case Tech::MixedTech: return "Mixed-Tech";
    case Tech::HighTech: return "High-Tech";
    }
    return "unknown";
}

Tech parse_tech(std::string_view text)
{
    for (auto tech : {Tech::LowTech, Tech::MixedTech, Tech::HighTech}) {
        if (to_string(tech) == text) {
            return tech;
        }
    }
    throw ValidationError("Unknown technology scenario '{}'", text);
}

std::vector<TechScenario> load_tech_scenarios(const std::filesystem::path& path)
{
    CsvReader csv(path);
    const auto shareCol    = csv.required_column("share_pct");
    const auto techCol     = csv.required_column("tech");
    const auto stationsCol = csv.required_column("n_stations");
    const auto chargersCol = csv.required_column("n_chargers");
    const auto costCol     = csv.required_column("infra_cost_musd");
    const auto energyCol   = csv.required_column("station_daily_mwh");

    std::vector<TechScenario> result;
    while (csv.next()) {
        TechScenario row;
        row.share             = csv.to_double(shareCol) / 100.0;
        row.tech              = parse_tech(csv.field(techCol));
        row.n_stations        = static_cast<int>(csv.to_int(stationsCol));
        row.n_chargers        = static_cast<int>(csv.to_int(chargersCol));
        row.infra_cost_10yr   = csv.to_double(costCol);
        row.station_daily_mwh = csv.to_double(energyCol);
        if (row.infra_cost_10yr < 0.0 || row.station_daily_mwh < 0.0) {
            throw ValidationError("{}:{}: costs and energies must be non-negative", csv.source_name(), csv.line_number());
        }
        result.push_back(row);
    }
    return result;
}

double total_energy_demand(double annualVmtMillion, double share, const EconConfig& config)
{
    return annualVmtMillion * share / config.battery_perf;
}

double annual_station_energy(double stationDailyMwh)
{
    return stationDailyMwh * 365.0 / 1000.0;
}

double charger_share(double stationDailyMwh, double totalAnnualBwh)
{
    if (!(totalAnnualBwh > 0.0)) {
        throw ValidationError("Total energy demand must be positive to compute the charger share");
    }
    return 100.0 * annual_station_energy(stationDailyMwh) / totalAnnualBwh;
}

double societal_cost(double savingsMt, const EconConfig& config)
{
    return savingsMt * config.co2_cost;
}

double annualized_infra_cost(double infraCost, const EconConfig& config)
{
    if (config.inflation == 0.0) {
        return infraCost / config.infra_lifetime;
    }
    const double r = config.inflation;
    return infraCost * r / (1.0 - std::pow(1.0 + r, -config.infra_lifetime));
}

std::vector<EnergyRow> energy_grid(std::span<const TechScenario> techs, double annualVmtMillion, const EconConfig& config)
{
    std::vector<EnergyRow> rows;
    for (const auto& tech : techs) {
        EnergyRow row;
        row.share              = tech.share;
        row.tech               = tech.tech;
        row.n_stations         = tech.n_stations;
        row.n_chargers         = tech.n_chargers;
        row.infra_cost_10yr    = tech.infra_cost_10yr;
        row.station_daily_mwh  = tech.station_daily_mwh;
        row.station_annual_bwh = annual_station_energy(tech.station_daily_mwh);
        row.total_bwh          = total_energy_demand(annualVmtMillion, tech.share, config);
        row.charger_pct        = charger_share(tech.station_daily_mwh, row.total_bwh);
        rows.push_back(row);
    }
    return rows;
}

std::string format_energy_csv(std::span<const EnergyRow> rows)
{
    std::string out = "share_pct,tech,n_stations,n_chargers,infra_cost_musd,station_daily_mwh,station_annual_bwh,total_bwh,charger_pct\n";
    for (const auto& row : rows) {
        out += fmt::format("{},{},{},{},{:.2f},{:.2f},{:.4f},{:.4f},{:.4f}\n", row.share * 100.0, to_string(row.tech), row.n_stations, row.n_chargers, row.infra_cost_10yr, row.station_daily_mwh, row.station_annual_bwh, row.total_bwh, row.charger_pct);
    }
    return out;
}

BenefitCost benefit_cost(double annualSocietal, const TechScenario& tech, const EconConfig& config)
{
    if (!(tech.infra_cost_10yr > 0.0)) {
        throw ValidationError("{} infrastructure cost at {}% must be positive", to_string(tech.tech), tech.share * 100.0);
    }

    BenefitCost result;
    result.share           = tech.share;
    result.tech            = tech.tech;
    result.annual_societal = annualSocietal;
    result.annual_infra    = annualized_infra_cost(tech.infra_cost_10yr, config);
    result.ratio           = annualSocietal / result.annual_infra;
    return result;
}

std::vector<BenefitCost> benefit_cost_grid(std::span<const TechScenario> techs, std::span<const ShareSavings> savings, const EconConfig& config)
{
    std::vector<BenefitCost> rows;
    for (const auto& tech : techs) {
        for (const auto& entry : savings) {
            if (std::abs(entry.share - tech.share) < 1e-9) {
                rows.push_back(benefit_cost(societal_cost(entry.savings_mt, config), tech, config));
                break;
            }
        }
    }
    return rows;
}

std::string format_econ_csv(std::span<const BenefitCost> rows)
{
    std::string out = "share,tech,annual_societal_m$,annual_infra_m$,bc_ratio\n";
    for (const auto& row : rows) {
        out += fmt::format("{},{},{:.4f},{:.4f},{:.4f}\n", row.share, to_string(row.tech), row.annual_societal, row.annual_infra, row.ratio);
    }
    return out;
}

}
