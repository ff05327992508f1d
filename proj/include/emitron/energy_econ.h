#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emitron {

// Energy is reported in BWh = 1e9 Wh (GWh): one million miles at 1 mi/kWh
// is one million kWh, i.e. 1 BWh.

struct EconConfig
{
    double battery_perf   = 3.5;  // miles/kWh
    double co2_cost       = 50.0; // $/ton
    double infra_lifetime = 10.0; // years
    double inflation      = 0.0;  // annual rate

    void validate() const;
};

enum class Tech
{
    LowTech,
    MixedTech,
    HighTech,
};

std::string_view to_string(Tech tech) noexcept;
Tech parse_tech(std::string_view text);

struct TechScenario
{
    double share            = 0.0; // fraction
    Tech tech               = Tech::LowTech;
    int n_stations          = 0;
    int n_chargers          = 0;
    double infra_cost_10yr  = 0.0; // million $
    double station_daily_mwh = 0.0;
};

// `share_pct,tech,n_stations,n_chargers,infra_cost_musd,station_daily_mwh`
std::vector<TechScenario> load_tech_scenarios(const std::filesystem::path& path);

// annual_vmt [million miles] · share / battery_perf -> BWh/year
double total_energy_demand(double annualVmtMillion, double share, const EconConfig& config);

double annual_station_energy(double stationDailyMwh); // BWh/year, 365 days

// Percent of total EV energy served by intercity DC fast chargers.
double charger_share(double stationDailyMwh, double totalAnnualBwh);

// savings [Mt] · $/ton -> million $/year
double societal_cost(double savingsMt, const EconConfig& config);

// Equal annual payment over the lifetime; straight-line when inflation is 0.
double annualized_infra_cost(double infraCost, const EconConfig& config);

struct EnergyRow
{
    double share = 0.0;
    Tech tech    = Tech::LowTech;
    int n_stations = 0;
    int n_chargers = 0;
    double infra_cost_10yr   = 0.0;
    double station_daily_mwh = 0.0;
    double station_annual_bwh = 0.0;
    double total_bwh         = 0.0;
    double charger_pct       = 0.0;
};

std::vector<EnergyRow> energy_grid(std::span<const TechScenario> techs, double annualVmtMillion, const EconConfig& config);
std::string format_energy_csv(std::span<const EnergyRow> rows);

struct BenefitCost
{
    double share          = 0.0;
    Tech tech             = Tech::LowTech;
    double annual_societal = 0.0; // million $
    double annual_infra   = 0.0;  // million $
    double ratio          = 0.0;
};

BenefitCost benefit_cost(double annualSocietal, const TechScenario& tech, const EconConfig& config);

struct ShareSavings
{
    double share      = 0.0;
    double savings_mt = 0.0;
};

// One row per tech scenario whose share has a savings entry.
std::vector<BenefitCost> benefit_cost_grid(std::span<const TechScenario> techs, std::span<const ShareSavings> savings, const EconConfig& config);

// share,tech,annual_societal_m$,annual_infra_m$,bc_ratio
std::string format_econ_csv(std::span<const BenefitCost> rows);

}
