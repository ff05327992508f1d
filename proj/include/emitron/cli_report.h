#pragma once

#include "emitron/calendar_factors.h"
#include "emitron/emission_pipeline.h"
#include "emitron/energy_econ.h"
#include "emitron/ev_scenarios.h"
#include "emitron/fleet_registry.h"
#include "emitron/micro_emission.h"
#include "emitron/run_config.h"
#include "emitron/trajectory_store.h"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace emitron {

enum class Command
{
    Simulate,
    Estimate,
    Factors,
    Scenarios,
    Energy,
    Econ,
    Report,
    Validate,
};

std::string_view to_string(Command command) noexcept;
Command parse_command(std::string_view text);

// Flag values layered over the config file.
struct CliOverrides
{
    std::optional<std::uint64_t> seed;
    std::optional<fs::path> out;
    std::vector<double> shares;
    std::vector<std::string> scenarios;
    std::vector<std::string> variants;
    std::optional<std::size_t> draws;
    std::optional<unsigned> threads;

    void apply(RunConfig& config) const;
};

struct DemandResolution
{
    DemandFactors factors;
    std::vector<IpfReport> ipf; // one per month when fitted from counts
    std::vector<std::string> warnings;
};

DemandResolution resolve_demand(const RunConfig& config, const TrajectoryStore& store, const YearProfile& months);

IngestResult load_trajectories(const RunConfig& config);
FleetLoadResult load_registry(const RunConfig& config);

// Every input of a run, loaded once.
class Pipeline
{
public:
    explicit Pipeline(RunConfig config);

    const RunConfig& config() const noexcept { return _config; }
    const std::string& digest() const noexcept { return _digest; }
    const TrajectoryStore& store() const noexcept { return _trips.store; }
    const IngestReport& ingest_report() const noexcept { return _trips.report; }
    const FleetRegistry& registry() const noexcept { return _fleet->registry; }
    const FleetLoadReport& fleet_report() const noexcept { return _fleet->report; }
    const TypeAssignment& assignment() const noexcept { return _assignment; }
    const TripLedger& ledger() const noexcept { return *_ledger; }
    const YearProfile& months() const noexcept { return _months; }
    const DemandResolution& demand() const noexcept { return _demand; }

    EmissionReport estimate() const;
    std::vector<SavingsCell> scenarios() const;
    std::vector<EnergyRow> energy(double annualVmtMillion) const;
    // Savings per share from the override list, else from the suite cells.
    std::vector<ShareSavings> econ_savings(const std::vector<SavingsCell>& cells) const;
    std::vector<BenefitCost> econ(const std::vector<ShareSavings>& savings) const;

    std::vector<std::string> warnings() const;

private:
    std::vector<TechScenario> tech_scenarios() const;

    RunConfig _config;
    std::string _digest;
    IngestResult _trips;
    CoefficientTable _coefficients;
    std::optional<FleetLoadResult> _fleet;
    TypeAssignment _assignment;
    std::optional<TripLedger> _ledger;
    YearProfile _months{};
    DemandResolution _demand;
};

// Executes one subcommand and writes its artifacts below config.output_dir().
// Progress goes to `out`, warnings to `err`. Returns the exit status; errors
// propagate as exceptions.
int run(Command command, const RunConfig& config, std::ostream& out, std::ostream& err);

// Full command line entry point. Maps InputError to 2, ValidationError and
// ConfigurationError to 3, anything else to 1, printing a JSON error record
// on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// "# config_digest=<hex>\n" followed by the body.
std::string with_digest_header(std::string_view digest, std::string_view csv);

}
