#include "emitron/cli_report.h"
#include "emitron/csv.h"
#include "emitron/error.h"
#include "emitron/seeding.h"
#include "emitron/synth_traffic.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <ostream>
#include <set>

namespace emitron {

using nlohmann::ordered_json;

namespace {

constexpr std::array<Command, 8> kCommands{Command::Simulate, Command::Estimate, Command::Factors, Command::Scenarios, Command::Energy, Command::Econ, Command::Report, Command::Validate};

void write_artifact(const fs::path& dir, std::string_view name, std::string_view content, std::ostream& out)
{
    write_file_atomic(dir / name, content);
    out << "wrote " << (dir / name).string() << '\n';
}

ordered_json ipf_json(const IpfReport& report)
{
    ordered_json doc;
    doc["month"]                 = report.month;
    doc["converged"]             = report.converged;
    doc["iterations"]            = report.iterations;
    doc["max_relative_residual"] = report.max_relative_residual;
    doc["uncovered"]             = ordered_json::array();
    for (const auto& od : report.uncovered) {
        doc["uncovered"].push_back(od.label());
    }
    return doc;
}

ordered_json ingest_json(const IngestReport& report)
{
    ordered_json doc;
    doc["total_trips"]   = report.total_trips;
    doc["accepted"]      = report.accepted;
    doc["urban_dropped"] = report.urban_dropped;
    doc["unclustered"]   = report.unclustered;
    doc["rejected"]      = report.rejected;
    doc["rejections"]    = ordered_json::array();
    for (const auto& rejection : report.rejections) {
        doc["rejections"].push_back(ordered_json{{"trip_id", rejection.trip_id}, {"line", rejection.line}, {"reason", rejection.reason}});
    }
    doc["warnings"] = report.warnings;
    return doc;
}

ordered_json fleet_json(const FleetRegistry& registry, const FleetLoadReport& report)
{
    const auto stats = fleet_weighted_stats(registry);

    ordered_json doc;
    doc["vehicle_types"]     = registry.size();
    doc["fleet_rows"]        = report.fleet_rows;
    doc["merged_duplicates"] = report.merged_duplicates;
    doc["out_of_range"]      = report.out_of_range;
    doc["dropped_unmatched"] = report.dropped_unmatched;
    doc["total_weight"]      = registry.total_weight();
    doc["mean_rate"]         = stats.mean_rate;
    doc["std_rate"]          = stats.std_rate;
    doc["mean_age"]          = stats.mean_age;
    doc["std_age"]           = stats.std_age;
    doc["baseline_rate"]     = registry.baseline_rate();
    return doc;
}

std::string dump(const ordered_json& doc)
{
    return doc.dump(2) + "\n";
}

}

std::string_view to_string(Command command) noexcept
{
    switch (command) {
    case Command::Simulate: return "simulate";
    case Command::Estimate: return "estimate";
    case Command::Factors: return "factors";
    case Command::Scenarios: return "scenarios";
    case Command::Energy: return "energy";
    case Command::Econ: return "econ";
    case Command::Report: return "report";
    case Command::Validate: return "validate";
    }
    return "unknown";
}

Command parse_command(std::string_view text)
{
    for (auto command : kCommands) {
        if (to_string(command) == text) {
            return command;
        }
    }
    throw InputError("Unknown subcommand '{}'", text);
}

void CliOverrides::apply(RunConfig& config) const
{
    if (seed) {
        config.seed = *seed;
    }
    if (out) {
        // Flag paths are relative to the working directory, not the config.
        config.out = fs::absolute(*out);
    }
    if (!shares.empty()) {
        config.scenarios.shares = shares;
    }
    if (!scenarios.empty()) {
        config.scenarios.kinds.clear();
        for (const auto& name : scenarios) {
            config.scenarios.kinds.push_back(parse_scenario_kind(name));
        }
    }
    if (!variants.empty()) {
        config.scenarios.variants.clear();
        for (const auto& name : variants) {
            config.scenarios.variants.push_back(EstimatorVariant::parse(name));
        }
    }
    if (draws) {
        config.scenarios.draws = *draws;
    }
    if (threads) {
        config.threads = *threads;
    }
}

std::string with_digest_header(std::string_view digest, std::string_view csv)
{
    return fmt::format("# config_digest={}\n{}", digest, csv);
}

IngestResult load_trajectories(const RunConfig& config)
{
    const auto& source = config.trajectories;
    if (source.csv) {
        ValidationConfig validation;
        validation.a_max = source.a_max;
        validation.step  = source.step;
        if (source.zones) {
            validation.zones = ZoneClustering::load(config.resolve(*source.zones));
        } else {
            validation.identity_zones = true;
        }
        return ingest_trajectory_file(config.resolve(*source.csv), validation);
    }

    const auto& syn = *source.synthetic;
    IngestResult result{generate_fleet_of_trips(syn.n_trips, syn.od_weights, syn.mix, syn.seed, config.worker_count()), {}};
    result.report.total_trips = result.store.size();
    result.report.accepted    = result.store.size();
    return result;
}

FleetLoadResult load_registry(const RunConfig& config)
{
    const auto epa   = read_epa_csv(config.resolve(config.epa_csv));
    const auto fleet = read_fleet_csv(config.resolve(config.fleet_csv));
    return load_fleet(fleet, aggregate_epa_rates(epa), config.fleet);
}

DemandResolution resolve_demand(const RunConfig& config, const TrajectoryStore& store, const YearProfile& months)
{
    const auto& demand = config.demand;
    DemandResolution result;

    if (demand.factors_csv) {
        result.factors = DemandFactors::load(config.resolve(*demand.factors_csv));
    } else if (demand.incidence_csv) {
        const auto incidence    = OdStationIncidence::load(config.resolve(*demand.incidence_csv));
        const auto observations = read_observations(config.resolve(*demand.observations_csv));

        std::map<OdPair, double> odBase;
        for (const auto& [od, stations] : incidence.entries()) {
            for (const auto& [station, contribution] : stations) {
                odBase[od] += contribution;
            }
        }

        for (int month = 1; month <= 12; ++month) {
            auto fit = estimate_monthly_factors(incidence, observations, month, demand.ipf);
            double weighted = 0.0;
            double weights  = 0.0;
            for (const auto& [od, phi] : fit.phi) {
                result.factors.set(od, month, phi);
                weighted += phi * odBase[od];
                weights += odBase[od];
            }
            // ODs outside the incidence table fall back to the network mean.
            if (weights > 0.0) {
                result.factors.set_global(month, weighted / weights);
            }
            if (!fit.report.converged) {
                result.warnings.push_back(fmt::format("Demand factors for month {} did not converge after {} iterations (max relative residual {:.3g})", month, fit.report.iterations, fit.report.max_relative_residual));
            }
            for (const auto& od : fit.report.uncovered) {
                result.warnings.push_back(fmt::format("OD '{}' crosses no counting station in month {}; using the network ratio", od.label(), month));
            }
            result.ipf.push_back(std::move(fit.report));
        }

        for (const auto& od : store.od_pairs()) {
            if (!incidence.entries().contains(od)) {
                result.warnings.push_back(fmt::format("OD '{}' has no incidence entry; using the network mean factor", od.label()));
            }
        }
    } else if (demand.monthly_vmt_csv) {
        const auto vmt = read_monthly_vmt(config.resolve(*demand.monthly_vmt_csv));
        result.factors = factors_from_monthly_vmt(vmt, store_vmt(store).total, months);
    } else {
        result.warnings.emplace_back("No demand source configured; every monthly factor is 1");
    }
    return result;
}

Pipeline::Pipeline(RunConfig config)
: _config(std::move(config))
{
    _config.check_paths();
    _digest = _config.digest();

    _trips = load_trajectories(_config);
    if (_trips.store.empty()) {
        throw ValidationError("No intercity trajectories left after ingestion ({} trips read)", _trips.report.total_trips);
    }

    _coefficients = CoefficientTable::load(_config.resolve(_config.coefficients));
    _fleet.emplace(load_registry(_config));
    _assignment = assign_vehicle_types(_trips.store, _fleet->registry, keyed_seed(_config.seed, "vehicle_types"));
    _ledger.emplace(evaluate_trips(_trips.store, _assignment, _fleet->registry, _coefficients, _config.model, _config.worker_count()));

    _months = month_profile(_config.calendar);
    _demand = resolve_demand(_config, _trips.store, _months);
}

EmissionReport Pipeline::estimate() const
{
    auto report          = estimate_matrix(*_ledger, _months, _demand.factors);
    report.seed          = _config.seed;
    report.config_digest = _digest;
    return report;
}

std::vector<SavingsCell> Pipeline::scenarios() const
{
    const MonthlyScaling scaling(_months, _demand.factors, _ledger->od_pairs());

    ScenarioSuiteOptions options;
    options.shares        = _config.scenarios.shares;
    options.kinds         = _config.scenarios.kinds;
    options.variants      = _config.scenarios.variants;
    options.n_draws       = _config.scenarios.draws;
    options.age_threshold = _config.scenarios.age_threshold;
    options.master_seed   = keyed_seed(_config.seed, "scenarios");
    options.threads       = _config.worker_count();
    return run_scenario_suite(_trips.store, _assignment, _fleet->registry, *_ledger, scaling, options);
}

std::vector<TechScenario> Pipeline::tech_scenarios() const
{
    if (!_config.tech_scenarios_csv) {
        throw InputError("Config lacks econ.tech_scenarios_csv");
    }
    return load_tech_scenarios(_config.resolve(*_config.tech_scenarios_csv));
}

std::vector<EnergyRow> Pipeline::energy(double annualVmtMillion) const
{
    return energy_grid(tech_scenarios(), annualVmtMillion, _config.econ);
}

std::vector<ShareSavings> Pipeline::econ_savings(const std::vector<SavingsCell>& cells) const
{
    const auto& sc = _config.scenarios;
    if (!sc.savings_override.empty()) {
        return sc.savings_override;
    }

    std::vector<ShareSavings> savings;
    for (double share : sc.shares) {
        for (const auto& cell : cells) {
            if (cell.kind == sc.econ_scenario && cell.variant == sc.econ_variant && std::abs(cell.share - share) < 1e-12) {
                savings.push_back(ShareSavings{share, cell.mean});
                break;
            }
        }
    }
    if (savings.size() != sc.shares.size()) {
        throw ConfigurationError("Scenario results lack {} / {}, needed for the economics grid", to_string(sc.econ_scenario), sc.econ_variant.name());
    }
    return savings;
}

std::vector<BenefitCost> Pipeline::econ(const std::vector<ShareSavings>& savings) const
{
    return benefit_cost_grid(tech_scenarios(), savings, _config.econ);
}

std::vector<std::string> Pipeline::warnings() const
{
    auto result = _trips.report.warnings;
    result.insert(result.end(), _demand.warnings.begin(), _demand.warnings.end());
    return result;
}

namespace {

int run_simulate(const RunConfig& config, const fs::path& dir, std::ostream& out)
{
    if (!config.trajectories.synthetic) {
        throw ConfigurationError("simulate needs a trajectories.synthetic section");
    }
    config.check_paths();
    const auto digest = config.digest();
    const auto trips  = load_trajectories(config);

    std::set<NodeId> nodes;
    for (const auto& od : trips.store.od_pairs()) {
        nodes.insert(od.origin);
        nodes.insert(od.destination);
    }
    std::string zones = "zone_id,node_id\n";
    for (const auto& node : nodes) {
        zones += fmt::format("{},{}\n", node, node);
    }

    write_artifact(dir, "trajectories.csv", with_digest_header(digest, format_trajectory_csv(trips.store)), out);
    write_artifact(dir, "zones.csv", with_digest_header(digest, zones), out);
    return 0;
}

int run_validate(const RunConfig& config, const fs::path& dir, std::ostream& out)
{
    const Pipeline pipeline(config);
    const auto& ingest = pipeline.ingest_report();

    ordered_json doc;
    doc["config_digest"] = pipeline.digest();
    doc["status"]        = ingest.rejected == 0 ? "ok" : "failed";
    doc["trajectories"]  = ingest_json(ingest);
    doc["fleet"]         = fleet_json(pipeline.registry(), pipeline.fleet_report());
    doc["demand"]        = ordered_json::array();
    for (const auto& report : pipeline.demand().ipf) {
        doc["demand"].push_back(ipf_json(report));
    }
    doc["warnings"] = pipeline.warnings();
    write_artifact(dir, "validation.json", dump(doc), out);

    if (ingest.rejected > 0) {
        const auto& first = ingest.rejections.front();
        throw ValidationError("{} trajectories rejected; first: trip '{}' line {}: {}", ingest.rejected, first.trip_id, first.line, first.reason);
    }
    return 0;
}

}

int run(Command command, const RunConfig& config, std::ostream& out, std::ostream& err)
{
    const auto dir = config.output_dir();
    fs::create_directories(dir);

    if (command == Command::Simulate) {
        return run_simulate(config, dir, out);
    }
    if (command == Command::Validate) {
        return run_validate(config, dir, out);
    }

    const Pipeline pipeline(config);
    for (const auto& warning : pipeline.warnings()) {
        err << "warning: " << warning << '\n';
    }
    const auto& digest = pipeline.digest();

    if (command == Command::Factors) {
        ordered_json doc;
        doc["config_digest"] = digest;
        doc["months"]        = ordered_json::array();
        for (const auto& report : pipeline.demand().ipf) {
            doc["months"].push_back(ipf_json(report));
        }
        doc["warnings"] = pipeline.demand().warnings;
        write_artifact(dir, "factors.csv", with_digest_header(digest, pipeline.demand().factors.to_csv()), out);
        write_artifact(dir, "factors_report.json", dump(doc), out);
        return 0;
    }

    const auto report = pipeline.estimate();
    if (command == Command::Estimate || command == Command::Report) {
        write_artifact(dir, "table1_emissions.csv", format_report_csv(report), out);
        write_artifact(dir, "table1_emissions.json", format_report_json(report), out);
        write_artifact(dir, "figure6_monthly.csv", with_digest_header(digest, format_monthly_plot_csv(report)), out);
        if (command == Command::Estimate) {
            return 0;
        }
    }

    std::vector<SavingsCell> cells;
    if (command == Command::Scenarios || command == Command::Report || (command == Command::Econ && config.scenarios.savings_override.empty())) {
        cells = pipeline.scenarios();
        for (const auto& cell : cells) {
            if (cell.shortfall) {
                err << fmt::format("warning: {} at share {} reaches only {:.4f} of trips\n", to_string(cell.kind), cell.share, cell.achieved_share);
            }
        }
    }
    if (command == Command::Scenarios || command == Command::Report) {
        write_artifact(dir, "table3_scenarios.csv", with_digest_header(digest, format_scenario_csv(cells)), out);
        write_artifact(dir, "figure7_scenarios.csv", with_digest_header(digest, format_scenario_plot_csv(cells)), out);
        if (command == Command::Scenarios) {
            return 0;
        }
    }

    std::vector<EnergyRow> energy;
    if (command == Command::Energy || command == Command::Report) {
        energy = pipeline.energy(report.annual_vmt_million);
        write_artifact(dir, "table2_energy.csv", with_digest_header(digest, format_energy_csv(energy)), out);
        if (command == Command::Energy) {
            return 0;
        }
    }

    const auto savings = pipeline.econ_savings(cells);
    const auto econ    = pipeline.econ(savings);
    write_artifact(dir, "table4_econ.csv", with_digest_header(digest, format_econ_csv(econ)), out);
    if (command == Command::Econ) {
        return 0;
    }

    ordered_json summary;
    summary["config_digest"] = digest;
    summary["seed"]          = config.seed;
    summary["trajectories"]  = ingest_json(pipeline.ingest_report());
    summary["fleet"]         = fleet_json(pipeline.registry(), pipeline.fleet_report());
    summary["annual_vmt_million"] = report.annual_vmt_million;
    for (const auto& variant : EstimatorVariant::all()) {
        summary["annual_mt"][variant.name()] = report.annual(variant);
    }
    summary["scenarios"] = ordered_json::array();
    for (const auto& cell : cells) {
        summary["scenarios"].push_back(ordered_json{{"share", cell.share}, {"scenario", std::string(to_string(cell.kind))}, {"variant", cell.variant.name()}, {"mean_savings_mt", cell.mean}, {"shortfall", cell.shortfall}});
    }
    summary["energy"] = ordered_json::array();
    for (const auto& row : energy) {
        summary["energy"].push_back(ordered_json{{"share", row.share}, {"tech", std::string(to_string(row.tech))}, {"total_bwh", row.total_bwh}, {"charger_pct", row.charger_pct}});
    }
    summary["econ_savings"] = ordered_json::array();
    for (const auto& entry : savings) {
        summary["econ_savings"].push_back(ordered_json{{"share", entry.share}, {"savings_mt", entry.savings_mt}});
    }
    summary["econ"] = ordered_json::array();
    for (const auto& row : econ) {
        summary["econ"].push_back(ordered_json{{"share", row.share}, {"tech", std::string(to_string(row.tech))}, {"bc_ratio", row.ratio}});
    }
    summary["demand"] = ordered_json::array();
    for (const auto& ipf : pipeline.demand().ipf) {
        summary["demand"].push_back(ipf_json(ipf));
    }
    summary["warnings"] = pipeline.warnings();
    write_artifact(dir, "summary.json", dump(summary), out);
    return 0;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Trip-level CO2 emission estimation and EV adoption scenarios", "emitron"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string configPath;
    CliOverrides overrides;
    std::optional<std::string> outDir;
    app.add_option("--config", configPath, "JSON run configuration")->required();
    app.add_option("--seed", overrides.seed, "Master seed");
    app.add_option("--out", outDir, "Output directory");
    app.add_option("--share", overrides.shares, "Market share(s) as fractions");
    app.add_option("--scenario", overrides.scenarios, "Adoption scenario(s)");
    app.add_option("--variant", overrides.variants, "Estimator variant(s)");
    app.add_option("--draws", overrides.draws, "Monte Carlo draws per scenario");
    app.add_option("--threads", overrides.threads, "Worker threads");

    for (auto command : kCommands) {
        app.add_subcommand(std::string(to_string(command)));
    }

    std::string commandName = "emitron";
    auto errorRecord = [&](std::string_view kind, int code, std::string_view message) {
        ordered_json record;
        record["error"]     = kind;
        record["exit_code"] = code;
        record["command"]   = commandName;
        record["message"]   = message;
        err << record.dump() << '\n';
        return code;
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        return errorRecord("usage", 2, e.what());
    }

    try {
        const auto command = parse_command(app.get_subcommands().front()->get_name());
        commandName        = std::string(to_string(command));
        if (outDir) {
            overrides.out = *outDir;
        }

        if (!fs::is_regular_file(configPath)) {
            throw InputError("Config file '{}' does not exist", configPath);
        }
        auto config = RunConfig::load(configPath);
        overrides.apply(config);
        return run(command, config, out, err);
    } catch (const InputError& e) {
        return errorRecord("input", 2, e.what());
    } catch (const ValidationError& e) {
        return errorRecord("validation", 3, e.what());
    } catch (const ConfigurationError& e) {
        return errorRecord("configuration", 3, e.what());
    } catch (const std::exception& e) {
        return errorRecord("internal", 1, e.what());
    }
}

}
