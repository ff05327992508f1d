#pragma once

#include "emitron/calendar_factors.h"
#include "emitron/emission_pipeline.h"
#include "emitron/energy_econ.h"
#include "emitron/ev_scenarios.h"
#include "emitron/fleet_registry.h"
#include "emitron/synth_traffic.h"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace emitron {

namespace fs = std::filesystem;

struct SyntheticSource
{
    std::size_t n_trips = 1000;
    std::uint64_t seed  = 1;
    std::map<OdPair, double> od_weights;
    TripMix mix;
};

struct TrajectorySource
{
    std::optional<fs::path> csv;
    std::optional<fs::path> zones;
    std::optional<SyntheticSource> synthetic;
    double a_max = kDefaultAccelBound;
    std::optional<double> step;
};

struct DemandSource
{
    std::optional<fs::path> factors_csv;
    std::optional<fs::path> incidence_csv;
    std::optional<fs::path> observations_csv;
    std::optional<fs::path> monthly_vmt_csv;
    IpfOptions ipf;
};

struct ScenarioConfig
{
    std::vector<double> shares{0.03, 0.06, 0.10};
    std::vector<ScenarioKind> kinds{all_scenario_kinds().begin(), all_scenario_kinds().end()};
    std::vector<EstimatorVariant> variants{EstimatorVariant{Basis::MacroEpa, true, true}, EstimatorVariant{Basis::Micro, true, true}};
    std::size_t draws    = 20;
    double age_threshold = 10.0;
    // Scenario and variant whose mean savings feed the economics grid.
    ScenarioKind econ_scenario     = ScenarioKind::OldRandom;
    EstimatorVariant econ_variant  = EstimatorVariant{Basis::Micro, true, true};
    // When present, the economics grid uses these savings instead.
    std::vector<ShareSavings> savings_override;
};

struct RunConfig
{
    // Directory relative paths are resolved against (the config file's).
    fs::path base_dir = ".";

    std::uint64_t seed = 42;
    unsigned threads   = 0; // 0: EMITRON_THREADS or hardware concurrency
    fs::path out       = "out";

    TrajectorySource trajectories;

    fs::path coefficients;
    EmissionModel model;

    fs::path fleet_csv;
    fs::path epa_csv;
    FleetOptions fleet;

    CalendarConfig calendar;
    DemandSource demand;
    ScenarioConfig scenarios;

    std::optional<fs::path> tech_scenarios_csv;
    EconConfig econ;

    static RunConfig load(const fs::path& path);
    static RunConfig from_json(const nlohmann::json& doc, const fs::path& baseDir);
    nlohmann::ordered_json to_json() const;

    fs::path resolve(const fs::path& path) const;
    fs::path output_dir() const { return resolve(out).lexically_normal(); }
    unsigned worker_count() const;

    // All input files referenced by the config, resolved.
    std::vector<fs::path> input_files() const;
    // Throws InputError naming the first missing file.
    void check_paths() const;

    // SHA-256 over the canonical config (minus output location and thread
    // count) and the bytes of every input file.
    std::string digest() const;
};

}
