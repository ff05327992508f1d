#include "emitron/run_config.h"
#include "emitron/csv.h"
#include "emitron/error.h"
#include "emitron/parallel.h"

#include <openssl/evp.h>

#include <memory>

namespace emitron {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const json& require(const json& doc, const char* key, std::string_view context)
{
    if (!doc.is_object() || !doc.contains(key)) {
        throw InputError("Config section '{}' lacks required key '{}'", context, key);
    }
    return doc.at(key);
}

std::optional<fs::path> optional_path(const json& doc, const char* key)
{
    if (doc.is_object() && doc.contains(key) && !doc.at(key).is_null()) {
        return fs::path(doc.at(key).get<std::string>());
    }
    return {};
}

template <typename T>
T value_or(const json& doc, const char* key, T fallback)
{
    if (doc.is_object() && doc.contains(key) && !doc.at(key).is_null()) {
        return doc.at(key).get<T>();
    }
    return fallback;
}

ProfileSpec profile_from_json(const json& doc, ProfileSpec spec)
{
    spec.cruise_speed    = value_or(doc, "cruise_speed", spec.cruise_speed);
    spec.accel_rate      = value_or(doc, "accel_rate", spec.accel_rate);
    spec.decel_rate      = value_or(doc, "decel_rate", spec.decel_rate);
    spec.target_distance = value_or(doc, "target_distance", spec.target_distance);
    spec.n_stops         = value_or(doc, "n_stops", spec.n_stops);
    spec.noise_amp       = value_or(doc, "noise_amp", spec.noise_amp);
    spec.seed            = value_or(doc, "seed", spec.seed);
    return spec;
}

ordered_json profile_to_json(const ProfileSpec& spec)
{
    ordered_json doc;
    doc["cruise_speed"]    = spec.cruise_speed;
    doc["accel_rate"]      = spec.accel_rate;
    doc["decel_rate"]      = spec.decel_rate;
    doc["target_distance"] = spec.target_distance;
    doc["n_stops"]         = spec.n_stops;
    doc["noise_amp"]       = spec.noise_amp;
    doc["seed"]            = spec.seed;
    return doc;
}

void put_path(ordered_json& doc, const char* key, const std::optional<fs::path>& path)
{
    if (path) {
        doc[key] = path->generic_string();
    }
}

std::string sha256_hex(const std::vector<std::string>& chunks)
{
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw RuntimeError("Failed to initialise SHA-256");
    }
    for (const auto& chunk : chunks) {
        // Length prefix keeps chunk boundaries unambiguous.
        const auto size = fmt::format("{}:", chunk.size());
        EVP_DigestUpdate(ctx.get(), size.data(), size.size());
        EVP_DigestUpdate(ctx.get(), chunk.data(), chunk.size());
    }

    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &length);

    std::string hex;
    for (unsigned int i = 0; i < length; ++i) {
        hex += fmt::format("{:02x}", digest[i]);
    }
    return hex;
}

}

RunConfig RunConfig::load(const fs::path& path)
{
    json doc;
    try {
        doc = json::parse(read_file(path), nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ValidationError("Config '{}' is not valid JSON: {}", path.string(), e.what());
    }
    return from_json(doc, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

RunConfig RunConfig::from_json(const json& doc, const fs::path& baseDir)
{
    RunConfig cfg;
    cfg.base_dir = baseDir;

    try {
        cfg.seed    = value_or<std::uint64_t>(doc, "seed", cfg.seed);
        cfg.threads = value_or<unsigned>(doc, "threads", cfg.threads);
        cfg.out     = value_or<std::string>(doc, "out", cfg.out.string());

        const auto& traj        = require(doc, "trajectories", "root");
        cfg.trajectories.csv    = optional_path(traj, "csv");
        cfg.trajectories.zones  = optional_path(traj, "zones");
        cfg.trajectories.a_max  = value_or(traj, "a_max", cfg.trajectories.a_max);
        if (traj.contains("step") && !traj.at("step").is_null()) {
            cfg.trajectories.step = traj.at("step").get<double>();
        }
        if (traj.contains("synthetic")) {
            const auto& syn = traj.at("synthetic");
            SyntheticSource source;
            source.n_trips = value_or<std::size_t>(syn, "n_trips", source.n_trips);
            source.seed    = value_or<std::uint64_t>(syn, "seed", source.seed);
            for (const auto& entry : require(syn, "od_weights", "trajectories.synthetic")) {
                source.od_weights[OdPair::parse(require(entry, "od", "od_weights").get<std::string>())] = require(entry, "weight", "od_weights").get<double>();
            }
            source.mix.profile         = profile_from_json(value_or<json>(syn, "profile", json::object()), source.mix.profile);
            source.mix.distance_jitter = value_or(syn, "distance_jitter", source.mix.distance_jitter);
            source.mix.speed_jitter    = value_or(syn, "speed_jitter", source.mix.speed_jitter);
            source.mix.vary_stops      = value_or(syn, "vary_stops", source.mix.vary_stops);
            source.mix.a_max           = cfg.trajectories.a_max;
            cfg.trajectories.synthetic = std::move(source);
        }
        if (!cfg.trajectories.csv && !cfg.trajectories.synthetic) {
            throw InputError("Config section 'trajectories' needs 'csv' or 'synthetic'");
        }

        const auto& emission    = require(doc, "emission", "root");
        cfg.coefficients        = require(emission, "coefficients", "emission").get<std::string>();
        cfg.model.category      = parse_vehicle_category(value_or<std::string>(emission, "category", "petrol_car"));
        cfg.model.pollutant     = value_or<std::string>(emission, "pollutant", cfg.model.pollutant);
        cfg.model.gamma         = value_or(emission, "gamma", cfg.model.gamma);

        const auto& fleet             = require(doc, "fleet", "root");
        cfg.fleet_csv                 = require(fleet, "fleet_csv", "fleet").get<std::string>();
        cfg.epa_csv                   = require(fleet, "epa_csv", "fleet").get<std::string>();
        cfg.fleet.analysis_year       = value_or(fleet, "analysis_year", cfg.fleet.analysis_year);
        if (fleet.contains("model_years")) {
            const auto years            = fleet.at("model_years").get<std::vector<int>>();
            if (years.size() != 2) {
                throw ValidationError("fleet.model_years must be [first, last]");
            }
            cfg.fleet.first_model_year = years[0];
            cfg.fleet.last_model_year  = years[1];
        }
        for (const auto& entry : require(fleet, "calibration_vehicles", "fleet")) {
            cfg.fleet.calibration_vehicles.push_back(VehicleKey{require(entry, "make", "calibration_vehicles").get<std::string>(),
                                                                require(entry, "model", "calibration_vehicles").get<std::string>(),
                                                                require(entry, "model_year", "calibration_vehicles").get<int>()});
        }

        const auto calendar     = value_or<json>(doc, "calendar", json::object());
        cfg.calendar.leap_year  = value_or(calendar, "leap_year", false);
        if (calendar.contains("temp_factors")) {
            const auto factors = calendar.at("temp_factors").get<std::vector<double>>();
            if (factors.size() != 12) {
                throw ValidationError("calendar.temp_factors must list 12 values, got {}", factors.size());
            }
            std::copy(factors.begin(), factors.end(), cfg.calendar.temp_factors.begin());
        }

        const auto demand                    = value_or<json>(doc, "demand", json::object());
        cfg.demand.factors_csv               = optional_path(demand, "factors_csv");
        cfg.demand.incidence_csv             = optional_path(demand, "incidence_csv");
        cfg.demand.observations_csv          = optional_path(demand, "observations_csv");
        cfg.demand.monthly_vmt_csv           = optional_path(demand, "monthly_vmt_csv");
        cfg.demand.ipf.tolerance             = value_or(demand, "tolerance", cfg.demand.ipf.tolerance);
        cfg.demand.ipf.max_iterations        = value_or(demand, "max_iterations", cfg.demand.ipf.max_iterations);
        if (cfg.demand.incidence_csv.has_value() != cfg.demand.observations_csv.has_value()) {
            throw InputError("demand.incidence_csv and demand.observations_csv must be given together");
        }

        const auto scenarios = value_or<json>(doc, "scenarios", json::object());
        auto& sc             = cfg.scenarios;
        sc.shares            = value_or(scenarios, "shares", sc.shares);
        if (scenarios.contains("kinds")) {
            sc.kinds.clear();
            for (const auto& kind : scenarios.at("kinds")) {
                sc.kinds.push_back(parse_scenario_kind(kind.get<std::string>()));
            }
        }
        if (scenarios.contains("variants")) {
            sc.variants.clear();
            for (const auto& variant : scenarios.at("variants")) {
                sc.variants.push_back(EstimatorVariant::parse(variant.get<std::string>()));
            }
        }
        sc.draws         = value_or<std::size_t>(scenarios, "draws", sc.draws);
        sc.age_threshold = value_or(scenarios, "age_threshold", sc.age_threshold);
        sc.econ_scenario = parse_scenario_kind(value_or<std::string>(scenarios, "econ_scenario", std::string(to_string(sc.econ_scenario))));
        sc.econ_variant  = EstimatorVariant::parse(value_or<std::string>(scenarios, "econ_variant", sc.econ_variant.name()));
        if (scenarios.contains("savings_override")) {
            for (const auto& entry : scenarios.at("savings_override")) {
                sc.savings_override.push_back(ShareSavings{require(entry, "share", "savings_override").get<double>(), require(entry, "savings_mt", "savings_override").get<double>()});
            }
        }

        const auto econ            = value_or<json>(doc, "econ", json::object());
        cfg.econ.battery_perf      = value_or(econ, "battery_perf", cfg.econ.battery_perf);
        cfg.econ.co2_cost          = value_or(econ, "co2_cost", cfg.econ.co2_cost);
        cfg.econ.infra_lifetime    = value_or(econ, "infra_lifetime", cfg.econ.infra_lifetime);
        cfg.econ.inflation         = value_or(econ, "inflation", cfg.econ.inflation);
        cfg.tech_scenarios_csv     = optional_path(econ, "tech_scenarios_csv");
        cfg.econ.validate();
    } catch (const json::exception& e) {
        throw ValidationError("Invalid config: {}", e.what());
    }
    return cfg;
}

ordered_json RunConfig::to_json() const
{
    ordered_json doc;
    doc["seed"]    = seed;
    doc["threads"] = threads;
    doc["out"]     = out.generic_string();

    auto& traj = doc["trajectories"];
    put_path(traj, "csv", trajectories.csv);
    put_path(traj, "zones", trajectories.zones);
    traj["a_max"] = trajectories.a_max;
    if (trajectories.step) {
        traj["step"] = *trajectories.step;
    }
    if (trajectories.synthetic) {
        const auto& syn = *trajectories.synthetic;
        auto& s         = traj["synthetic"];
        s["n_trips"]    = syn.n_trips;
        s["seed"]       = syn.seed;
        s["od_weights"] = ordered_json::array();
        for (const auto& [od, weight] : syn.od_weights) {
            s["od_weights"].push_back(ordered_json{{"od", od.label()}, {"weight", weight}});
        }
        s["profile"]         = profile_to_json(syn.mix.profile);
        s["distance_jitter"] = syn.mix.distance_jitter;
        s["speed_jitter"]    = syn.mix.speed_jitter;
        s["vary_stops"]      = syn.mix.vary_stops;
    }

    auto& emission           = doc["emission"];
    emission["coefficients"] = coefficients.generic_string();
    emission["category"]     = std::string(to_string(model.category));
    emission["pollutant"]    = model.pollutant;
    emission["gamma"]        = model.gamma;

    auto& fl                 = doc["fleet"];
    fl["fleet_csv"]          = fleet_csv.generic_string();
    fl["epa_csv"]            = epa_csv.generic_string();
    fl["analysis_year"]      = fleet.analysis_year;
    fl["model_years"]        = {fleet.first_model_year, fleet.last_model_year};
    fl["calibration_vehicles"] = ordered_json::array();
    for (const auto& key : fleet.calibration_vehicles) {
        fl["calibration_vehicles"].push_back(ordered_json{{"make", key.make}, {"model", key.model}, {"model_year", key.model_year}});
    }

    doc["calendar"]["leap_year"]    = calendar.leap_year;
    doc["calendar"]["temp_factors"] = calendar.temp_factors;

    auto& dm = doc["demand"];
    dm       = ordered_json::object();
    put_path(dm, "factors_csv", demand.factors_csv);
    put_path(dm, "incidence_csv", demand.incidence_csv);
    put_path(dm, "observations_csv", demand.observations_csv);
    put_path(dm, "monthly_vmt_csv", demand.monthly_vmt_csv);
    dm["tolerance"]      = demand.ipf.tolerance;
    dm["max_iterations"] = demand.ipf.max_iterations;

    auto& sc     = doc["scenarios"];
    sc["shares"] = scenarios.shares;
    sc["kinds"]  = ordered_json::array();
    for (auto kind : scenarios.kinds) {
        sc["kinds"].push_back(std::string(to_string(kind)));
    }
    sc["variants"] = ordered_json::array();
    for (const auto& variant : scenarios.variants) {
        sc["variants"].push_back(variant.name());
    }
    sc["draws"]         = scenarios.draws;
    sc["age_threshold"] = scenarios.age_threshold;
    sc["econ_scenario"] = std::string(to_string(scenarios.econ_scenario));
    sc["econ_variant"]  = scenarios.econ_variant.name();
    if (!scenarios.savings_override.empty()) {
        sc["savings_override"] = ordered_json::array();
        for (const auto& entry : scenarios.savings_override) {
            sc["savings_override"].push_back(ordered_json{{"share", entry.share}, {"savings_mt", entry.savings_mt}});
        }
    }

    auto& ec             = doc["econ"];
    ec["battery_perf"]   = econ.battery_perf;
    ec["co2_cost"]       = econ.co2_cost;
    ec["infra_lifetime"] = econ.infra_lifetime;
    ec["inflation"]      = econ.inflation;
    put_path(ec, "tech_scenarios_csv", tech_scenarios_csv);
    return doc;
}

fs::path RunConfig::resolve(const fs::path& path) const
{
    return path.is_absolute() ? path : base_dir / path;
}

unsigned RunConfig::worker_count() const
{
    return threads > 0 ? threads : default_thread_count();
}

std::vector<fs::path> RunConfig::input_files() const
{
    std::vector<fs::path> files;
    auto add = [&](const std::optional<fs::path>& path) {
        if (path) {
            files.push_back(resolve(*path));
        }
    };
    add(trajectories.csv);
    add(trajectories.zones);
    add(coefficients);
    add(fleet_csv);
    add(epa_csv);
    add(demand.factors_csv);
    add(demand.incidence_csv);
    add(demand.observations_csv);
    add(demand.monthly_vmt_csv);
    add(tech_scenarios_csv);
    return files;
}

void RunConfig::check_paths() const
{
    for (const auto& file : input_files()) {
        if (!fs::is_regular_file(file)) {
            throw InputError("Input file '{}' does not exist", file.string());
        }
    }
}

std::string RunConfig::digest() const
{
    auto canonical = to_json();
    canonical.erase("out");
    canonical.erase("threads");

    std::vector<std::string> chunks{canonical.dump()};
    for (const auto& file : input_files()) {
        chunks.push_back(read_file(file));
    }
    return sha256_hex(chunks);
}

}
