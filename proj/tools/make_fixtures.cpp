// Regenerates the shipped fixtures under data/. Output is deterministic.
//
//   make_fixtures [data-dir]

#include "emitron/calendar_factors.h"
#include "emitron/csv.h"
#include "emitron/fleet_registry.h"
#include "emitron/micro_emission.h"
#include "emitron/parallel.h"
#include "emitron/run_config.h"
#include "emitron/synth_traffic.h"

#include <fmt/format.h>

#include <cmath>
#include <iostream>
#include <numeric>
#include <random>

using namespace emitron;

namespace {

constexpr std::array<double, 12> kMonthlyVmt{2407, 2317, 2727, 2721, 3019, 3115, 3357, 3348, 3047, 3092, 2783, 2557};
constexpr double kTargetMicroAnnualMt = 8.32;

constexpr int kAnalysisYear   = 2020;
constexpr int kFirstModelYear = 2000;
constexpr int kLastModelYear  = 2017;
constexpr std::size_t kTypes  = 570;
constexpr double kFleetMean   = 246.0;
constexpr double kFleetStd    = 55.0;
constexpr double kAgeMean     = 10.2;
constexpr double kAgeStd      = 4.2;
constexpr double kFleetSize   = 4'242'000.0;

const std::vector<VehicleKey> kCalibrationVehicles{{"Toyota", "Corolla", 2005}, {"Toyota", "Celica", 2005}, {"Volkswagen", "Golf", 2005}};

const char* kCoefficients = R"(category,pollutant,regime,threshold,c1,c2,c3,c4,c5,c6
petrol_car,CO2,all,0,0.553,0.161,-0.00289,0.266,0.511,0.183
petrol_car,NOx,accel,-0.5,6.19e-04,8e-05,-4.03e-06,-4.13e-04,3.80e-04,1.77e-04
petrol_car,NOx,decel,-0.5,2.17e-04,0,0,0,0,0
diesel_car,CO2,all,0,0.324,0.0859,0.00496,-0.0586,0.448,0.230
)";

const char* kTechScenarios = R"(share_pct,tech,n_stations,n_chargers,infra_cost_musd,station_daily_mwh
3,Low-Tech,34,250,14.30,69.73
3,Mixed-Tech,29,90,12.54,70.48
3,High-Tech,18,47,7.10,30.80
6,Low-Tech,38,478,23.07,140.04
6,Mixed-Tech,33,160,18.78,141.36
6,High-Tech,21,101,11.82,61.51
10,Low-Tech,41,748,33.10,235.22
10,Mixed-Tech,34,269,27.50,237.99
10,High-Tech,29,152,17.48,102.58
)";

const std::vector<std::string> kMakes{"Chevrolet", "Ford", "Dodge", "Jeep", "GMC", "Honda", "Nissan", "Hyundai", "Buick", "Chrysler", "Subaru", "Kia", "Mazda", "Pontiac", "Saturn", "Mercury"};

struct SynthType
{
    VehicleKey key;
    double weight = 0.0;
    double rate   = 0.0;
};

void write(const fs::path& path, std::string_view content)
{
    fs::create_directories(path.parent_path());
    write_file_atomic(path, content);
    std::cout << "wrote " << path.string() << '\n';
}

// Discretized normal over ages 3..20 whose moments match the targets.
std::map<int, double> age_distribution()
{
    const int minAge = kAnalysisYear - kLastModelYear;
    const int maxAge = kAnalysisYear - kFirstModelYear;

    double mu = kAgeMean;
    double sd = kAgeStd;
    std::map<int, double> share;
    for (int iteration = 0; iteration < 500; ++iteration) {
        double total = 0.0;
        for (int age = minAge; age <= maxAge; ++age) {
            share[age] = std::exp(-0.5 * std::pow((age - mu) / sd, 2));
            total += share[age];
        }
        double mean = 0.0;
        for (auto& [age, s] : share) {
            s /= total;
            mean += s * age;
        }
        double var = 0.0;
        for (const auto& [age, s] : share) {
            var += s * (age - mean) * (age - mean);
        }
        mu += kAgeMean - mean;
        sd *= kAgeStd / std::sqrt(var);
    }
    return share;
}

std::vector<SynthType> michigan_types(std::mt19937_64& rng)
{
    const auto ageShare = age_distribution();
    const int nYears    = kLastModelYear - kFirstModelYear + 1;

    std::uniform_real_distribution<double> weightSpread(0.5, 1.5);
    std::normal_distribution<double> withinCohort(0.0, 49.0);

    std::vector<SynthType> types;
    std::size_t index = 0;
    for (int year = kFirstModelYear; year <= kLastModelYear; ++year) {
        const int age          = kAnalysisYear - year;
        const std::size_t here = kTypes / nYears + (static_cast<std::size_t>(year - kFirstModelYear) < kTypes % nYears ? 1 : 0);

        std::vector<double> spread(here);
        for (auto& s : spread) {
            s = weightSpread(rng);
        }
        const double spreadTotal = std::accumulate(spread.begin(), spread.end(), 0.0);

        for (std::size_t k = 0; k < here; ++k, ++index) {
            SynthType type;
            type.key    = VehicleKey{kMakes[index % kMakes.size()], fmt::format("M{:03d}", index / kMakes.size()), year};
            type.weight = std::max(1.0, std::round(kFleetSize * ageShare.at(age) * spread[k] / spreadTotal));
            type.rate   = 6.0 * (age - kAgeMean) + withinCohort(rng);
            types.push_back(type);
        }
    }

    // Affine map onto the target weighted mean and standard deviation.
    double total = 0.0, mean = 0.0;
    for (const auto& t : types) {
        total += t.weight;
        mean += t.weight * t.rate;
    }
    mean /= total;
    double var = 0.0;
    for (const auto& t : types) {
        var += t.weight * (t.rate - mean) * (t.rate - mean);
    }
    const double sd = std::sqrt(var / total);
    for (auto& t : types) {
        t.rate = kFleetMean + (t.rate - mean) * kFleetStd / sd;
        if (t.rate <= 0.0) {
            throw std::runtime_error("non-positive synthetic rate");
        }
    }
    return types;
}

std::string epa_csv(const std::vector<SynthType>& types, std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> variants(1, 3);
    std::uniform_real_distribution<double> delta(2.0, 8.0);

    std::string out = "make,model,model_year,variant,co2_g_per_mile\n";
    auto row = [&](const VehicleKey& key, std::string_view variant, double rate) {
        out += fmt::format("{},{},{},{},{:.4f}\n", key.make, key.model, key.model_year, variant, rate);
    };
    for (const auto& t : types) {
        const int n    = variants(rng);
        const double d = delta(rng);
        if (n == 1) {
            row(t.key, "v1", t.rate);
        } else if (n == 2) {
            row(t.key, "v1", t.rate - d);
            row(t.key, "v2", t.rate + d);
        } else {
            row(t.key, "v1", t.rate - d);
            row(t.key, "v2", t.rate);
            row(t.key, "v3", t.rate + d);
        }
    }
    row(kCalibrationVehicles[0], "1.8L-M5", 188.0);
    row(kCalibrationVehicles[0], "1.8L-A4", 192.0);
    row(kCalibrationVehicles[1], "1.8L-M6", 194.0);
    row(kCalibrationVehicles[2], "2.0L-M5", 195.0);
    row(kCalibrationVehicles[2], "2.0L-A4", 199.0);
    return out;
}

std::string fleet_csv(const std::vector<SynthType>& types)
{
    std::string out = "make,model,model_year,weight\n";
    for (std::size_t i = 0; i < types.size(); ++i) {
        const auto& t = types[i];
        if (i == 0) {
            // Same vehicle reported twice; the loader sums the weights.
            const double first = std::floor(t.weight / 3.0);
            out += fmt::format("{},{},{},{}\n", t.key.make, t.key.model, t.key.model_year, first);
            out += fmt::format("{},{},{},{}\n", t.key.make, t.key.model, t.key.model_year, t.weight - first);
            continue;
        }
        out += fmt::format("{},{},{},{}\n", t.key.make, t.key.model, t.key.model_year, t.weight);
    }
    // Rows the loader drops: no EPA match, and outside the model-year window.
    out += "Oldsmobile,Alero,2003,1850\n";
    out += "Plymouth,Neon,2001,940\n";
    out += "Ford,Taurus,1998,2210\n";
    out += "Tesla,Model3,2019,610\n";
    return out;
}

std::string monthly_vmt_csv()
{
    std::string out = "month,vmt_million_miles\n";
    for (int m = 0; m < 12; ++m) {
        out += fmt::format("{},{}\n", m + 1, kMonthlyVmt[m]);
    }
    return out;
}

std::map<OdPair, double> michigan_od_weights()
{
    const std::vector<std::pair<std::string, double>> cities{{"Detroit", 4.3}, {"GrandRapids", 1.1}, {"Lansing", 0.5}, {"Flint", 0.4}, {"AnnArbor", 0.37}, {"Kalamazoo", 0.34}, {"Saginaw", 0.19}, {"TraverseCity", 0.15}};
    std::map<OdPair, double> weights;
    for (std::size_t i = 0; i < cities.size(); ++i) {
        for (std::size_t j = 0; j < cities.size(); ++j) {
            const auto gap = i > j ? i - j : j - i;
            if (i != j && gap <= 3) {
                weights[OdPair{cities[i].first, cities[j].first}] = std::round(100.0 * cities[i].second * cities[j].second / static_cast<double>(gap)) / 100.0;
            }
        }
    }
    return weights;
}

// Micro CO₂ grams per mile of the synthetic store.
double micro_grams_per_mile(const SyntheticSource& source, const CoefficientTable& table)
{
    const auto store = generate_fleet_of_trips(source.n_trips, source.od_weights, source.mix, source.seed, default_thread_count());
    double grams = 0.0, miles = 0.0;
    for (std::size_t i = 0; i < store.size(); ++i) {
        grams += trajectory_emission(store[i], table, VehicleCategory::PetrolCar, "CO2");
        miles += store.distance(i);
    }
    return grams / miles;
}

RunConfig common_config()
{
    RunConfig cfg;
    cfg.coefficients        = "coefficients.csv";
    cfg.fleet_csv           = "fleet.csv";
    cfg.epa_csv             = "epa.csv";
    cfg.fleet.analysis_year = kAnalysisYear;
    cfg.fleet.first_model_year     = kFirstModelYear;
    cfg.fleet.last_model_year      = kLastModelYear;
    cfg.fleet.calibration_vehicles = kCalibrationVehicles;
    cfg.tech_scenarios_csv         = "tech_scenarios.csv";
    return cfg;
}

void michigan(const fs::path& dir)
{
    std::mt19937_64 rng(20200101);
    const auto types = michigan_types(rng);

    write(dir / "coefficients.csv", kCoefficients);
    write(dir / "epa.csv", epa_csv(types, rng));
    write(dir / "fleet.csv", fleet_csv(types));
    write(dir / "monthly_vmt.csv", monthly_vmt_csv());
    write(dir / "tech_scenarios.csv", kTechScenarios);

    SyntheticSource source;
    source.n_trips                     = 10000;
    source.seed                        = 7;
    source.od_weights                  = michigan_od_weights();
    source.mix.profile.target_distance = 3.0;
    source.mix.profile.n_stops         = 2;
    source.mix.profile.noise_amp       = 0.4;
    source.mix.distance_jitter         = 0.5;
    source.mix.speed_jitter            = 0.15;
    source.mix.vary_stops              = true;

    // Cruise speed such that micro base annual lands on the target once
    // scaled to the monthly VMT column.
    const auto table         = CoefficientTable::from_csv(kCoefficients);
    const double annualMiles = std::accumulate(kMonthlyVmt.begin(), kMonthlyVmt.end(), 0.0) * 1e6;
    const double target      = kTargetMicroAnnualMt * 1e12 / annualMiles;
    double lo = 10.0, hi = 25.0;
    for (int i = 0; i < 30; ++i) {
        source.mix.profile.cruise_speed = 0.5 * (lo + hi);
        (micro_grams_per_mile(source, table) > target ? lo : hi) = source.mix.profile.cruise_speed;
    }
    source.mix.profile.cruise_speed = std::round(0.5 * (lo + hi) * 1e4) / 1e4;
    std::cout << fmt::format("cruise speed {} m/s -> {:.3f} g/mile (target {:.3f})\n", source.mix.profile.cruise_speed, micro_grams_per_mile(source, table), target);

    auto cfg                   = common_config();
    cfg.seed                   = 2020;
    cfg.out                    = "../../out/michigan";
    cfg.trajectories.synthetic = source;
    cfg.demand.monthly_vmt_csv = "monthly_vmt.csv";
    write(dir / "config.json", cfg.to_json().dump(2) + "\n");
}

void desk(const fs::path& dir)
{
    const std::vector<NodeId> nodes{"Alpena", "Cadillac", "Gaylord", "Petoskey"};
    std::map<OdPair, double> weights;
    for (const auto& o : nodes) {
        for (const auto& d : nodes) {
            if (o != d) {
                weights[OdPair{o, d}] = 1.0;
            }
        }
    }

    TripMix mix;
    mix.profile.cruise_speed    = 22.0;
    mix.profile.target_distance = 1.5;
    mix.profile.n_stops         = 1;
    mix.profile.noise_amp       = 0.3;
    mix.distance_jitter         = 0.3;
    mix.vary_stops              = true;
    const auto store            = generate_fleet_of_trips(30, weights, mix, 11, 1);

    // Two zones per node plus one urban zone.
    std::string zones = "zone_id,node_id\n";
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        zones += fmt::format("Z{:02d},{}\nZ{:02d},{}\n", 2 * i + 1, nodes[i], 2 * i + 2, nodes[i]);
    }
    zones += "Z90,URBAN\n";

    auto zoneOf = [&](const NodeId& node, std::size_t salt) {
        const auto i = static_cast<std::size_t>(std::find(nodes.begin(), nodes.end(), node) - nodes.begin());
        return fmt::format("Z{:02d}", 2 * i + 1 + salt % 2);
    };

    std::string trajectories = "trip_id,origin_zone,dest_zone,t,v,a\n";
    auto emit = [&](const Trajectory& traj, const std::string& origin, const std::string& destination) {
        for (const auto& p : traj.points) {
            trajectories += fmt::format("{},{},{},{},{:.4f},{:.4f}\n", traj.trip_id, origin, destination, p.t, p.v, p.a.value_or(0.0));
        }
    };
    for (std::size_t i = 0; i < store.size(); ++i) {
        emit(store[i], zoneOf(store[i].od.origin, i), zoneOf(store[i].od.destination, i / 2));
    }
    for (int u = 0; u < 3; ++u) {
        ProfileSpec urban;
        urban.cruise_speed    = 12.0;
        urban.target_distance = 0.8;
        urban.seed            = static_cast<std::uint64_t>(u);
        const auto tripId     = fmt::format("U{:03d}", u + 1);
        emit(generate_trajectory(urban, tripId, OdPair{"URBAN", "URBAN"}), "Z90", u == 0 ? "Z90" : zoneOf(nodes[static_cast<std::size_t>(u)], 0));
    }

    const auto fixture = synthesize_station_fixture(store.od_pairs(), 2, [] {
        std::array<double, 12> level{};
        const double mean = std::accumulate(kMonthlyVmt.begin(), kMonthlyVmt.end(), 0.0) / 12.0;
        for (int m = 0; m < 12; ++m) {
            level[m] = kMonthlyVmt[m] / mean;
        }
        return level;
    }(), 5);

    std::string fleet = "make,model,model_year,weight\n";
    std::string epa   = "make,model,model_year,variant,co2_g_per_mile\n";
    const std::vector<std::tuple<std::string, std::string, int, double, double>> vehicles{
        {"Chevrolet", "Malibu", 2006, 310, 292.5},
        {"Chevrolet", "Impala", 2008, 260, 301.0},
        {"Ford", "Focus", 2012, 420, 231.0},
        {"Ford", "F150", 2009, 380, 412.0},
        {"Honda", "Civic", 2015, 510, 204.5},
        {"Honda", "Accord", 2011, 330, 248.0},
        {"Toyota", "Camry", 2014, 450, 236.0},
        {"Jeep", "Liberty", 2007, 190, 371.0},
        {"Dodge", "Caravan", 2010, 240, 336.0},
        {"Nissan", "Altima", 2016, 290, 221.5},
    };
    for (const auto& [make, model, year, weight, rate] : vehicles) {
        fleet += fmt::format("{},{},{},{}\n", make, model, year, weight);
        epa += fmt::format("{},{},{},v1,{}\n{},{},{},v2,{}\n", make, model, year, rate - 4.0, make, model, year, rate + 4.0);
    }
    epa += "Toyota,Corolla,2005,1.8L-M5,188\nToyota,Corolla,2005,1.8L-A4,192\nToyota,Celica,2005,1.8L-M6,194\n"
           "Volkswagen,Golf,2005,2.0L-M5,195\nVolkswagen,Golf,2005,2.0L-A4,199\n";

    write(dir / "coefficients.csv", kCoefficients);
    write(dir / "tech_scenarios.csv", kTechScenarios);
    write(dir / "trajectories.csv", trajectories);
    write(dir / "zones.csv", zones);
    write(dir / "incidence.csv", fixture.incidence.to_csv());
    write(dir / "observations.csv", format_observations_csv(fixture.observations));
    write(dir / "fleet.csv", fleet);
    write(dir / "epa.csv", epa);

    auto cfg                    = common_config();
    cfg.seed                    = 99;
    cfg.out                     = "../../out/desk";
    cfg.trajectories.csv        = "trajectories.csv";
    cfg.trajectories.zones      = "zones.csv";
    cfg.trajectories.step       = 1.0;
    cfg.demand.incidence_csv    = "incidence.csv";
    cfg.demand.observations_csv = "observations.csv";
    cfg.scenarios.draws         = 5;
    write(dir / "config.json", cfg.to_json().dump(2) + "\n");
}

}

int main(int argc, char** argv)
{
    try {
        const fs::path root = argc > 1 ? argv[1] : "data";
        michigan(root / "michigan");
        desk(root / "desk");
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 1;
    }
    return 0;
}
