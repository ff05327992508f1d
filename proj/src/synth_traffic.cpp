#include "emitron/synth_traffic.h"
#include "emitron/error.h"
#include "emitron/parallel.h"
#include "emitron/seeding.h"

#include <algorithm>
#include <cmath>
#include <random>

namespace emitron {

void ProfileSpec::validate() const
{
    if (!(cruise_speed > 0.0) || !(accel_rate > 0.0) || !(decel_rate > 0.0)) {
        throw ValidationError("Profile requires positive cruise speed, acceleration and deceleration rates");
    }
    if (!(noise_amp >= 0.0)) {
        throw ValidationError("Profile noise amplitude must be non-negative, got {}", noise_amp);
    }
    if (!(target_distance > 0.0)) {
        throw ValidationError("Profile target distance must be positive, got {}", target_distance);
    }
    if (n_stops < 0) {
        throw ValidationError("Profile stop count must be non-negative, got {}", n_stops);
    }
}

namespace {

struct Ramp
{
    std::vector<double> up;   // starts at 0, below cruise
    std::vector<double> down; // below cruise, ends at 0
    double upSum   = 0.0;
    double downSum = 0.0;
};

Ramp make_ramp(const ProfileSpec& spec)
{
    Ramp ramp;
    for (double v = 0.0; v < spec.cruise_speed; v += spec.accel_rate) {
        ramp.up.push_back(v);
        ramp.upSum += v;
    }
    for (double v = spec.cruise_speed - spec.decel_rate; v > 0.0; v -= spec.decel_rate) {
        ramp.down.push_back(v);
        ramp.downSum += v;
    }
    ramp.down.push_back(0.0);
    return ramp;
}

}

Trajectory generate_trajectory(const ProfileSpec& spec, const TripId& tripId, const OdPair& od, double aMax)
{
    spec.validate();

    const auto ramp        = make_ramp(spec);
    const int legs         = spec.n_stops + 1;
    const double legMeters = spec.target_distance * kMetersPerMile / legs;
    const double rampMeters = ramp.upSum + ramp.downSum;
    if (legMeters < rampMeters) {
        throw ValidationError("Target distance {} mi is too short for {} ramp cycle(s) of {:.1f} m each", spec.target_distance, legs, rampMeters);
    }
    const auto cruiseSamples = static_cast<std::size_t>(std::llround((legMeters - rampMeters) / spec.cruise_speed));

    std::vector<double> speeds;
    speeds.reserve(static_cast<std::size_t>(legs) * (ramp.up.size() + cruiseSamples + ramp.down.size()));
    for (int leg = 0; leg < legs; ++leg) {
        // The stop sample closing the previous leg doubles as this leg's start.
        speeds.insert(speeds.end(), ramp.up.begin() + (leg == 0 ? 0 : 1), ramp.up.end());
        speeds.insert(speeds.end(), cruiseSamples, spec.cruise_speed);
        speeds.insert(speeds.end(), ramp.down.begin(), ramp.down.end());
    }

    if (spec.noise_amp > 0.0) {
        std::mt19937_64 rng(keyed_seed(spec.seed, tripId));
        for (auto& v : speeds) {
            const double noise = spec.noise_amp * (2.0 * unit_interval(rng()) - 1.0);
            if (v > 0.0) {
                v = std::max(0.0, v + noise);
            }
        }
        for (std::size_t k = 1; k < speeds.size(); ++k) {
            speeds[k] = std::clamp(speeds[k], std::max(0.0, speeds[k - 1] - aMax), speeds[k - 1] + aMax);
        }
    }

    Trajectory traj;
    traj.trip_id = tripId;
    traj.od      = od;
    traj.step    = 1.0;
    traj.points.reserve(speeds.size());
    for (std::size_t k = 0; k < speeds.size(); ++k) {
        traj.points.push_back(TrajectoryPoint{static_cast<double>(k), speeds[k], std::nullopt});
    }
    return derive_acceleration(std::move(traj));
}

TripId synthetic_trip_id(std::size_t index, std::size_t nTrips)
{
    const auto width = std::max<std::size_t>(6, fmt::formatted_size("{}", nTrips));
    return fmt::format("T{:0{}}", index, width);
}

TrajectoryStore generate_fleet_of_trips(std::size_t nTrips, const std::map<OdPair, double>& odWeights, const TripMix& mix, std::uint64_t masterSeed, unsigned threads)
{
    if (nTrips == 0) {
        throw ValidationError("Cannot generate a fleet of zero trips");
    }
    mix.profile.validate();

    std::vector<OdPair> ods;
    std::vector<double> cumulative;
    double total = 0.0;
    for (const auto& [od, weight] : odWeights) {
        if (!(weight >= 0.0) || !std::isfinite(weight)) {
            throw ValidationError("OD weight for '{}' must be non-negative, got {}", od.label(), weight);
        }
        if (weight > 0.0) {
            total += weight;
            ods.push_back(od);
            cumulative.push_back(total);
        }
    }
    if (ods.empty()) {
        throw ValidationError("At least one OD weight must be positive");
    }

    std::vector<Trajectory> trips(nTrips);
    parallel_for(nTrips, threads, [&](std::size_t i) {
        const auto tripId = synthetic_trip_id(i, nTrips);
        std::mt19937_64 rng(keyed_seed(masterSeed, tripId));

        const double pick = unit_interval(rng()) * total;
        auto odIndex      = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
        odIndex           = std::min(odIndex, ods.size() - 1);

        ProfileSpec spec = mix.profile;
        spec.target_distance *= 1.0 + mix.distance_jitter * (2.0 * unit_interval(rng()) - 1.0);
        spec.cruise_speed *= 1.0 + mix.speed_jitter * (2.0 * unit_interval(rng()) - 1.0);
        const double stopDraw = unit_interval(rng());
        if (mix.vary_stops) {
            spec.n_stops = static_cast<int>(stopDraw * (mix.profile.n_stops + 1));
        }
        spec.seed = rng();

        trips[i] = generate_trajectory(spec, tripId, ods[odIndex], mix.a_max);
    });

    return TrajectoryStore(std::move(trips));
}

}
