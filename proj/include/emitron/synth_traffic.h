#pragma once

#include "emitron/trajectory_store.h"

#include <cstdint>
#include <map>

namespace emitron {

struct ProfileSpec
{
    double cruise_speed    = 26.8224; // m/s
    double accel_rate      = 1.0;     // m/s²
    double decel_rate      = 1.5;     // m/s², magnitude
    double target_distance = 10.0;    // miles
    int n_stops            = 0;
    double noise_amp       = 0.0; // m/s
    std::uint64_t seed     = 0;

    void validate() const;
};

// Per-trip variation applied by generate_fleet_of_trips on top of a profile.
struct TripMix
{
    ProfileSpec profile;
    double distance_jitter = 0.0; // target distance scaled by U(1-j, 1+j)
    double speed_jitter    = 0.0; // cruise speed scaled by U(1-j, 1+j)
    bool vary_stops        = false; // stops drawn uniformly from 0..profile.n_stops
    double a_max           = kDefaultAccelBound;
};

// Accelerate, cruise and decelerate over n_stops + 1 equal-distance legs,
// sampled at 1 s. Noise is added to moving samples and acceleration is
// re-derived. Output depends only on (spec, tripId, od).
Trajectory generate_trajectory(const ProfileSpec& spec, const TripId& tripId, const OdPair& od, double aMax = kDefaultAccelBound);

// OD pairs are drawn proportional to `odWeights`; every random choice for a
// trip comes from a stream keyed by (masterSeed, trip_id).
TrajectoryStore generate_fleet_of_trips(std::size_t nTrips, const std::map<OdPair, double>& odWeights, const TripMix& mix, std::uint64_t masterSeed, unsigned threads = 1);

// Zero padded trip id such that lexical order equals numeric order.
TripId synthetic_trip_id(std::size_t index, std::size_t nTrips);

}
