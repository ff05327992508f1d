#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace emitron {

class CsvReader;

inline constexpr double kMetersPerMile        = 1609.344;
inline constexpr double kDefaultAccelBound    = 10.0; // m/s²
inline constexpr std::string_view kUrbanNode  = "URBAN";

using TripId = std::string;
using ZoneId = std::string;
using NodeId = std::string;

struct OdPair
{
    NodeId origin;
    NodeId destination;

    auto operator<=>(const OdPair&) const = default;

    // "origin->destination", used as od_id in CSV files.
    std::string label() const;
    static OdPair parse(std::string_view label);
};

struct TrajectoryPoint
{
    double t = 0.0;              // s
    double v = 0.0;              // m/s
    std::optional<double> a;     // m/s², absent until ingested or derived
};

struct Trajectory
{
    TripId trip_id;
    OdPair od;
    std::vector<TrajectoryPoint> points;
    double step = 1.0;                 // s
    std::vector<std::string> link_ids; // parallel to points, empty when not supplied
};

// Maps traffic analysis zones onto intercity nodes. Zones mapped to the
// URBAN sentinel, and zones without an entry, resolve to no node.
class ZoneClustering
{
public:
    ZoneClustering() = default;
    explicit ZoneClustering(std::map<ZoneId, NodeId> zoneToNode);

    static ZoneClustering load(const std::filesystem::path& path);
    static ZoneClustering read(CsvReader& csv);

    std::optional<NodeId> node_for(const ZoneId& zone) const;
    bool contains(const ZoneId& zone) const;
    bool empty() const noexcept { return _zoneToNode.empty(); }
    const std::map<ZoneId, NodeId>& mapping() const noexcept { return _zoneToNode; }

private:
    std::map<ZoneId, NodeId> _zoneToNode;
};

struct ValidationConfig
{
    ZoneClustering zones;
    double a_max = kDefaultAccelBound;
    // When unset, each trip's step is inferred from its first two samples.
    std::optional<double> step;
    // Treat zone ids as node ids when no clustering is supplied.
    bool identity_zones = false;
};

struct Rejection
{
    TripId trip_id;
    std::size_t line = 0; // first offending line, 0 when not line specific
    std::string reason;
};

struct IngestReport
{
    std::size_t total_trips   = 0;
    std::size_t accepted      = 0;
    std::size_t urban_dropped = 0;
    std::size_t unclustered   = 0; // subset of urban_dropped: zone had no clustering entry
    std::size_t rejected      = 0;
    std::vector<Rejection> rejections;
    std::vector<std::string> warnings;
};

// Immutable set of intercity trajectories sorted by trip_id and partitioned
// by OD pair.
class TrajectoryStore
{
public:
    TrajectoryStore() = default;
    explicit TrajectoryStore(std::vector<Trajectory> trajectories);

    std::span<const Trajectory> trajectories() const noexcept { return _trajectories; }
    const Trajectory& operator[](std::size_t index) const { return _trajectories[index]; }
    std::size_t size() const noexcept { return _trajectories.size(); }
    bool empty() const noexcept { return _trajectories.empty(); }

    std::optional<std::size_t> index_of(const TripId& tripId) const;

    // Trip distance in miles, cached at construction.
    double distance(std::size_t index) const { return _distances[index]; }

    const std::vector<OdPair>& od_pairs() const noexcept { return _odPairs; }
    // Index into od_pairs() of the group the trip belongs to.
    std::size_t od_index(std::size_t tripIndex) const { return _odOfTrip[tripIndex]; }
    // Trip indices of an OD group, ascending (i.e. trip_id order).
    std::span<const std::size_t> group(std::size_t odIndex) const { return _groups[odIndex]; }

private:
    std::vector<Trajectory> _trajectories;
    std::vector<double> _distances;
    std::vector<OdPair> _odPairs;
    std::vector<std::size_t> _odOfTrip;
    std::vector<std::vector<std::size_t>> _groups;
    std::unordered_map<TripId, std::size_t> _index;
};

struct IngestResult
{
    TrajectoryStore store;
    IngestReport report;
};

// Reads `trip_id,origin_zone,dest_zone,t,v[,a][,link_id]` rows. Malformed rows
// throw ValidationError naming the line; per-trip problems (non-uniform
// step, negative speed, acceleration bound) reject the trip and are listed
// in the report.
IngestResult ingest_trajectories(CsvReader& csv, const ValidationConfig& config);
IngestResult ingest_trajectory_file(const std::filesystem::path& path, const ValidationConfig& config);

// a_k = (v_{k+1} - v_k) / step, last point 0. Points that already carry an
// acceleration keep it.
Trajectory derive_acceleration(Trajectory trajectory);

// Rectangle rule over the speed samples, in miles.
double trip_distance(const Trajectory& trajectory);

struct VmtSummary
{
    std::map<OdPair, double> per_od; // miles, non-empty groups only
    double total = 0.0;
};

VmtSummary store_vmt(const TrajectoryStore& store);

// Writes the ingestion schema with the node ids as zone ids.
std::string format_trajectory_csv(const TrajectoryStore& store);

}
