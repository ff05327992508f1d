#include "emitron/trajectory_store.h"
#include "emitron/csv.h"
#include "emitron/error.h"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace emitron {

std::string OdPair::label() const
{
    return origin + "->" + destination;
}

OdPair OdPair::parse(std::string_view label)
{
    auto pos = label.find("->");
    if (pos == std::string_view::npos || pos == 0 || pos + 2 >= label.size()) {
        throw ValidationError("Invalid OD id '{}', expected 'origin->destination'", label);
    }
    return OdPair{std::string(label.substr(0, pos)), std::string(label.substr(pos + 2))};
}

ZoneClustering::ZoneClustering(std::map<ZoneId, NodeId> zoneToNode)
: _zoneToNode(std::move(zoneToNode))
{
}

ZoneClustering ZoneClustering::load(const std::filesystem::path& path)
{
    CsvReader csv(path);
    return read(csv);
}

ZoneClustering ZoneClustering::read(CsvReader& csv)
{
    const auto zoneCol = csv.required_column("zone_id");
    const auto nodeCol = csv.required_column("node_id");

    std::map<ZoneId, NodeId> mapping;
    while (csv.next()) {
        std::string zone(csv.field(zoneCol));
        std::string node(csv.field(nodeCol));
        if (zone.empty() || node.empty()) {
            throw ValidationError("{}:{}: empty zone or node id", csv.source_name(), csv.line_number());
        }
        if (!mapping.emplace(zone, node).second) {
            throw ValidationError("{}:{}: zone '{}' listed more than once", csv.source_name(), csv.line_number(), zone);
        }
    }
    return ZoneClustering(std::move(mapping));
}

std::optional<NodeId> ZoneClustering::node_for(const ZoneId& zone) const
{
    auto iter = _zoneToNode.find(zone);
    if (iter == _zoneToNode.end() || iter->second == kUrbanNode) {
        return {};
    }
    return iter->second;
}

bool ZoneClustering::contains(const ZoneId& zone) const
{
    return _zoneToNode.contains(zone);
}

TrajectoryStore::TrajectoryStore(std::vector<Trajectory> trajectories)
: _trajectories(std::move(trajectories))
{
    std::sort(_trajectories.begin(), _trajectories.end(), [](const Trajectory& lhs, const Trajectory& rhs) {
        return lhs.trip_id < rhs.trip_id;
    });

    std::map<OdPair, std::vector<std::size_t>> groups;
    _distances.reserve(_trajectories.size());
    for (std::size_t i = 0; i < _trajectories.size(); ++i) {
        const auto& traj = _trajectories[i];
        if (traj.points.empty()) {
            throw ValidationError("Trajectory '{}' has no points", traj.trip_id);
        }
        if (!_index.emplace(traj.trip_id, i).second) {
            throw ValidationError("Duplicate trip id '{}'", traj.trip_id);
        }
        _distances.push_back(trip_distance(traj));
        groups[traj.od].push_back(i);
    }

    _odOfTrip.resize(_trajectories.size());
    for (auto& [od, members] : groups) {
        for (auto tripIndex : members) {
            _odOfTrip[tripIndex] = _odPairs.size();
        }
        _odPairs.push_back(od);
        _groups.push_back(std::move(members));
    }
}

std::optional<std::size_t> TrajectoryStore::index_of(const TripId& tripId) const
{
    if (auto iter = _index.find(tripId); iter != _index.end()) {
        return iter->second;
    }
    return {};
}

Trajectory derive_acceleration(Trajectory trajectory)
{
    auto& points = trajectory.points;
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (points[k].a.has_value()) {
            continue;
        }
        if (k + 1 < points.size()) {
            points[k].a = (points[k + 1].v - points[k].v) / trajectory.step;
        } else {
            points[k].a = 0.0;
        }
    }
    return trajectory;
}

double trip_distance(const Trajectory& trajectory)
{
    double meters = 0.0;
    for (const auto& point : trajectory.points) {
        meters += point.v;
    }
    return meters * trajectory.step / kMetersPerMile;
}

VmtSummary store_vmt(const TrajectoryStore& store)
{
    VmtSummary summary;
    for (std::size_t od = 0; od < store.od_pairs().size(); ++od) {
        double sum = 0.0;
        for (auto tripIndex : store.group(od)) {
            sum += store.distance(tripIndex);
        }
        summary.per_od.emplace(store.od_pairs()[od], sum);
    }
    // Total is summed in trip_id order, independent of the grouping.
    for (std::size_t i = 0; i < store.size(); ++i) {
        summary.total += store.distance(i);
    }
    return summary;
}

namespace {

struct RawSample
{
    std::size_t line = 0;
    double t         = 0.0;
    double v         = 0.0;
    std::optional<double> a;
    std::string link;
};

struct RawTrip
{
    ZoneId originZone;
    ZoneId destZone;
    std::size_t firstLine = 0;
    std::optional<std::size_t> zoneConflictLine;
    bool hasLinks = false;
    std::vector<RawSample> samples;
};

std::optional<NodeId> resolve_zone(const ValidationConfig& config, const ZoneId& zone, bool& unclustered)
{
    if (config.identity_zones && config.zones.empty()) {
        return zone == kUrbanNode ? std::optional<NodeId>() : std::optional<NodeId>(zone);
    }
    if (!config.zones.contains(zone)) {
        unclustered = true;
        return {};
    }
    return config.zones.node_for(zone);
}

}

IngestResult ingest_trajectories(CsvReader& csv, const ValidationConfig& config)
{
    const auto tripCol   = csv.required_column("trip_id");
    const auto originCol = csv.required_column("origin_zone");
    const auto destCol   = csv.required_column("dest_zone");
    const auto timeCol   = csv.required_column("t");
    const auto speedCol  = csv.required_column("v");
    const auto accelCol  = csv.column_index("a");
    const auto linkCol   = csv.column_index("link_id");

    const auto requiredFields = std::max({tripCol, originCol, destCol, timeCol, speedCol}) + 1;

    std::map<TripId, RawTrip> rawTrips;
    while (csv.next()) {
        const auto line = csv.line_number();
        if (csv.field_count() < requiredFields || csv.field_count() > csv.header().size()) {
            throw ValidationError("{}:{}: malformed row, expected {} fields, found {}", csv.source_name(), line, csv.header().size(), csv.field_count());
        }

        std::string tripId(csv.field(tripCol));
        if (tripId.empty()) {
            throw ValidationError("{}:{}: malformed row, empty trip_id", csv.source_name(), line);
        }

        RawSample sample;
        sample.line = line;
        sample.t    = csv.to_double(timeCol);
        sample.v    = csv.to_double(speedCol);
        if (accelCol && csv.has_field(*accelCol)) {
            sample.a = csv.to_double(*accelCol);
        }
        if (linkCol && csv.has_field(*linkCol)) {
            sample.link = std::string(csv.field(*linkCol));
        }
        if (!std::isfinite(sample.t) || !std::isfinite(sample.v) || (sample.a && !std::isfinite(*sample.a))) {
            throw ValidationError("{}:{}: malformed row, non-finite value", csv.source_name(), line);
        }

        auto [iter, inserted] = rawTrips.try_emplace(tripId);
        auto& raw             = iter->second;
        const auto origin     = csv.field(originCol);
        const auto dest       = csv.field(destCol);
        if (inserted) {
            raw.originZone = std::string(origin);
            raw.destZone   = std::string(dest);
            raw.firstLine  = line;
        } else if ((raw.originZone != origin || raw.destZone != dest) && !raw.zoneConflictLine) {
            raw.zoneConflictLine = line;
        }
        raw.hasLinks = raw.hasLinks || !sample.link.empty();
        raw.samples.push_back(std::move(sample));
    }

    IngestResult result;
    auto& report = result.report;
    std::vector<Trajectory> accepted;

    auto reject = [&report](const TripId& tripId, std::size_t line, std::string reason) {
        ++report.rejected;
        report.rejections.push_back(Rejection{tripId, line, std::move(reason)});
    };

    for (auto& [tripId, raw] : rawTrips) {
        ++report.total_trips;

        if (raw.zoneConflictLine) {
            reject(tripId, *raw.zoneConflictLine, "origin/destination zones change within the trip");
            continue;
        }

        bool unclustered  = false;
        const auto origin = resolve_zone(config, raw.originZone, unclustered);
        const auto dest   = resolve_zone(config, raw.destZone, unclustered);
        if (unclustered) {
            ++report.unclustered;
            report.warnings.push_back(fmt::format("trip '{}': zone without clustering entry, treated as urban", tripId));
        }
        if (!origin || !dest || *origin == *dest) {
            ++report.urban_dropped;
            continue;
        }

        auto& samples = raw.samples;
        std::stable_sort(samples.begin(), samples.end(), [](const RawSample& lhs, const RawSample& rhs) { return lhs.t < rhs.t; });

        double step = config.step.value_or(samples.size() >= 2 ? samples[1].t - samples[0].t : 1.0);
        if (!(step > 0.0)) {
            reject(tripId, samples.size() >= 2 ? samples[1].line : raw.firstLine, fmt::format("non-positive time step {}", step));
            continue;
        }

        std::optional<Rejection> problem;
        const double stepTolerance = 1e-6 * std::max(1.0, step);
        for (std::size_t k = 0; k < samples.size() && !problem; ++k) {
            const auto& s = samples[k];
            if (k > 0 && std::abs((s.t - samples[k - 1].t) - step) > stepTolerance) {
                problem = Rejection{tripId, s.line, fmt::format("non-uniform time step at t={}", s.t)};
            } else if (s.v < 0.0) {
                problem = Rejection{tripId, s.line, fmt::format("negative speed {}", s.v)};
            } else if (s.a && std::abs(*s.a) > config.a_max) {
                problem = Rejection{tripId, s.line, fmt::format("acceleration {} exceeds bound {}", *s.a, config.a_max)};
            }
        }
        if (problem) {
            reject(problem->trip_id, problem->line, problem->reason);
            continue;
        }

        Trajectory traj;
        traj.trip_id = tripId;
        traj.od      = OdPair{*origin, *dest};
        traj.step    = step;
        traj.points.reserve(samples.size());
        for (const auto& s : samples) {
            traj.points.push_back(TrajectoryPoint{s.t, s.v, s.a});
        }
        if (raw.hasLinks) {
            traj.link_ids.reserve(samples.size());
            for (auto& s : samples) {
                traj.link_ids.push_back(std::move(s.link));
            }
        }
        if (traj.points.size() == 1) {
            report.warnings.push_back(fmt::format("trip '{}': single-point trajectory, acceleration set to 0", tripId));
        }

        traj = derive_acceleration(std::move(traj));
        for (std::size_t k = 0; k < traj.points.size() && !problem; ++k) {
            if (std::abs(*traj.points[k].a) > config.a_max) {
                problem = Rejection{tripId, samples[k].line, fmt::format("derived acceleration {} exceeds bound {}", *traj.points[k].a, config.a_max)};
            }
        }
        if (problem) {
            reject(problem->trip_id, problem->line, problem->reason);
            continue;
        }

        accepted.push_back(std::move(traj));
    }

    report.accepted = accepted.size();
    result.store    = TrajectoryStore(std::move(accepted));
    return result;
}

IngestResult ingest_trajectory_file(const std::filesystem::path& path, const ValidationConfig& config)
{
    CsvReader csv(path);
    return ingest_trajectories(csv, config);
}

std::string format_trajectory_csv(const TrajectoryStore& store)
{
    fmt::memory_buffer out;
    bool withLinks = false;
    for (const auto& traj : store.trajectories()) {
        withLinks = withLinks || !traj.link_ids.empty();
    }

    fmt::format_to(std::back_inserter(out), "trip_id,origin_zone,dest_zone,t,v,a{}\n", withLinks ? ",link_id" : "");
    for (const auto& traj : store.trajectories()) {
        for (std::size_t k = 0; k < traj.points.size(); ++k) {
            const auto& p = traj.points[k];
            fmt::format_to(std::back_inserter(out), "{},{},{},{},{},{}", traj.trip_id, traj.od.origin, traj.od.destination, p.t, p.v, p.a.value_or(0.0));
            if (withLinks) {
                fmt::format_to(std::back_inserter(out), ",{}", k < traj.link_ids.size() ? traj.link_ids[k] : std::string());
            }
            out.push_back('\n');
        }
    }
    return fmt::to_string(out);
}

}
