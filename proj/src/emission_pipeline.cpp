#include "emitron/emission_pipeline.h"
#include "emitron/error.h"
#include "emitron/parallel.h"

#include <json.hpp>

namespace emitron {

namespace {

constexpr double kGramsPerMegaton = 1e12;

}

std::string EstimatorVariant::name() const
{
    std::string result = basis == Basis::MacroEpa ? "epa" : "micro";
    if (!temp_adjusted && !type_adjusted) {
        return result + "_base";
    }
    if (type_adjusted) {
        result += "_type";
    }
    if (temp_adjusted) {
        result += "_temp";
    }
    return result;
}

EstimatorVariant EstimatorVariant::parse(std::string_view name)
{
    for (const auto& variant : all()) {
        if (variant.name() == name) {
            return variant;
        }
    }
    throw ValidationError("Unknown estimator variant '{}'", name);
}

std::size_t EstimatorVariant::column() const noexcept
{
    return (basis == Basis::Micro ? 4 : 0) + (type_adjusted ? 2 : 0) + (temp_adjusted ? 1 : 0);
}

const std::array<EstimatorVariant, 8>& EstimatorVariant::all() noexcept
{
    static const std::array<EstimatorVariant, 8> variants{{
        {Basis::MacroEpa, false, false},
        {Basis::MacroEpa, true, false},
        {Basis::MacroEpa, false, true},
        {Basis::MacroEpa, true, true},
        {Basis::Micro, false, false},
        {Basis::Micro, true, false},
        {Basis::Micro, false, true},
        {Basis::Micro, true, true},
    }};
    return variants;
}

OdDaily macro_daily(const TrajectoryStore& store, double gamma)
{
    OdDaily daily;
    daily.per_od.reserve(store.od_pairs().size());
    for (std::size_t od = 0; od < store.od_pairs().size(); ++od) {
        double distance = 0.0;
        for (auto trip : store.group(od)) {
            distance += store.distance(trip);
        }
        daily.per_od.push_back(gamma * distance);
        daily.total += daily.per_od.back();
    }
    return daily;
}

double macro_monthly(double dailyGrams, const MonthProfile& month, double phi, const EstimatorVariant& variant, double gamma, double fleetMeanRate)
{
    double value = dailyGrams;
    if (variant.type_adjusted) {
        value *= fleetMeanRate / gamma;
    }
    value *= month.n_days * phi;
    if (variant.temp_adjusted) {
        value *= month.temp_factor;
    }
    return value;
}

TripLedger::TripLedger(const TrajectoryStore& store, std::vector<TripEvaluation> trips, double gamma, double fleetMeanRate, double baselineRate)
: _trips(std::move(trips))
, _odPairs(store.od_pairs())
, _gamma(gamma)
, _fleetMeanRate(fleetMeanRate)
, _baselineRate(baselineRate)
{
    if (_trips.size() != store.size()) {
        throw RuntimeError("Trip ledger size {} does not match store size {}", _trips.size(), store.size());
    }

    _tripIds.reserve(store.size());
    _odOfTrip.reserve(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
        _tripIds.push_back(store[i].trip_id);
        _odOfTrip.push_back(store.od_index(i));
        _index.emplace(store[i].trip_id, i);
    }

    for (std::size_t od = 0; od < _odPairs.size(); ++od) {
        auto members = store.group(od);
        _groups.emplace_back(members.begin(), members.end());

        double distance = 0.0;
        double rated    = 0.0;
        for (auto trip : members) {
            distance += _trips[trip].distance;
            rated += _trips[trip].distance * _trips[trip].epa_rate;
        }
        _typeAttribution.push_back(rated > 0.0 ? _fleetMeanRate * distance / rated : 0.0);
    }
}

std::optional<std::size_t> TripLedger::index_of(const TripId& tripId) const
{
    if (auto iter = _index.find(tripId); iter != _index.end()) {
        return iter->second;
    }
    return {};
}

OdDaily TripLedger::od_daily(const EstimatorVariant& variant) const
{
    OdDaily daily;
    daily.per_od.reserve(_odPairs.size());
    for (std::size_t od = 0; od < _odPairs.size(); ++od) {
        double sum = 0.0;
        if (variant.basis == Basis::MacroEpa) {
            for (auto trip : _groups[od]) {
                sum += _trips[trip].distance;
            }
            sum *= variant.type_adjusted ? _fleetMeanRate : _gamma;
        } else {
            for (auto trip : _groups[od]) {
                sum += _trips[trip].micro_grams * (variant.type_adjusted ? _trips[trip].mu : 1.0);
            }
        }
        daily.per_od.push_back(sum);
        daily.total += sum;
    }
    return daily;
}

double TripLedger::trip_daily(std::size_t trip, const EstimatorVariant& variant) const
{
    const auto& t = _trips[trip];
    if (variant.basis == Basis::Micro) {
        return t.micro_grams * (variant.type_adjusted ? t.mu : 1.0);
    }
    if (variant.type_adjusted) {
        return t.distance * t.epa_rate * _typeAttribution[_odOfTrip[trip]];
    }
    return t.distance * _gamma;
}

TripLedger evaluate_trips(const TrajectoryStore& store, const TypeAssignment& assignment, const FleetRegistry& registry, const CoefficientTable& table, const EmissionModel& model, unsigned threads)
{
    if (store.empty()) {
        throw ValidationError("Cannot evaluate an empty trajectory store");
    }

    std::vector<TripEvaluation> trips(store.size());
    parallel_for(store.size(), threads, [&](std::size_t i) {
        const auto& traj = store[i];
        auto& eval       = trips[i];
        eval.distance    = store.distance(i);
        eval.micro_grams = trajectory_emission(traj, table, model.category, model.pollutant);
        eval.type        = assignment.at(traj.trip_id);
        eval.epa_rate    = registry.type(eval.type).epa_rate;
        eval.mu          = registry.factor(eval.type);
    });

    const auto stats = fleet_weighted_stats(registry);
    return TripLedger(store, std::move(trips), model.gamma, stats.mean_rate, registry.baseline_rate());
}

OdDaily micro_daily(const TrajectoryStore& store, const TypeAssignment& assignment, const FleetRegistry& registry, const CoefficientTable& table, const EmissionModel& model, bool typeAdjusted, unsigned threads)
{
    const auto ledger = evaluate_trips(store, assignment, registry, table, model, threads);
    return ledger.od_daily(EstimatorVariant{Basis::Micro, false, typeAdjusted});
}

MonthlyScaling::MonthlyScaling(const YearProfile& months, const DemandFactors& factors, std::span<const OdPair> ods)
: _months(months)
{
    _phi.reserve(ods.size());
    for (const auto& od : ods) {
        std::array<double, 12> row{};
        for (std::size_t m = 0; m < 12; ++m) {
            row[m] = factors.phi(od, months[m].month);
        }
        _phi.push_back(row);
    }
}

double MonthlyScaling::factor(std::size_t od, std::size_t monthIndex, bool temperature) const
{
    const auto& month = _months[monthIndex];
    double value      = month.n_days * _phi[od][monthIndex];
    if (temperature) {
        value *= month.temp_factor;
    }
    return value;
}

double MonthlyScaling::annual(std::size_t od, bool temperature) const
{
    double sum = 0.0;
    for (std::size_t m = 0; m < 12; ++m) {
        sum += factor(od, m, temperature);
    }
    return sum;
}

EmissionReport estimate_matrix(const TripLedger& ledger, const YearProfile& months, const DemandFactors& factors)
{
    EmissionReport report;
    report.months          = months;
    report.gamma           = ledger.gamma();
    report.fleet_mean_rate = ledger.fleet_mean_rate();
    report.baseline_rate   = ledger.baseline_rate();
    report.n_trips         = ledger.trips().size();

    const MonthlyScaling scaling(months, factors, ledger.od_pairs());
    const auto nOd = ledger.od_pairs().size();

    std::vector<double> odDistance(nOd, 0.0);
    for (std::size_t od = 0; od < nOd; ++od) {
        for (auto trip : ledger.group(od)) {
            odDistance[od] += ledger.trips()[trip].distance;
        }
    }

    for (std::size_t m = 0; m < 12; ++m) {
        double vmt = 0.0;
        for (std::size_t od = 0; od < nOd; ++od) {
            vmt += odDistance[od] * scaling.vmt_factor(od, m);
        }
        report.vmt_million[m] = vmt / 1e6;
        report.annual_vmt_million += report.vmt_million[m];
    }

    for (const auto& variant : EstimatorVariant::all()) {
        const auto daily = ledger.od_daily(variant);
        double annual    = 0.0;
        for (std::size_t m = 0; m < 12; ++m) {
            double grams = 0.0;
            for (std::size_t od = 0; od < nOd; ++od) {
                grams += daily.per_od[od] * scaling.factor(od, m, variant.temp_adjusted);
            }
            report.monthly_mt[m][variant.column()] = grams / kGramsPerMegaton;
            annual += report.monthly_mt[m][variant.column()];
        }
        report.annual_mt[variant.column()] = annual;
    }
    return report;
}

std::string format_report_csv(const EmissionReport& report)
{
    fmt::memory_buffer out;
    auto sink = std::back_inserter(out);

    fmt::format_to(sink, "# config_digest={}\n", report.config_digest);
    fmt::format_to(sink, "month,vmt_million_miles");
    for (const auto& variant : EstimatorVariant::all()) {
        fmt::format_to(sink, ",{}_mt", variant.name());
    }
    out.push_back('\n');

    for (std::size_t m = 0; m < 12; ++m) {
        fmt::format_to(sink, "{},{:.3f}", report.months[m].label, report.vmt_million[m]);
        for (double value : report.monthly_mt[m]) {
            fmt::format_to(sink, ",{:.6f}", value);
        }
        out.push_back('\n');
    }
    fmt::format_to(sink, "Annual,{:.3f}", report.annual_vmt_million);
    for (double value : report.annual_mt) {
        fmt::format_to(sink, ",{:.6f}", value);
    }
    out.push_back('\n');
    return fmt::to_string(out);
}

std::string format_report_json(const EmissionReport& report)
{
    nlohmann::ordered_json doc;
    doc["config_digest"]     = report.config_digest;
    doc["seed"]              = report.seed;
    doc["n_trips"]           = report.n_trips;
    doc["gamma_g_per_mile"]  = report.gamma;
    doc["fleet_mean_rate"]   = report.fleet_mean_rate;
    doc["baseline_rate"]     = report.baseline_rate;
    doc["annual_vmt_million"] = report.annual_vmt_million;

    auto& months = doc["months"];
    months       = nlohmann::ordered_json::array();
    for (std::size_t m = 0; m < 12; ++m) {
        nlohmann::ordered_json row;
        row["month"]              = report.months[m].label;
        row["n_days"]             = report.months[m].n_days;
        row["temp_factor"]        = report.months[m].temp_factor;
        row["vmt_million_miles"]  = report.vmt_million[m];
        for (const auto& variant : EstimatorVariant::all()) {
            row[variant.name()] = report.monthly(variant, m);
        }
        months.push_back(std::move(row));
    }

    auto& annual = doc["annual_mt"];
    for (const auto& variant : EstimatorVariant::all()) {
        annual[variant.name()] = report.annual(variant);
    }
    return doc.dump(2) + "\n";
}

std::string format_monthly_plot_csv(const EmissionReport& report)
{
    std::string out = "month,series,value\n";
    for (std::size_t m = 0; m < 12; ++m) {
        for (const auto& variant : EstimatorVariant::all()) {
            out += fmt::format("{},{},{:.6f}\n", report.months[m].label, variant.name(), report.monthly(variant, m));
        }
    }
    return out;
}

}
