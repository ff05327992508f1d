#include "emitron/ev_scenarios.h"
#include "emitron/error.h"
#include "emitron/parallel.h"
#include "emitron/seeding.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace emitron {

std::string_view to_string(ScenarioKind kind) noexcept
{
    switch (kind) {
    case ScenarioKind::Random: return "random";
    case ScenarioKind::OldRandom: return "old_random";
    case ScenarioKind::OldPessimistic: return "old_pessimistic";
    case ScenarioKind::OldOptimistic: return "old_optimistic";
    case ScenarioKind::Oldest: return "oldest";
    }
    return "unknown";
}

const std::array<ScenarioKind, 5>& all_scenario_kinds() noexcept
{
    static const std::array<ScenarioKind, 5> kinds{ScenarioKind::Random, ScenarioKind::OldRandom, ScenarioKind::OldPessimistic, ScenarioKind::OldOptimistic, ScenarioKind::Oldest};
    return kinds;
}

ScenarioKind parse_scenario_kind(std::string_view text)
{
    for (auto kind : all_scenario_kinds()) {
        if (to_string(kind) == text) {
            return kind;
        }
    }
    throw ValidationError("Unknown adoption scenario '{}'", text);
}

void ScenarioSpec::validate() const
{
    if (!(market_share > 0.0 && market_share <= 1.0)) {
        throw ValidationError("Market share must be in (0, 1], got {}", market_share);
    }
    if (!(age_threshold >= 0.0)) {
        throw ValidationError("Age threshold must be non-negative, got {}", age_threshold);
    }
}

std::size_t target_trip_count(double share, std::size_t nTrips)
{
    return static_cast<std::size_t>(std::floor(share * static_cast<double>(nTrips) + 0.5));
}

std::vector<std::size_t> selection_order(const TrajectoryStore& store, const TypeAssignment& assignment, const FleetRegistry& registry, ScenarioKind kind, double ageThreshold, std::uint64_t seed)
{
    struct Candidate
    {
        std::size_t trip = 0;
        int age          = 0;
        double rate      = 0.0;
        std::uint64_t tie = 0;
        double key       = 0.0;
    };

    std::vector<Candidate> candidates;
    candidates.reserve(store.size());
    const bool oldOnly = kind == ScenarioKind::OldRandom || kind == ScenarioKind::OldPessimistic || kind == ScenarioKind::OldOptimistic;
    for (std::size_t i = 0; i < store.size(); ++i) {
        const auto type = assignment.at(store[i].trip_id);
        const int age   = registry.age(type);
        if (oldOnly && !(age > ageThreshold)) {
            continue;
        }
        candidates.push_back(Candidate{i, age, registry.type(type).epa_rate, keyed_seed(seed, store[i].trip_id), 0.0});
    }

    switch (kind) {
    case ScenarioKind::Random:
    case ScenarioKind::OldRandom:
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& lhs, const Candidate& rhs) {
            return std::tie(lhs.tie, lhs.trip) < std::tie(rhs.tie, rhs.trip);
        });
        break;
    case ScenarioKind::Oldest:
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& lhs, const Candidate& rhs) {
            return std::tuple(-lhs.age, lhs.tie, lhs.trip) < std::tuple(-rhs.age, rhs.tie, rhs.trip);
        });
        break;
    case ScenarioKind::OldPessimistic:
    case ScenarioKind::OldOptimistic: {
        // Rank inside each age cohort, then interleave cohorts by relative
        // rank so every prefix takes a cohort-proportional quota.
        const double sign = kind == ScenarioKind::OldOptimistic ? -1.0 : 1.0;
        std::map<int, std::vector<Candidate*>> cohorts;
        for (auto& c : candidates) {
            cohorts[c.age].push_back(&c);
        }
        for (auto& [age, members] : cohorts) {
            std::sort(members.begin(), members.end(), [sign](const Candidate* lhs, const Candidate* rhs) {
                return std::tuple(sign * lhs->rate, lhs->tie, lhs->trip) < std::tuple(sign * rhs->rate, rhs->tie, rhs->trip);
            });
            const double size = static_cast<double>(members.size());
            for (std::size_t rank = 0; rank < members.size(); ++rank) {
                members[rank]->key = (static_cast<double>(rank) + 0.5) / size;
            }
        }
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& lhs, const Candidate& rhs) {
            return std::tie(lhs.key, lhs.tie, lhs.trip) < std::tie(rhs.key, rhs.tie, rhs.trip);
        });
        break;
    }
    }

    std::vector<std::size_t> order;
    order.reserve(candidates.size());
    for (const auto& c : candidates) {
        order.push_back(c.trip);
    }
    return order;
}

ReplacementSet select_replaced(const TrajectoryStore& store, const TypeAssignment& assignment, const FleetRegistry& registry, const ScenarioSpec& spec)
{
    spec.validate();

    const auto order = selection_order(store, assignment, registry, spec.kind, spec.age_threshold, spec.seed);

    ReplacementSet set;
    set.kind         = spec.kind;
    set.target_share = spec.market_share;
    set.target_count = target_trip_count(spec.market_share, store.size());
    set.shortfall    = order.size() < set.target_count;

    const auto count = std::min(order.size(), set.target_count);
    set.trip_ids.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        set.trip_ids.push_back(store[order[i]].trip_id);
    }
    set.achieved_share = store.empty() ? 0.0 : static_cast<double>(count) / static_cast<double>(store.size());
    return set;
}

double scenario_savings(const TripLedger& ledger, const MonthlyScaling& scaling, const ReplacementSet& replacement, const EstimatorVariant& variant)
{
    double grams = 0.0;
    for (const auto& tripId : replacement.trip_ids) {
        auto trip = ledger.index_of(tripId);
        if (!trip) {
            throw ValidationError("Replacement set references unknown trip '{}'", tripId);
        }
        grams += ledger.trip_daily(*trip, variant) * scaling.annual(ledger.od_of_trip(*trip), variant.temp_adjusted);
    }
    return grams / 1e12;
}

std::vector<SavingsCell> run_scenario_suite(const TrajectoryStore& store, const TypeAssignment& assignment, const FleetRegistry& registry, const TripLedger& ledger, const MonthlyScaling& scaling, const ScenarioSuiteOptions& options)
{
    if (options.n_draws == 0) {
        throw ValidationError("Scenario suite needs at least one draw");
    }
    for (double share : options.shares) {
        ScenarioSpec{ScenarioKind::Random, share, options.age_threshold, 0}.validate();
    }

    const auto nKinds    = options.kinds.size();
    const auto nVariants = options.variants.size();
    const auto nShares   = options.shares.size();

    // Annual Mt of every trip under every requested variant.
    std::vector<std::vector<double>> tripAnnual(nVariants, std::vector<double>(store.size()));
    for (std::size_t v = 0; v < nVariants; ++v) {
        const auto& variant = options.variants[v];
        for (std::size_t i = 0; i < store.size(); ++i) {
            tripAnnual[v][i] = ledger.trip_daily(i, variant) * scaling.annual(ledger.od_of_trip(i), variant.temp_adjusted) / 1e12;
        }
    }

    // savings[kind][draw][share][variant]
    std::vector<std::vector<std::vector<std::vector<double>>>> savings(nKinds, std::vector<std::vector<std::vector<double>>>(options.n_draws, std::vector<std::vector<double>>(nShares, std::vector<double>(nVariants, 0.0))));
    std::vector<std::size_t> poolSize(nKinds, 0);

    parallel_for(nKinds * options.n_draws, options.threads, [&](std::size_t job) {
        const auto k    = job / options.n_draws;
        const auto draw = job % options.n_draws;
        const auto seed = keyed_seed(options.master_seed, static_cast<std::uint64_t>(draw));
        const auto order = selection_order(store, assignment, registry, options.kinds[k], options.age_threshold, seed);
        if (draw == 0) {
            poolSize[k] = order.size();
        }

        for (std::size_t v = 0; v < nVariants; ++v) {
            std::vector<double> prefix(order.size() + 1, 0.0);
            for (std::size_t i = 0; i < order.size(); ++i) {
                prefix[i + 1] = prefix[i] + tripAnnual[v][order[i]];
            }
            for (std::size_t s = 0; s < nShares; ++s) {
                const auto count          = std::min(order.size(), target_trip_count(options.shares[s], store.size()));
                savings[k][draw][s][v]    = prefix[count];
            }
        }
    });

    std::vector<SavingsCell> cells;
    for (std::size_t s = 0; s < nShares; ++s) {
        const auto target = target_trip_count(options.shares[s], store.size());
        for (std::size_t k = 0; k < nKinds; ++k) {
            for (std::size_t v = 0; v < nVariants; ++v) {
                SavingsCell cell;
                cell.share          = options.shares[s];
                cell.kind           = options.kinds[k];
                cell.variant        = options.variants[v];
                cell.shortfall      = poolSize[k] < target;
                cell.achieved_share = static_cast<double>(std::min(poolSize[k], target)) / static_cast<double>(store.size());
                for (std::size_t d = 0; d < options.n_draws; ++d) {
                    cell.draws.push_back(savings[k][d][s][v]);
                }
                cell.mean = std::accumulate(cell.draws.begin(), cell.draws.end(), 0.0) / static_cast<double>(cell.draws.size());
                cell.min  = *std::min_element(cell.draws.begin(), cell.draws.end());
                cell.max  = *std::max_element(cell.draws.begin(), cell.draws.end());
                cells.push_back(std::move(cell));
            }
        }
    }
    return cells;
}

std::string format_scenario_csv(std::span<const SavingsCell> cells)
{
    std::string out = "share,scenario,variant,mean_savings_mt,min,max,n_draws\n";
    for (const auto& cell : cells) {
        out += fmt::format("{},{},{},{:.6f},{:.6f},{:.6f},{}\n", cell.share, to_string(cell.kind), cell.variant.name(), cell.mean, cell.min, cell.max, cell.draws.size());
    }
    return out;
}

std::string format_scenario_plot_csv(std::span<const SavingsCell> cells)
{
    std::string out = "share,scenario,variant,draw,savings_mt\n";
    for (const auto& cell : cells) {
        for (std::size_t d = 0; d < cell.draws.size(); ++d) {
            out += fmt::format("{},{},{},{},{:.6f}\n", cell.share, to_string(cell.kind), cell.variant.name(), d, cell.draws[d]);
        }
    }
    return out;
}

}
