#include "emitron/calendar_factors.h"
#include "emitron/csv.h"
#include "emitron/error.h"

#include "test_support.h"

#include <doctest.h>

#include <numeric>

using namespace emitron;
using doctest::Approx;

TEST_CASE("month_profile")
{
    const auto profile = month_profile();
    CHECK(profile[0].n_days == 31);
    CHECK(profile[0].temp_factor == 1.11);
    CHECK(profile[0].label == "Jan");
    CHECK(profile[1].n_days == 28);
    CHECK(profile[6].n_days == 31);
    CHECK(profile[6].temp_factor == 1.0);
    CHECK(profile[11].temp_factor == 1.11);
    CHECK(profile[3].temp_factor == 1.0);

    int days = 0;
    for (const auto& m : profile) {
        days += m.n_days;
    }
    CHECK(days == 365);

    CalendarConfig leap;
    leap.leap_year = true;
    CHECK(month_profile(leap)[1].n_days == 29);

    CalendarConfig bad;
    bad.temp_factors[4] = 0.0;
    CHECK_THROWS_AS(month_profile(bad), ValidationError);
}

TEST_CASE("estimate_monthly_factors")
{
    const OdPair ab{"A", "B"};
    const OdPair ba{"B", "A"};

    SUBCASE("single station")
    {
        OdStationIncidence incidence;
        incidence.add(ab, "S1", 1000.0);
        const std::vector<StationObservation> obs{{"S1", 1, 1200.0}};
        const auto fit = estimate_monthly_factors(incidence, obs, 1);
        CHECK(fit.phi.at(ab) == Approx(1.2));
        CHECK(fit.report.converged);
        CHECK(fit.report.iterations == 1);
        CHECK(fit.report.uncovered.empty());
    }

    SUBCASE("observed equals base is a fixed point")
    {
        OdStationIncidence incidence;
        incidence.add(ab, "S1", 400.0);
        incidence.add(ab, "S2", 100.0);
        incidence.add(ba, "S2", 300.0);
        const std::vector<StationObservation> obs{{"S1", 3, 400.0}, {"S2", 3, 400.0}};
        const auto fit = estimate_monthly_factors(incidence, obs, 3);
        CHECK(fit.phi.at(ab) == 1.0);
        CHECK(fit.phi.at(ba) == 1.0);
        CHECK(fit.report.iterations == 0);
    }

    SUBCASE("two ODs sharing a station")
    {
        OdStationIncidence incidence;
        incidence.add(ab, "S1", 100.0);
        incidence.add(ab, "S2", 20.0);
        incidence.add(ba, "S2", 90.0);
        const std::vector<StationObservation> obs{{"S1", 7, 1.3 * 100}, {"S2", 7, 1.3 * 20 + 0.8 * 90}};
        const auto fit = estimate_monthly_factors(incidence, obs, 7, IpfOptions{1e-10, 1000});
        CHECK(fit.report.converged);
        CHECK(fit.phi.at(ab) == Approx(1.3).epsilon(1e-6));
        CHECK(fit.phi.at(ba) == Approx(0.8).epsilon(1e-6));

        // Scaling every count scales every factor.
        std::vector<StationObservation> scaled = obs;
        for (auto& o : scaled) {
            o.volume *= 2.5;
        }
        const auto fitScaled = estimate_monthly_factors(incidence, scaled, 7, IpfOptions{1e-10, 1000});
        CHECK(fitScaled.phi.at(ab) == Approx(2.5 * fit.phi.at(ab)).epsilon(1e-6));
        CHECK(fitScaled.phi.at(ba) == Approx(2.5 * fit.phi.at(ba)).epsilon(1e-6));
    }

    SUBCASE("ODs crossing the same stations move together")
    {
        OdStationIncidence incidence;
        incidence.add(ab, "S1", 100.0);
        incidence.add(ab, "S2", 20.0);
        incidence.add(ba, "S1", 30.0);
        incidence.add(ba, "S2", 90.0);
        const std::vector<StationObservation> obs{{"S1", 7, 1.3 * 100 + 0.8 * 30}, {"S2", 7, 1.3 * 20 + 0.8 * 90}};
        const auto fit = estimate_monthly_factors(incidence, obs, 7);
        CHECK(fit.phi.at(ab) == fit.phi.at(ba));
        CHECK_FALSE(fit.report.converged);
    }

    SUBCASE("uncovered OD takes the network ratio")
    {
        OdStationIncidence incidence;
        incidence.add(ab, "S1", 1000.0);
        incidence.add(ba, "S9", 500.0);
        const std::vector<StationObservation> obs{{"S1", 2, 900.0}, {"S1", 3, 5000.0}};
        const auto fit = estimate_monthly_factors(incidence, obs, 2);
        REQUIRE(fit.report.uncovered.size() == 1);
        CHECK(fit.report.uncovered.front() == ba);
        CHECK(fit.phi.at(ba) == Approx(0.9));
        CHECK(fit.phi.at(ab) == Approx(0.9));
    }

    SUBCASE("iteration cap returns the best iterate")
    {
        OdStationIncidence incidence;
        incidence.add(ab, "S1", 100.0);
        incidence.add(ab, "S2", 100.0);
        // Inconsistent counts: no φ matches both stations.
        const std::vector<StationObservation> obs{{"S1", 1, 100.0}, {"S2", 1, 400.0}};
        const auto fit = estimate_monthly_factors(incidence, obs, 1, IpfOptions{1e-3, 5});
        CHECK_FALSE(fit.report.converged);
        // φ = 1 misses S2 by 75%; every later iterate (φ = 2) misses S1 by 100%.
        CHECK(fit.report.max_relative_residual == Approx(0.75));
        CHECK(fit.phi.at(ab) == 1.0);
    }

    SUBCASE("bad month")
    {
        CHECK_THROWS_AS(estimate_monthly_factors(OdStationIncidence{}, {}, 13), ValidationError);
    }
}

TEST_CASE("planted factors are recovered")
{
    std::vector<OdPair> ods;
    for (const char* o : {"A", "B", "C", "D"}) {
        for (const char* d : {"A", "B", "C", "D"}) {
            if (std::string_view(o) != d) {
                ods.push_back({o, d});
            }
        }
    }
    const std::array<double, 12> level{0.8, 0.82, 0.9, 0.95, 1.0, 1.1, 1.15, 1.12, 1.0, 0.97, 0.9, 0.85};
    const auto fixture = synthesize_station_fixture(ods, 3, level, 17);

    for (int m = 1; m <= 12; ++m) {
        const auto fit = estimate_monthly_factors(fixture.incidence, fixture.observations, m, IpfOptions{1e-9, 2000});
        CHECK(fit.report.converged);
        for (const auto& od : ods) {
            CHECK(fit.phi.at(od) == Approx(fixture.planted_phi.at({od, m})).epsilon(1e-5));
        }
    }
}

TEST_CASE("DemandFactors")
{
    const OdPair ab{"A", "B"};
    DemandFactors factors;
    CHECK(factors.phi(ab, 1) == 1.0);
    factors.set_global(1, 0.9);
    CHECK(factors.phi(ab, 1) == 0.9);
    factors.set(ab, 1, 1.2);
    CHECK(factors.phi(ab, 1) == 1.2);
    CHECK(factors.phi(OdPair{"B", "A"}, 1) == 0.9);
    CHECK_FALSE(factors.global(2).has_value());

    CHECK_THROWS_AS(factors.set(ab, 1, 0.0), ValidationError);
    CHECK_THROWS_AS(factors.set_global(0, 1.0), ValidationError);

    const auto dir  = test::scratch_dir("demand_factors");
    write_file_atomic(dir / "factors.csv", factors.to_csv());
    const auto back = DemandFactors::load(dir / "factors.csv");
    CHECK(back.to_csv() == factors.to_csv());
    CHECK(back.phi(ab, 1) == 1.2);
    CHECK(*back.global(1) == 0.9);
}

TEST_CASE("factors_from_monthly_vmt")
{
    const auto profile = month_profile();
    std::array<double, 12> vmt{};
    for (int m = 0; m < 12; ++m) {
        vmt[m] = profile[m].n_days * 2.0; // million miles
    }
    const auto factors = factors_from_monthly_vmt(vmt, 1e6, profile);
    for (int m = 1; m <= 12; ++m) {
        CHECK(*factors.global(m) == Approx(2.0));
    }
    CHECK_THROWS_AS(factors_from_monthly_vmt(vmt, 0.0, profile), ValidationError);
}

TEST_CASE("read_monthly_vmt")
{
    const auto dir = test::scratch_dir("monthly_vmt");
    std::string text = "month,vmt_million_miles\n";
    for (int m = 1; m <= 12; ++m) {
        text += fmt::format("{},{}\n", m, 100 + m);
    }
    write_file_atomic(dir / "ok.csv", text);
    const auto vmt = read_monthly_vmt(dir / "ok.csv");
    CHECK(vmt[0] == 101.0);
    CHECK(vmt[11] == 112.0);

    write_file_atomic(dir / "dup.csv", text + "3,5\n");
    CHECK_THROWS_AS(read_monthly_vmt(dir / "dup.csv"), ValidationError);
    write_file_atomic(dir / "short.csv", "month,vmt_million_miles\n1,3\n");
    CHECK_THROWS_AS(read_monthly_vmt(dir / "short.csv"), ValidationError);
    write_file_atomic(dir / "cols.csv", "month,vmt\n1,3\n");
    CHECK_THROWS_AS(read_monthly_vmt(dir / "cols.csv"), InputError);
}

TEST_CASE("station data round-trips")
{
    const std::vector<OdPair> ods{{"A", "B"}, {"B", "A"}};
    const std::array<double, 12> level{1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
    const auto fixture = synthesize_station_fixture(ods, 1, level, 3);
    const auto dir     = test::scratch_dir("stations");
    write_file_atomic(dir / "incidence.csv", fixture.incidence.to_csv());
    write_file_atomic(dir / "observations.csv", format_observations_csv(fixture.observations));
    CHECK(OdStationIncidence::load(dir / "incidence.csv").to_csv() == fixture.incidence.to_csv());
    CHECK(read_observations(dir / "observations.csv").size() == fixture.observations.size());
}
