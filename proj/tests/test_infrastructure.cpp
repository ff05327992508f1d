#include "emitron/csv.h"
#include "emitron/error.h"
#include "emitron/parallel.h"
#include "emitron/run_config.h"
#include "emitron/seeding.h"

#include "test_support.h"

#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <numeric>

using namespace emitron;

TEST_CASE("CsvReader")
{
    SUBCASE("header, comments, blank lines and BOM")
    {
        auto csv = CsvReader::from_string("\xEF\xBB\xBF"
                                          "a,b\n# note\n\n1, 2.5\r\n3,4\n");
        CHECK(csv.header() == std::vector<std::string>{"a", "b"});
        REQUIRE(csv.next());
        CHECK(csv.line_number() == 4);
        CHECK(csv.to_int(0) == 1);
        CHECK(csv.to_double(1) == 2.5);
        REQUIRE(csv.next());
        CHECK(csv.field(0) == "3");
        CHECK_FALSE(csv.next());
    }

    SUBCASE("missing column is an input error")
    {
        auto csv = CsvReader::from_string("a,b\n1,2\n");
        CHECK_THROWS_AS(csv.required_column("c"), InputError);
        CHECK(csv.required_column("b") == 1);
    }

    SUBCASE("bad values name the line")
    {
        auto csv = CsvReader::from_string("a,b\n1,2\nx,3\n");
        REQUIRE(csv.next());
        REQUIRE(csv.next());
        CHECK_THROWS_WITH_AS(csv.to_double(0), doctest::Contains(":3:"), ValidationError);
        CHECK_THROWS_AS(csv.field(5), ValidationError);
    }

    SUBCASE("empty input")
    {
        CHECK_THROWS_AS(CsvReader::from_string(""), InputError);
        CHECK_THROWS_AS(CsvReader(fs::path("/nonexistent/file.csv")), InputError);
    }
}

TEST_CASE("number parsing")
{
    CHECK(parse_double("1e3") == 1000.0);
    CHECK(parse_double("+2.5") == 2.5);
    CHECK(parse_double(" -4 ") == -4.0);
    CHECK_FALSE(parse_double("4x").has_value());
    CHECK_FALSE(parse_double("").has_value());
    CHECK(parse_int("17") == 17);
    CHECK_FALSE(parse_int("1.5").has_value());
}

TEST_CASE("write_file_atomic leaves no temporary behind")
{
    const auto dir  = test::scratch_dir("atomic");
    const auto path = dir / "nested" / "out.csv";
    write_file_atomic(path, "x\n");
    write_file_atomic(path, "y\n");
    CHECK(read_file(path) == "y\n");
    CHECK_FALSE(fs::exists(dir / "nested" / "out.csv.tmp"));
}

TEST_CASE("keyed seeds")
{
    static_assert(keyed_seed(1, "T1") == keyed_seed(1, "T1"));
    CHECK(keyed_seed(1, "T1") != keyed_seed(1, "T2"));
    CHECK(keyed_seed(1, "T1") != keyed_seed(2, "T1"));
    CHECK(keyed_seed(1, std::uint64_t{0}) != keyed_seed(1, std::uint64_t{1}));
    CHECK(unit_interval(0) == 0.0);
    CHECK(unit_interval(~std::uint64_t{0}) < 1.0);
}

TEST_CASE("parallel_for")
{
    SUBCASE("slot results do not depend on the worker count")
    {
        std::vector<double> serial(1000), threaded(1000);
        parallel_for(serial.size(), 1, [&](std::size_t i) { serial[i] = std::sqrt(static_cast<double>(i)); });
        parallel_for(threaded.size(), 7, [&](std::size_t i) { threaded[i] = std::sqrt(static_cast<double>(i)); });
        CHECK(serial == threaded);
    }

    SUBCASE("every index runs once, more workers than items")
    {
        std::vector<std::atomic<int>> hits(3);
        parallel_for(hits.size(), 16, [&](std::size_t i) { ++hits[i]; });
        for (auto& h : hits) {
            CHECK(h == 1);
        }
    }

    SUBCASE("worker exceptions propagate")
    {
        CHECK_THROWS_AS(parallel_for(100, 4, [](std::size_t i) {
            if (i == 57) {
                throw ValidationError("bad item {}", i);
            }
        }),
                        ValidationError);
    }

    SUBCASE("EMITRON_THREADS")
    {
        ::setenv("EMITRON_THREADS", "3", 1);
        CHECK(default_thread_count() == 3);
        ::setenv("EMITRON_THREADS", "zero", 1);
        CHECK(default_thread_count() >= 1);
        ::unsetenv("EMITRON_THREADS");
    }
}

namespace {

RunConfig desk_config()
{
    return RunConfig::load(test::kSourceDir / "data" / "desk" / "config.json");
}

}

TEST_CASE("RunConfig")
{
    SUBCASE("round-trips through JSON")
    {
        const auto cfg  = desk_config();
        const auto doc  = cfg.to_json();
        const auto back = RunConfig::from_json(nlohmann::json::parse(doc.dump()), cfg.base_dir);
        CHECK(back.to_json() == doc);
        CHECK(back.digest() == cfg.digest());
    }

    SUBCASE("synthetic sources round-trip too")
    {
        const auto cfg  = RunConfig::load(test::kSourceDir / "data" / "michigan" / "config.json");
        REQUIRE(cfg.trajectories.synthetic.has_value());
        const auto back = RunConfig::from_json(nlohmann::json::parse(cfg.to_json().dump()), cfg.base_dir);
        CHECK(back.to_json() == cfg.to_json());
        CHECK(back.trajectories.synthetic->od_weights == cfg.trajectories.synthetic->od_weights);
    }

    SUBCASE("digest ignores output location and threads but not inputs")
    {
        auto cfg          = desk_config();
        const auto digest = cfg.digest();
        CHECK(digest.size() == 64);

        cfg.out     = "elsewhere";
        cfg.threads = 3;
        CHECK(cfg.digest() == digest);

        cfg.seed += 1;
        CHECK(cfg.digest() != digest);
        cfg.seed -= 1;

        const auto dir = test::scratch_dir("digest");
        for (const auto& entry : fs::directory_iterator(test::kSourceDir / "data" / "desk")) {
            fs::copy(entry.path(), dir / entry.path().filename());
        }
        auto copy = RunConfig::load(dir / "config.json");
        CHECK(copy.digest() == digest);
        write_file_atomic(dir / "fleet.csv", read_file(dir / "fleet.csv") + "Ford,Focus,2013,1\n");
        CHECK(copy.digest() != digest);
    }

    SUBCASE("missing inputs")
    {
        auto cfg      = desk_config();
        cfg.epa_csv   = "missing.csv";
        CHECK_THROWS_AS(cfg.check_paths(), InputError);
        CHECK_THROWS_AS(RunConfig::load("/nonexistent/config.json"), InputError);
    }

    SUBCASE("schema errors")
    {
        auto doc = desk_config().to_json();
        doc.erase("emission");
        CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(doc.dump()), "."), InputError);

        doc                         = desk_config().to_json();
        doc["calendar"]["temp_factors"] = {1.0, 1.1};
        CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(doc.dump()), "."), ValidationError);

        doc                     = desk_config().to_json();
        doc["scenarios"]["kinds"] = {"newest"};
        CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(doc.dump()), "."), ValidationError);

        doc                     = desk_config().to_json();
        doc["econ"]["battery_perf"] = -1;
        CHECK_THROWS_AS(RunConfig::from_json(nlohmann::json::parse(doc.dump()), "."), ValidationError);
    }
}
