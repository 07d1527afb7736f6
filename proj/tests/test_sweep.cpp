#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "lippfm/sweep.hpp"
#include "oracles.hpp"

using namespace lippfm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path temp_file(const char* name) {
    return fs::temp_directory_path() / name;
}

size_t count_occurrences(const std::string& text, const std::string& needle) {
    size_t n = 0;
    for (size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

} // namespace

TEST_CASE("grid axis interpolation is endpoint-exact and symmetric") {
    const GridAxis axis{-0.3, 0.3, 61};
    CHECK(axis.value(0) == -0.3);
    CHECK(axis.value(60) == 0.3);
    for (int i = 0; i <= 60; ++i) {
        CHECK(axis.value(60 - i) == -axis.value(i));
    }
    const GridAxis single{0.25, 0.25, 1};
    CHECK(single.value(0) == 0.25);
}

TEST_CASE("config defaults, validation and echo round trip") {
    SUBCASE("minimal config gets defaults") {
        const auto j = nlohmann::json::parse(
            R"({"grid": {"theta_a": {"min": -0.1, "max": 0.1, "count": 3}}})");
        const SweepConfig c = config_from_json(j);
        CHECK(c.theta_a.count == 3);
        CHECK(c.theta_a_dot.count == 61);          // default kept
        CHECK(c.model.flywheel_mass == 10.0);      // default kept
        CHECK(c.limits.tau_a_max == 12.0);
        CHECK(c.step_policy.support.x_min == -0.08);
        CHECK(c.stop_on_step);
    }
    SUBCASE("dt = 0 is rejected by name") {
        const auto j = nlohmann::json::parse(R"({"episode": {"dt": 0.0}})");
        CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("dt"), ConfigError);
    }
    SUBCASE("grid count 0 is rejected by name") {
        const auto j = nlohmann::json::parse(
            R"({"grid": {"theta_a": {"min": 0.0, "max": 1.0, "count": 0}}})");
        CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("grid.theta_a.count"),
                             ConfigError);
    }
    SUBCASE("inverted bounds are rejected") {
        const auto j = nlohmann::json::parse(
            R"({"grid": {"theta_a_dot": {"min": 1.0, "max": -1.0, "count": 5}}})");
        CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("grid.theta_a_dot"),
                             ConfigError);
    }
    SUBCASE("unknown keys are rejected by name") {
        const auto j = nlohmann::json::parse(R"({"modle": {}})");
        CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("modle"), ConfigError);
    }
    SUBCASE("echo round trip is byte-stable") {
        const auto j = nlohmann::json::parse(
            R"({"model": {"flywheel_mass": 7.5}, "lqr": {"q_diag": [50, 5, 0.1]},
                "episode": {"dt": 0.002, "disturbance": {"kind": "impulse", "t0": 0.25,
                "delta_theta_a_dot": 0.4}}})");
        const SweepConfig c1 = config_from_json(j);
        const std::string echo1 = config_to_json(c1).dump(2);
        const SweepConfig c2 = config_from_json(nlohmann::json::parse(echo1));
        const std::string echo2 = config_to_json(c2).dump(2);
        CHECK(echo1 == echo2);
        CHECK(c2.model.flywheel_mass == 7.5);
        CHECK(c2.dt == 0.002);
        CHECK(c2.disturbance.kind == Disturbance::Kind::impulse);
    }
    SUBCASE("load_config reports missing files") {
        CHECK_THROWS_AS(load_config("/nonexistent/definitely_missing.json"), ConfigError);
    }
}

TEST_CASE("tiny sweep around the origin is entirely stable") {
    SweepConfig c;
    c.theta_a = GridAxis{-1e-3, 1e-3, 2};
    c.theta_a_dot = GridAxis{-1e-3, 1e-3, 2};
    c.jobs = 1;
    const RegionMap map = run_sweep(c);
    REQUIRE(map.cells.size() == 4);
    for (const auto& cell : map.cells) {
        CHECK(cell.classification == Classification::stable);
    }
}

TEST_CASE("single-cell sweep at a DCM-breaching state") {
    SweepConfig c;
    c.theta_a = GridAxis{0.3, 0.3, 1};
    c.theta_a_dot = GridAxis{0.0, 0.0, 1};
    c.jobs = 1;
    const RegionMap map = run_sweep(c);
    REQUIRE(map.cells.size() == 1);
    CHECK(map.cells[0].classification == Classification::step_required);
    CHECK(map.cells[0].step_event);
    CHECK(map.cells[0].initial_zeta > c.step_policy.support.x_max);
}

TEST_CASE("symmetric support polygon gives a point-reflected map") {
    SweepConfig c;
    c.step_policy.support = SupportPolygon{-0.1, 0.1};
    c.theta_a = GridAxis{-0.2, 0.2, 5};
    c.theta_a_dot = GridAxis{-1.0, 1.0, 7};
    c.duration = 2.0;
    c.jobs = 2;
    const RegionMap map = run_sweep(c);
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 7; ++j) {
            CHECK(map.cell(i, j).classification == map.cell(4 - i, 6 - j).classification);
        }
    }
}

TEST_CASE("parallel and serial sweeps agree cell for cell and byte for byte") {
    SweepConfig c;
    c.theta_a = GridAxis{-0.25, 0.25, 9};
    c.theta_a_dot = GridAxis{-1.2, 1.2, 9};
    c.duration = 2.0;

    c.jobs = 1;
    const RegionMap serial = run_sweep(c);
    c.jobs = 4;
    const RegionMap parallel = run_sweep(c);

    REQUIRE(serial.cells.size() == parallel.cells.size());
    for (size_t k = 0; k < serial.cells.size(); ++k) {
        CHECK(serial.cells[k].classification == parallel.cells[k].classification);
        CHECK(serial.cells[k].max_abs_tau_a == parallel.cells[k].max_abs_tau_a);
        CHECK(serial.cells[k].max_abs_zeta == parallel.cells[k].max_abs_zeta);
        CHECK(serial.cells[k].t_event == parallel.cells[k].t_event);
    }

    const fs::path f1 = temp_file("lippfm_serial.csv");
    const fs::path f2 = temp_file("lippfm_parallel.csv");
    emit_csv(serial, f1);
    emit_csv(parallel, f2);
    CHECK(slurp(f1) == slurp(f2));
    fs::remove(f1);
    fs::remove(f2);
}

TEST_CASE("region CSV format") {
    SweepConfig c;
    c.theta_a = GridAxis{-1e-3, 1e-3, 2};
    c.theta_a_dot = GridAxis{-1e-3, 1e-3, 2};
    c.jobs = 1;
    c.duration = 1.0;
    const RegionMap map = run_sweep(c);

    const fs::path f = temp_file("lippfm_map.csv");
    emit_csv(map, f);
    const std::string text = slurp(f);

    CHECK(text.substr(0, text.find('\n')) ==
          "theta_a,theta_a_dot,classification,max_abs_tau_a,max_abs_zeta,t_event");
    CHECK(count_occurrences(text, "\n") == 5);  // header + 4 cells
    CHECK(text.back() == '\n');

    // byte-identical on re-emission
    emit_csv(map, f);
    CHECK(slurp(f) == text);

    // classifications round-trip through the text form
    std::istringstream lines(text);
    std::string line;
    std::getline(lines, line);  // header
    size_t cell = 0;
    while (std::getline(lines, line)) {
        std::istringstream fields(line);
        std::string theta, thetad, cls;
        std::getline(fields, theta, ',');
        std::getline(fields, thetad, ',');
        std::getline(fields, cls, ',');
        CHECK(cls == to_string(map.cells[cell].classification));
        ++cell;
    }
    CHECK(cell == map.cells.size());
    fs::remove(f);

    SUBCASE("unwritable path raises IoError") {
        CHECK_THROWS_AS(emit_csv(map, "/nonexistent_dir/foo.csv"), IoError);
    }
}

TEST_CASE("SVG heatmap structure") {
    SweepConfig c;
    c.theta_a = GridAxis{-1e-3, 1e-3, 2};
    c.theta_a_dot = GridAxis{-1e-3, 1e-3, 2};
    c.jobs = 1;
    c.duration = 1.0;
    const RegionMap map = run_sweep(c);  // all stable

    const fs::path f = temp_file("lippfm_map.svg");
    emit_svg(map, f);
    const std::string text = slurp(f);
    fs::remove(f);

    CHECK(count_occurrences(text, "class=\"cell\"") == 4);
    // all-stable map renders no pink-family cells
    CHECK(count_occurrences(text, "fill=\"#f48fb1\"") == 1);  // legend swatch only
    CHECK(count_occurrences(text, "fill=\"#e91e63\"") == 1);  // legend swatch only
    CHECK(text.find("theta_a [rad]") != std::string::npos);
    CHECK(text.find("theta_a_dot [rad/s]") != std::string::npos);

    std::string why;
    CHECK_MESSAGE(oracles::xml_well_formed(text, &why), why);
}

TEST_CASE("ray monotonicity warnings flag stable islands") {
    RegionMap map;
    map.theta_a = GridAxis{0.0, 0.0, 1};
    map.theta_a_dot = GridAxis{0.0, 1.0, 5};
    map.cells.resize(5);
    for (auto& cell : map.cells) cell.classification = Classification::stable;

    CHECK(ray_monotonicity_warnings(map).empty());

    map.cells[1].classification = Classification::step_required;
    map.cells[3].classification = Classification::step_required;
    // stable cells at indices 2 and 4 sit beyond a non-stable cell
    const auto warnings = ray_monotonicity_warnings(map);
    CHECK(warnings.size() == 2);
    CHECK(warnings[0].find("non-monotone ray") != std::string::npos);

    // monotone map: nothing to report
    map.cells[2].classification = Classification::step_required;
    map.cells[4].classification = Classification::fallen;
    CHECK(ray_monotonicity_warnings(map).empty());
}

TEST_CASE("unsaturated cells are stable on a reduced default sweep") {
    SweepConfig c;
    c.theta_a = GridAxis{-0.3, 0.3, 11};
    c.theta_a_dot = GridAxis{-1.5, 1.5, 11};
    const RegionMap map = run_sweep(c);
    for (const auto& cell : map.cells) {
        if (!cell.any_saturation) {
            CHECK(cell.classification == Classification::stable);
        }
        if (!c.step_policy.support.contains(cell.initial_zeta)) {
            CHECK(cell.step_event);
        }
    }
}
