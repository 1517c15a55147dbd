#include <bit>
#include <charconv>
#include <filesystem>
#include <random>

#include "gridrouter/scenario_io.hpp"
#include "support.hpp"

using namespace gridrouter;

namespace {

const std::filesystem::path kScenarios = std::filesystem::path(GRIDROUTER_SOURCE_DIR) / "scenarios";

std::vector<std::string> problems_of(const std::string& text) {
    try {
        parse_scenario_text(text);
    } catch (const ScenarioError& e) {
        return e.problems();
    }
    return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
    return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("minimal document gets every default recorded") {
    const auto p = parse_scenario_text(R"({"schema": 1, "simulation": {"duration_s": 0.1}})");
    CHECK(p.scenario.duration == 0.1);
    CHECK(p.scenario.dt == 100e-6);
    CHECK(p.scenario.hub.params.c_dc == 300e-6);
    CHECK(p.scenario.hub.params.v_dc_nominal == 400.0);
    CHECK(p.scenario.hub.dab_bandwidth_hz == 1.0);
    auto has_default = [&](const std::string& path) {
        return std::any_of(p.defaults.begin(), p.defaults.end(), [&](const auto& d) { return d.path == path; });
    };
    CHECK(has_default("/simulation/dt_s"));
    CHECK(has_default("/hub/c_dc_farad"));
    CHECK_FALSE(has_default("/simulation/duration_s"));
}

TEST_CASE("schema errors name the offending field") {
    const auto neg = problems_of(R"({"schema": 1, "simulation": {"duration_s": 0.1}, "hub": {"c_dc_farad": -1e-3}})");
    REQUIRE(neg.size() == 1);
    CHECK(any_contains(neg, "/hub/c_dc_farad"));
    CHECK(any_contains(neg, "positive"));

    const auto unit = problems_of(
        R"({"schema": 1, "simulation": {"duration_s": 0.1},
            "network": {"dc_feeders": [{"id": "f1", "v_volt": 400, "r": 1, "l_henry": 1e-3}]}})");
    CHECK(any_contains(unit, "/network/dc_feeders/0/r"));
    CHECK(any_contains(unit, "r_ohm"));

    CHECK(any_contains(problems_of(R"({"schema": 2, "simulation": {"duration_s": 0.1}})"), "/schema"));
    CHECK(any_contains(problems_of(R"({"schema": 1})"), "/simulation/duration_s"));
    CHECK(any_contains(problems_of(R"({"schema": 1, "simulation": {"duration_s": "long"}})"), "expected a number"));
}

TEST_CASE("all problems are reported together") {
    const auto p = problems_of(
        R"({"schema": 1, "simulation": {"duration_s": -1, "dt": 1}, "hub": {"c_dc_farad": 0}, "extra": true})");
    CHECK(p.size() >= 4);
    CHECK(any_contains(p, "/simulation/duration_s"));
    CHECK(any_contains(p, "/simulation/dt"));
    CHECK(any_contains(p, "/hub/c_dc_farad"));
    CHECK(any_contains(p, "/extra"));
}

TEST_CASE("syntax errors carry a line number") {
    const auto p = problems_of("{\n  \"schema\": 1,\n  \"simulation\": {\"duration_s\": 0.1,}\n}\n");
    REQUIRE(p.size() == 1);
    CHECK(p[0].rfind("line 3", 0) == 0);
}

TEST_CASE("engine-level invariants surface as scenario errors") {
    const auto p = problems_of(R"({"schema": 1, "simulation": {"duration_s": 0.1},
        "network": {"dc_feeders": [{"id": "f1", "v_volt": 400, "r_ohm": 1, "l_henry": 1e-3},
                                   {"id": "f1", "v_volt": 400, "r_ohm": 1, "l_henry": 1e-3}]}})");
    CHECK(any_contains(p, "duplicate"));
}

TEST_CASE("canonical form is a fixed point and preserves the run") {
    for (const auto& entry : std::filesystem::directory_iterator(kScenarios)) {
        CAPTURE(entry.path().string());
        const auto a = parse_scenario(entry.path());
        const auto ca = to_canonical_json(a);
        const auto b = parse_scenario_text(ca.dump(2));
        const auto cb = to_canonical_json(b);
        CHECK(ca == cb);
        CHECK(ca.dump() == cb.dump());
        CHECK(b.compare == a.compare);
    }
}

TEST_CASE("canonical form reproduces the trace bit for bit") {
    const auto a = parse_scenario(kScenarios / "dc_step_tracking.json");
    const auto b = parse_scenario_text(to_canonical_json(a).dump());
    auto sa = a.scenario, sb = b.scenario;
    sa.duration = sb.duration = 0.06;
    const auto ta = run_scenario(sa), tb = run_scenario(sb);
    CHECK(trace_csv(ta) == trace_csv(tb));
}

TEST_CASE("digest examples") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
    const std::string text = R"({"schema": 1, "simulation": {"duration_s": 0.1}})";
    CHECK(parse_scenario_text(text).digest == fnv1a_hex(text));
    CHECK(parse_scenario_text(text + " ").digest != fnv1a_hex(text));
}

TEST_CASE("format_double round-trips") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(400.0) == "400");
    CHECK(format_double(-2.5e-7) == "-2.5e-07");
    std::mt19937_64 bits(91);
    for (int n = 0; n < 20000; ++n) {
        const double x = std::bit_cast<double>(bits());
        if (!std::isfinite(x)) continue;
        const auto s = format_double(x);
        double y = 0;
        std::from_chars(s.data(), s.data() + s.size(), y);
        CHECK(std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y));
    }
}

TEST_CASE("trace CSV layout") {
    Trace t;
    t.names = {"v_dc", "i_f1"};
    t.time = {0.0, 1e-4};
    t.columns = {{400.0, 399.5}, {0.0, 1.25}};
    CHECK(trace_csv(t) == "t_s,v_dc,i_f1\r\n0,400,0\r\n1e-04,399.5,1.25\r\n");
}
