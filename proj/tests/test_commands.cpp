#include <filesystem>
#include <sstream>

#include "gridrouter/commands.hpp"
#include "gridrouter/kernels.hpp"
#include "support.hpp"

using namespace gridrouter;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = fs::path(GRIDROUTER_SOURCE_DIR) / "scenarios";

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("gridrouter_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::string> csv_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) {
        if (!l.empty() && l.back() == '\r') l.pop_back();
        lines.push_back(l);
    }
    return lines;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string c; std::getline(in, c, ',');) out.push_back(c);
    return out;
}

}  // namespace

TEST_CASE("exit codes follow the verdict") {
    CHECK(exit_code(Verdict::completed) == 0);
    CHECK(exit_code(Verdict::collapsed) == 2);
    CHECK(exit_code(Verdict::diverged) == 3);
}

TEST_CASE("stability text reports coefficients and verdicts") {
    const SmallSignalParams p{1e-3, 0.1, 1e-3, 100, 50, 0, 0.02, 0.02};
    const auto text = stability_text(p);
    CHECK(text.find("characteristic: [0.001, 100.1, 1050]") != std::string::npos);
    CHECK(text.find("verdict: stable") != std::string::npos);
    CHECK(text.find("current-loop pole: -100") != std::string::npos);

    SmallSignalParams bad = p;
    bad.k_c = 1.0;
    bad.k_r = 0.0;
    const auto t2 = stability_text(bad);
    CHECK(t2.find("damping condition: violated") != std::string::npos);
    CHECK(t2.find("virtual inertia: unstable") != std::string::npos);
}

TEST_CASE("Bode triad CSV has monotone frequencies and the inertia shift") {
    const SmallSignalParams p{450e-6, 1, 300e-6, 100, 50, 1e-4, 1e-4, 0.05, 2.0};
    const auto lines = csv_lines(bode_triad_csv(p, {0.5, 5e3, 120}));
    REQUIRE(lines.size() == 121);
    const auto head = split(lines[0]);
    CHECK(head.size() == 13);
    CHECK(head[0] == "f_hz");
    CHECK(head[3] == "baseline_link_gain_db");
    CHECK(head[11] == "inertia_link_gain_db");
    double prev = 0.0;
    for (std::size_t n = 1; n < lines.size(); ++n) {
        const auto row = split(lines[n]);
        REQUIRE(row.size() == 13);
        const double f = std::stod(row[0]);
        CHECK(f > prev);
        prev = f;
        const double shift = std::stod(row[3]) - std::stod(row[11]);
        CHECK(shift == doctest::Approx(20 * std::log10((p.c + p.k_c / p.z) / p.c)).epsilon(1e-9));
    }
    CHECK(prev == 5e3);
}

TEST_CASE("cmd_stability from raw parameters and from a scenario") {
    std::ostringstream out, err;
    StabilityOptions o;
    o.params = {450e-6, 1, 300e-6, 100, 50};
    const auto dir = scratch("stability");
    o.bode = dir / "bode.csv";
    CHECK(cmd_stability(o, out, err) == kExitCompleted);
    CHECK(fs::exists(*o.bode));

    StabilityOptions s;
    s.scenario = kScenarios / "dc_ripple_100hz.json";
    s.feeder = "f2";
    std::ostringstream out2;
    CHECK(cmd_stability(s, out2, err) == kExitCompleted);
    CHECK(out2.str().find("verdict: stable") != std::string::npos);

    s.feeder = "missing";
    std::ostringstream err3;
    CHECK(cmd_stability(s, out2, err3) == kExitUsage);
    CHECK_FALSE(err3.str().empty());
}

TEST_CASE("sweep rejects empty values and bad pointers") {
    const auto base = parse_scenario(kScenarios / "dc_step_tracking.json");
    CHECK_THROWS_AS(sweep_scenarios(base, "/hub/c_dc_farad", {}), ScenarioError);
    CHECK_THROWS_AS(sweep_scenarios(base, "/hub/nope", {1.0}), ScenarioError);
    CHECK_THROWS_AS(sweep_scenarios(base, "hub/c_dc_farad", {1.0}), ScenarioError);
    CHECK_THROWS_AS(sweep_scenarios(base, "/name", {1.0}), ScenarioError);
    CHECK_THROWS_AS(sweep_scenarios(base, "/hub/c_dc_farad", {-1.0}), ScenarioError);

    const auto pts = sweep_scenarios(base, "/hub/c_dc_farad", {1e-4, 2e-4});
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].hub.params.c_dc == 1e-4);
    CHECK(pts[1].hub.params.c_dc == 2e-4);
    CHECK(pts[1].dc.size() == base.scenario.dc.size());
}

TEST_CASE("a single-point sweep at the base value reproduces simulate") {
    auto base = parse_scenario(kScenarios / "dc_step_tracking.json");
    const double k_p = base.scenario.dc[0].feeder.module.k_p;
    const auto pts = sweep_scenarios(base, "/network/dc_feeders/0/controller/k_p", {k_p});
    REQUIRE(pts.size() == 1);
    const auto a = run_scenario(base.scenario);
    const auto b = run_scenario(pts[0]);
    CHECK(trace_csv(a) == trace_csv(b));

    const auto lines = csv_lines(sweep_csv(pts, {k_p}, {b}));
    REQUIRE(lines.size() == 2);
    const auto row = split(lines[1]);
    CHECK(row[1] == "completed");
    const auto summary = summarize(base.scenario, a);
    CHECK(row[4] == format_double(*summary.dc[0].steady_state_error));
}

TEST_CASE("cmd_simulate writes the trace, comparisons and report") {
    const auto dir = scratch("simulate");
    std::ostringstream out, err;
    CHECK(cmd_simulate(kScenarios / "idle_equilibrium.json", {dir, false}, out, err) == kExitCompleted);
    CHECK(fs::exists(dir / "idle_equilibrium.csv"));
    const auto report = Json::parse(read_file(dir / "idle_equilibrium.report.json"));
    CHECK(report["verdict"] == "completed");
    CHECK(report["exit_code"] == 0);
    CHECK(report["digest"] == fnv1a_hex(read_file(kScenarios / "idle_equilibrium.json")));

    std::ostringstream err2;
    CHECK(cmd_simulate(dir / "missing.json", {dir, false}, out, err2) == kExitUsage);
    CHECK_FALSE(err2.str().empty());
}

TEST_CASE("a collapsing scenario maps to exit code 2") {
    const auto dir = scratch("collapse");
    write_file(dir / "cpl.json", R"({"schema": 1, "name": "cpl", "simulation": {"duration_s": 0.05, "dt_s": 1e-5},
        "network": {"dc_feeders": [{"id": "f1", "v_volt": 400, "r_ohm": 5, "l_henry": 1e-3, "mode": "none"}]},
        "hub": {"loads": [{"id": "cpl", "kind": "constant_power", "p_watt": 100000}]}})");
    std::ostringstream out, err;
    CHECK(cmd_simulate(dir / "cpl.json", {dir, false}, out, err) == kExitCollapsed);
    const auto report = Json::parse(read_file(dir / "cpl.report.json"));
    CHECK(report["verdict"] == "collapsed");
    CHECK(report["failure_tick"].is_number_integer());
}
