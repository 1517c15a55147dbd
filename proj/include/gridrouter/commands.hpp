#pragma once

// The three CLI subcommands as library calls. Each returns the process exit
// code: 0 completed, 1 usage or schema error, 2 collapsed, 3 diverged.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gridrouter/scenario_io.hpp"

namespace gridrouter {

inline constexpr int kExitCompleted = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitCollapsed = 2;
inline constexpr int kExitDiverged = 3;

int exit_code(Verdict v);

Json summary_json(const RunSummary& s);

/// Report document for one finished run (without comparison runs).
Json run_report(const ParsedScenario& parsed, const Trace& trace);

struct SimulateOptions {
    std::filesystem::path out_dir = ".";
    bool compare_closed_form = false;
};

/// Writes <name>.csv and <name>.report.json (plus one CSV per requested
/// comparison run) into out_dir.
int cmd_simulate(const std::filesystem::path& file, const SimulateOptions& opt, std::ostream& out,
                 std::ostream& err);

/// Human-readable stability summary: coefficients, poles, both predicates,
/// current-loop pole.
std::string stability_text(const SmallSignalParams& p);

struct BodeOptions {
    double f_min = 0.1;
    double f_max = 1e4;
    int points = 400;
};

/// One row per frequency; for the baseline, ripple-mitigated and
/// inertia-enhanced configurations the closed-loop current response and the
/// DC-link voltage response, magnitude in dB and phase in degrees.
std::string bode_triad_csv(const SmallSignalParams& p, const BodeOptions& opt);

struct StabilityOptions {
    std::optional<std::filesystem::path> scenario;
    std::optional<std::string> feeder;
    SmallSignalParams params;
    std::optional<std::filesystem::path> bode;
    BodeOptions bode_options;
};

int cmd_stability(const StabilityOptions& opt, std::ostream& out, std::ostream& err);

struct SweepOptions {
    std::string param;  // JSON pointer into the canonical scenario
    std::vector<double> values;
    std::optional<std::filesystem::path> out_file;
};

/// Scenarios with the pointed-at number replaced by each value, in order.
/// Throws ScenarioError for an empty value list or a path that does not name
/// a number in the canonical document.
std::vector<Scenario> sweep_scenarios(const ParsedScenario& base, const std::string& pointer,
                                      const std::vector<double>& values);

std::string sweep_csv(const std::vector<Scenario>& scenarios, const std::vector<double>& values,
                      const std::vector<Trace>& traces);

/// Exit code is 0 when every point ran, even if some collapsed or diverged;
/// those outcomes are rows in the table.
int cmd_sweep(const std::filesystem::path& file, const SweepOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace gridrouter
