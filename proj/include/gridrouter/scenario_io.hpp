#pragma once

// Scenario files (JSON, "schema": 1), canonical emission, trace CSV output.
//
// Every physical field carries its SI unit as a suffix (r_ohm, l_henry,
// duration_s, ...). Unknown keys are rejected with their JSON path.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridrouter/sim_engine.hpp"

namespace gridrouter {

using Json = nlohmann::ordered_json;

/// All schema problems found in one document.
class ScenarioError : public std::runtime_error {
public:
    explicit ScenarioError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

struct DefaultApplied {
    std::string path;
    Json value;
};

struct ParsedScenario {
    Scenario scenario;
    std::vector<DefaultApplied> defaults;
    std::vector<std::string> compare;  // "kr_off", "droop"
    std::string digest;                // FNV-1a 64 of the source text, hex
};

inline constexpr int kSchemaVersion = 1;

ParsedScenario parse_scenario_text(const std::string& text);
ParsedScenario parse_scenario(const std::filesystem::path& path);

/// Canonical document: every field explicit, fixed key order.
Json to_canonical_json(const ParsedScenario& parsed);

std::string fnv1a_hex(const std::string& bytes);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// RFC 4180 CSV: header row "t_s,<signal>...", CRLF line endings.
std::string trace_csv(const Trace& t);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace gridrouter
