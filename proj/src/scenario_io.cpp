#include "gridrouter/scenario_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

namespace gridrouter {

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : "\n") + s;
    return out;
}

enum class Range { any, positive, non_negative, unit_open_closed };

class Reader {
public:
    std::vector<std::string> errors;
    std::vector<DefaultApplied> defaults;

    void error(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

    bool object(const Json& j, const std::string& path) {
        if (!j.is_object()) {
            error(path, "expected an object");
            return false;
        }
        return true;
    }

    void keys(const Json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
        if (!j.is_object()) return;
        for (const auto& [k, v] : j.items()) {
            if (std::find(allowed.begin(), allowed.end(), k) != allowed.end()) continue;
            std::string hint;
            for (auto a : allowed) {
                if (a.size() > k.size() && a.substr(0, k.size() + 1) == k + "_") {
                    hint = " (fields carry their unit suffix; did you mean '" + std::string(a) + "'?)";
                }
            }
            error(path + "/" + k, "unknown key" + hint);
        }
    }

    double number(const Json& j, const std::string& path, const char* key, std::optional<double> fallback,
                  Range range = Range::any) {
        const std::string where = path + "/" + key;
        if (!j.is_object() || !j.contains(key)) {
            if (!fallback) {
                error(where, "required field missing");
                return 0.0;
            }
            defaults.push_back({where, *fallback});
            return *fallback;
        }
        const auto& v = j.at(key);
        if (!v.is_number()) {
            error(where, "expected a number");
            return fallback.value_or(0.0);
        }
        const double x = v.get<double>();
        switch (range) {
            case Range::positive:
                if (!(x > 0.0)) error(where, "must be positive");
                break;
            case Range::non_negative:
                if (!(x >= 0.0)) error(where, "must be non-negative");
                break;
            case Range::unit_open_closed:
                if (!(x > 0.0 && x <= 1.0)) error(where, "must lie in (0, 1]");
                break;
            case Range::any:
                if (!std::isfinite(x)) error(where, "must be finite");
                break;
        }
        return x;
    }

    bool boolean(const Json& j, const std::string& path, const char* key, bool fallback) {
        const std::string where = path + "/" + key;
        if (!j.is_object() || !j.contains(key)) {
            defaults.push_back({where, fallback});
            return fallback;
        }
        if (!j.at(key).is_boolean()) {
            error(where, "expected a boolean");
            return fallback;
        }
        return j.at(key).get<bool>();
    }

    std::string string(const Json& j, const std::string& path, const char* key,
                       std::optional<std::string> fallback = std::nullopt) {
        const std::string where = path + "/" + key;
        if (!j.is_object() || !j.contains(key)) {
            if (!fallback) {
                error(where, "required field missing");
                return {};
            }
            defaults.push_back({where, *fallback});
            return *fallback;
        }
        if (!j.at(key).is_string()) {
            error(where, "expected a string");
            return {};
        }
        return j.at(key).get<std::string>();
    }

    std::string identifier(const Json& j, const std::string& path, const char* key) {
        auto s = string(j, path, key);
        const bool ok = !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
            return std::isalnum(c) || c == '_' || c == '-';
        });
        if (!ok) error(path + "/" + key, "identifier must be non-empty [A-Za-z0-9_-]");
        return s;
    }

    const Json& child(const Json& j, const char* key) {
        static const Json empty = Json::object();
        if (j.is_object() && j.contains(key)) return j.at(key);
        return empty;
    }

    const Json& array(const Json& j, const std::string& path, const char* key) {
        static const Json empty = Json::array();
        if (!j.is_object() || !j.contains(key)) return empty;
        if (!j.at(key).is_array()) {
            error(path + "/" + key, "expected an array");
            return empty;
        }
        return j.at(key);
    }
};

LoadModel read_load_model(Reader& r, const Json& j, const std::string& path) {
    const auto kind = r.string(j, path, "kind");
    if (kind == "resistive") return ResistiveLoad{r.number(j, path, "r_ohm", std::nullopt, Range::positive)};
    if (kind == "constant_power") return ConstantPowerLoad{r.number(j, path, "p_watt", std::nullopt)};
    if (kind == "constant_current") return ConstantCurrentLoad{r.number(j, path, "i_amp", std::nullopt)};
    if (kind == "ripple_source") {
        return RippleSource{r.number(j, path, "delta_i_amp", std::nullopt),
                            r.number(j, path, "omega_rad_s", std::nullopt, Range::positive)};
    }
    r.error(path + "/kind", "unknown load kind '" + kind + "'");
    return ResistiveLoad{1.0};
}

Json load_model_json(const LoadModel& m) {
    Json j;
    if (const auto* l = std::get_if<ResistiveLoad>(&m)) {
        j["kind"] = "resistive";
        j["r_ohm"] = l->r_ohm;
    } else if (const auto* l = std::get_if<ConstantPowerLoad>(&m)) {
        j["kind"] = "constant_power";
        j["p_watt"] = l->p_watt;
    } else if (const auto* l = std::get_if<ConstantCurrentLoad>(&m)) {
        j["kind"] = "constant_current";
        j["i_amp"] = l->i_amp;
    } else if (const auto* l = std::get_if<RippleSource>(&m)) {
        j["kind"] = "ripple_source";
        j["delta_i_amp"] = l->delta_i;
        j["omega_rad_s"] = l->omega;
    }
    return j;
}

ControlMode read_mode(Reader& r, const Json& j, const std::string& path) {
    const auto m = r.string(j, path, "mode", std::string("series_module"));
    if (m == "series_module") return ControlMode::series_module;
    if (m == "droop") return ControlMode::droop;
    if (m == "none") return ControlMode::none;
    r.error(path + "/mode", "expected series_module, droop or none");
    return ControlMode::none;
}

struct GainDefaults {
    double k_p = 100.0, k_i = 50.0, k_r = 0.0, k_c = 0.0, k_l = 0.0;
};

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> problems)
    : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ParsedScenario parse_scenario_text(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
        throw ScenarioError({"line " + std::to_string(line) + ": " + e.what()});
    }

    Reader r;
    ParsedScenario out;
    Scenario& s = out.scenario;
    if (!r.object(doc, "")) throw ScenarioError(r.errors);
    r.keys(doc, "", {"schema", "name", "simulation", "network", "hub", "controllers", "events", "output"});
    if (!doc.contains("schema") || !doc["schema"].is_number_integer() || doc["schema"].get<int>() != kSchemaVersion) {
        r.error("/schema", "must be " + std::to_string(kSchemaVersion));
    }
    s.name = r.string(doc, "", "name", std::string("scenario"));

    const auto& sim = r.child(doc, "simulation");
    r.keys(sim, "/simulation", {"duration_s", "dt_s", "sample_period_s", "grid_hz"});
    s.duration = r.number(sim, "/simulation", "duration_s", std::nullopt, Range::positive);
    s.dt = r.number(sim, "/simulation", "dt_s", 100e-6, Range::positive);
    s.sample_period = r.number(sim, "/simulation", "sample_period_s", std::max(s.dt, 1e-4), Range::positive);
    s.grid_hz = r.number(sim, "/simulation", "grid_hz", kDefaultGridHz, Range::positive);

    // Hub first: dc defaults depend on the nominal link voltage.
    const auto& hub = r.child(doc, "hub");
    r.keys(hub, "/hub", {"v_dc_volt", "c_dc_farad", "v_dc_init_volt", "collapse_fraction", "cpl_floor_volt",
                         "vic_loop_z_ohm", "dab_bandwidth_hz", "afe", "bess", "loads"});
    auto& h = s.hub;
    h.params.v_dc_nominal = r.number(hub, "/hub", "v_dc_volt", 400.0, Range::positive);
    h.params.c_dc = r.number(hub, "/hub", "c_dc_farad", 300e-6, Range::positive);
    h.v_dc_initial = r.number(hub, "/hub", "v_dc_init_volt", h.params.v_dc_nominal, Range::positive);
    h.collapse_fraction = r.number(hub, "/hub", "collapse_fraction", 0.5, Range::non_negative);
    h.cpl_floor = r.number(hub, "/hub", "cpl_floor_volt", kDefaultCplFloor, Range::positive);
    h.vic_loop_z = r.number(hub, "/hub", "vic_loop_z_ohm", 1.0, Range::positive);
    h.dab_bandwidth_hz = r.number(hub, "/hub", "dab_bandwidth_hz", 1.0, Range::positive);

    const auto& afe = r.child(hub, "afe");
    r.keys(afe, "/hub/afe", {"enabled", "v_ref_volt", "k_p", "k_i", "v_d_volt", "q_ref_var", "loss_factor"});
    h.afe.enabled = r.boolean(afe, "/hub/afe", "enabled", false);
    h.afe.v_ref = r.number(afe, "/hub/afe", "v_ref_volt", h.params.v_dc_nominal, Range::positive);
    h.afe.k_p = r.number(afe, "/hub/afe", "k_p", 2.0, Range::non_negative);
    h.afe.k_i = r.number(afe, "/hub/afe", "k_i", 200.0, Range::non_negative);
    h.afe.v_d = r.number(afe, "/hub/afe", "v_d_volt", 325.0, Range::positive);
    h.afe.q_ref = r.number(afe, "/hub/afe", "q_ref_var", 0.0);
    h.afe.loss_factor = r.number(afe, "/hub/afe", "loss_factor", 1.0, Range::positive);

    const auto& bess = r.child(hub, "bess");
    r.keys(bess, "/hub/bess", {"enabled", "capacity_coulomb", "v_battery_volt", "power_limit_watt", "soc_initial",
                               "p_request_watt"});
    h.bess.enabled = r.boolean(bess, "/hub/bess", "enabled", false);
    h.params.q_battery = r.number(bess, "/hub/bess", "capacity_coulomb", 36000.0, Range::non_negative);
    h.params.v_battery = r.number(bess, "/hub/bess", "v_battery_volt", 48.0, Range::positive);
    h.params.p_battery_limit = r.number(bess, "/hub/bess", "power_limit_watt", 1000.0, Range::non_negative);
    h.bess.soc_initial = r.number(bess, "/hub/bess", "soc_initial", 0.5, Range::non_negative);
    if (h.bess.soc_initial > 1.0) r.error("/hub/bess/soc_initial", "must not exceed 1");
    h.bess.p_request = r.number(bess, "/hub/bess", "p_request_watt", 0.0);

    const auto& loads = r.array(hub, "/hub", "loads");
    for (std::size_t i = 0; i < loads.size(); ++i) {
        const std::string p = "/hub/loads/" + std::to_string(i);
        if (!r.object(loads[i], p)) continue;
        r.keys(loads[i], p, {"id", "kind", "r_ohm", "p_watt", "i_amp", "delta_i_amp", "omega_rad_s"});
        h.loads.push_back({r.identifier(loads[i], p, "id"), read_load_model(r, loads[i], p)});
    }

    const auto& ctl = r.child(doc, "controllers");
    r.keys(ctl, "/controllers", {"ripple_cutoff_hz", "v_max_fraction", "ac", "dc"});
    s.controller.ripple_cutoff_hz = r.number(ctl, "/controllers", "ripple_cutoff_hz", kDefaultRippleCutoffHz, Range::positive);
    s.controller.v_max_fraction = r.number(ctl, "/controllers", "v_max_fraction", 0.1, Range::positive);
    auto read_gain_defaults = [&](const char* key, bool dc) {
        const std::string p = std::string("/controllers/") + key;
        const auto& g = r.child(ctl, key);
        if (dc) r.keys(g, p, {"k_p", "k_i", "k_r", "k_c", "k_l"});
        else r.keys(g, p, {"k_p", "k_i"});
        GainDefaults d;
        d.k_p = r.number(g, p, "k_p", 100.0, Range::non_negative);
        d.k_i = r.number(g, p, "k_i", 50.0, Range::non_negative);
        if (dc) {
            d.k_r = r.number(g, p, "k_r", 0.0, Range::non_negative);
            d.k_c = r.number(g, p, "k_c", 0.0, Range::non_negative);
            d.k_l = r.number(g, p, "k_l", 0.0, Range::non_negative);
        }
        return d;
    };
    const GainDefaults ac_gain = read_gain_defaults("ac", false);
    const GainDefaults dc_gain = read_gain_defaults("dc", true);

    const auto& net = r.child(doc, "network");
    r.keys(net, "/network", {"ac_bus", "ac_feeders", "dc_feeders"});
    const auto& bus = r.child(net, "ac_bus");
    r.keys(bus, "/network/ac_bus", {"v_volt", "angle_rad"});
    {
        const double m = r.number(bus, "/network/ac_bus", "v_volt", 230.0, Range::positive);
        const double a = r.number(bus, "/network/ac_bus", "angle_rad", 0.0);
        s.v_bus = phasor_from_polar(std::max(m, 0.0), a);
    }

    const auto& acf = r.array(net, "/network", "ac_feeders");
    for (std::size_t i = 0; i < acf.size(); ++i) {
        const std::string p = "/network/ac_feeders/" + std::to_string(i);
        const auto& j = acf[i];
        if (!r.object(j, p)) continue;
        r.keys(j, p, {"id", "v_volt", "angle_rad", "r_ohm", "x_ohm", "l_henry", "p_ref_watt", "q_ref_var", "mode",
                      "mismatch_feedforward", "controller"});
        AcFeederConfig f;
        f.feeder.id = r.identifier(j, p, "id");
        const double mag = r.number(j, p, "v_volt", std::nullopt, Range::positive);
        f.feeder.source = phasor_from_polar(std::max(mag, 0.0), r.number(j, p, "angle_rad", 0.0));
        const double rr = r.number(j, p, "r_ohm", std::nullopt, Range::non_negative);
        if (j.contains("x_ohm") && j.contains("l_henry")) r.error(p, "give either x_ohm or l_henry, not both");
        if (j.contains("l_henry")) {
            f.feeder.line = Impedance::from_inductance(rr, r.number(j, p, "l_henry", std::nullopt, Range::positive),
                                                       angular_frequency(s.grid_hz));
        } else {
            f.feeder.line = {rr, r.number(j, p, "x_ohm", std::nullopt, Range::positive)};
        }
        f.feeder.p_ref = r.number(j, p, "p_ref_watt", 0.0);
        f.feeder.q_ref = r.number(j, p, "q_ref_var", 0.0);
        f.mode = read_mode(r, j, p);
        f.mismatch_feedforward = r.boolean(j, p, "mismatch_feedforward", true);
        const auto& c = r.child(j, "controller");
        const std::string cp = p + "/controller";
        r.keys(c, cp, {"k_p", "k_i", "v_max_volt"});
        f.feeder.module.k_p = r.number(c, cp, "k_p", ac_gain.k_p, Range::non_negative);
        f.feeder.module.k_i = r.number(c, cp, "k_i", ac_gain.k_i, Range::non_negative);
        f.feeder.module.v_max = r.number(c, cp, "v_max_volt", s.controller.v_max_fraction * mag, Range::positive);
        s.ac.push_back(std::move(f));
    }

    const auto& dcf = r.array(net, "/network", "dc_feeders");
    for (std::size_t i = 0; i < dcf.size(); ++i) {
        const std::string p = "/network/dc_feeders/" + std::to_string(i);
        const auto& j = dcf[i];
        if (!r.object(j, p)) continue;
        r.keys(j, p, {"id", "v_volt", "r_ohm", "l_henry", "i_init_amp", "mode", "ref_mode", "p_ref_watt", "share",
                      "droop_slope_ohm", "mismatch_feedforward", "controller"});
        DcFeederConfig f;
        f.feeder.id = r.identifier(j, p, "id");
        f.feeder.source_v = r.number(j, p, "v_volt", std::nullopt, Range::positive);
        f.feeder.r_ohm = r.number(j, p, "r_ohm", std::nullopt, Range::non_negative);
        f.feeder.l_henry = r.number(j, p, "l_henry", std::nullopt, Range::positive);
        f.feeder.i_meas = r.number(j, p, "i_init_amp", 0.0);
        f.mode = read_mode(r, j, p);
        const auto rm = r.string(j, p, "ref_mode", std::string("setpoint"));
        if (rm == "setpoint") f.ref_mode = RefMode::setpoint;
        else if (rm == "share") f.ref_mode = RefMode::share;
        else r.error(p + "/ref_mode", "expected setpoint or share");
        f.p_ref = r.number(j, p, "p_ref_watt", 0.0);
        f.share = r.number(j, p, "share", 0.0);
        f.droop_slope = r.number(j, p, "droop_slope_ohm", 0.5, Range::non_negative);
        f.mismatch_feedforward = r.boolean(j, p, "mismatch_feedforward", true);
        const auto& c = r.child(j, "controller");
        const std::string cp = p + "/controller";
        r.keys(c, cp, {"k_p", "k_i", "k_r", "k_c", "k_l", "v_max_volt"});
        auto& m = f.feeder.module;
        m.k_p = r.number(c, cp, "k_p", dc_gain.k_p, Range::non_negative);
        m.k_i = r.number(c, cp, "k_i", dc_gain.k_i, Range::non_negative);
        m.k_r = r.number(c, cp, "k_r", dc_gain.k_r, Range::non_negative);
        m.k_c = r.number(c, cp, "k_c", dc_gain.k_c, Range::non_negative);
        m.k_l = r.number(c, cp, "k_l", dc_gain.k_l, Range::non_negative);
        m.v_max = r.number(c, cp, "v_max_volt", s.controller.v_max_fraction * h.params.v_dc_nominal, Range::positive);
        s.dc.push_back(std::move(f));
    }

    const auto& evs = r.array(doc, "", "events");
    for (std::size_t i = 0; i < evs.size(); ++i) {
        const std::string p = "/events/" + std::to_string(i);
        const auto& j = evs[i];
        if (!r.object(j, p)) continue;
        Event e;
        e.time = r.number(j, p, "t_s", std::nullopt, Range::non_negative);
        const auto kind = r.string(j, p, "kind");
        if (kind == "p_ref_step") {
            r.keys(j, p, {"t_s", "kind", "feeder", "p_watt"});
            e.kind = event::PRefStep{r.identifier(j, p, "feeder"), r.number(j, p, "p_watt", std::nullopt)};
        } else if (kind == "q_ref_step") {
            r.keys(j, p, {"t_s", "kind", "feeder", "q_var"});
            e.kind = event::QRefStep{r.identifier(j, p, "feeder"), r.number(j, p, "q_var", std::nullopt)};
        } else if (kind == "load_step") {
            r.keys(j, p, {"t_s", "kind", "load", "load_kind", "r_ohm", "p_watt", "i_amp", "delta_i_amp", "omega_rad_s"});
            Json lm = j;
            lm.erase("kind");
            if (lm.contains("load_kind")) lm["kind"] = lm["load_kind"];
            e.kind = event::LoadStep{r.identifier(j, p, "load"), read_load_model(r, lm, p)};
        } else if (kind == "voltage_sag") {
            r.keys(j, p, {"t_s", "kind", "feeder", "fraction", "duration_s"});
            e.kind = event::VoltageSag{r.identifier(j, p, "feeder"),
                                       r.number(j, p, "fraction", std::nullopt, Range::unit_open_closed),
                                       r.number(j, p, "duration_s", std::nullopt, Range::non_negative)};
        } else if (kind == "ripple_enable") {
            r.keys(j, p, {"t_s", "kind", "feeder", "delta_i_amp", "omega_rad_s"});
            e.kind = event::RippleEnable{r.identifier(j, p, "feeder"), r.number(j, p, "delta_i_amp", std::nullopt),
                                         r.number(j, p, "omega_rad_s", std::nullopt, Range::positive)};
        } else if (kind == "impedance_change") {
            r.keys(j, p, {"t_s", "kind", "feeder", "r_ohm", "x_ohm", "l_henry"});
            e.kind = event::ImpedanceChange{r.identifier(j, p, "feeder"),
                                            r.number(j, p, "r_ohm", std::nullopt, Range::non_negative),
                                            r.number(j, p, "x_ohm", 0.0, Range::non_negative),
                                            r.number(j, p, "l_henry", 0.0, Range::non_negative)};
        } else if (kind == "feeder_bypass") {
            r.keys(j, p, {"t_s", "kind", "feeder"});
            e.kind = event::FeederBypass{r.identifier(j, p, "feeder")};
        } else {
            r.error(p + "/kind", "unknown event kind '" + kind + "'");
            continue;
        }
        s.events.push_back(std::move(e));
    }

    const auto& output = r.child(doc, "output");
    r.keys(output, "/output", {"compare", "compare_closed_form"});
    s.compare_closed_form = r.boolean(output, "/output", "compare_closed_form", false);
    const auto& cmp = r.array(output, "/output", "compare");
    for (std::size_t i = 0; i < cmp.size(); ++i) {
        if (!cmp[i].is_string() || (cmp[i] != "kr_off" && cmp[i] != "droop")) {
            r.error("/output/compare/" + std::to_string(i), "expected \"kr_off\" or \"droop\"");
            continue;
        }
        out.compare.push_back(cmp[i].get<std::string>());
    }

    if (!r.errors.empty()) throw ScenarioError(r.errors);
    try {
        validate(s);
    } catch (const std::invalid_argument& e) {
        throw ScenarioError({e.what()});
    }
    out.defaults = std::move(r.defaults);
    out.digest = fnv1a_hex(text);
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

ParsedScenario parse_scenario(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::runtime_error& e) {
        throw ScenarioError({e.what()});
    }
    return parse_scenario_text(text);
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string trace_csv(const Trace& t) {
    std::string out = "t_s";
    for (const auto& n : t.names) out += "," + n;
    out += "\r\n";
    for (std::size_t row = 0; row < t.time.size(); ++row) {
        out += format_double(t.time[row]);
        for (const auto& col : t.columns) {
            out += ',';
            out += format_double(col[row]);
        }
        out += "\r\n";
    }
    return out;
}

Json to_canonical_json(const ParsedScenario& parsed) {
    const Scenario& s = parsed.scenario;
    Json j;
    j["schema"] = kSchemaVersion;
    j["name"] = s.name;
    j["simulation"] = {{"duration_s", s.duration}, {"dt_s", s.dt}, {"sample_period_s", s.sample_period},
                       {"grid_hz", s.grid_hz}};

    Json net;
    net["ac_bus"] = {{"v_volt", s.v_bus.magnitude()}, {"angle_rad", s.v_bus.angle()}};
    net["ac_feeders"] = Json::array();
    for (const auto& f : s.ac) {
        const auto& m = f.feeder.module;
        net["ac_feeders"].push_back({{"id", f.feeder.id},
                                     {"v_volt", f.feeder.source.magnitude()},
                                     {"angle_rad", f.feeder.source.angle()},
                                     {"r_ohm", f.feeder.line.r},
                                     {"x_ohm", f.feeder.line.x},
                                     {"p_ref_watt", f.feeder.p_ref},
                                     {"q_ref_var", f.feeder.q_ref},
                                     {"mode", to_string(f.mode)},
                                     {"mismatch_feedforward", f.mismatch_feedforward},
                                     {"controller", {{"k_p", m.k_p}, {"k_i", m.k_i}, {"v_max_volt", m.v_max}}}});
    }
    net["dc_feeders"] = Json::array();
    for (const auto& f : s.dc) {
        const auto& m = f.feeder.module;
        net["dc_feeders"].push_back({{"id", f.feeder.id},
                                     {"v_volt", f.feeder.source_v},
                                     {"r_ohm", f.feeder.r_ohm},
                                     {"l_henry", f.feeder.l_henry},
                                     {"i_init_amp", f.feeder.i_meas},
                                     {"mode", to_string(f.mode)},
                                     {"ref_mode", to_string(f.ref_mode)},
                                     {"p_ref_watt", f.p_ref},
                                     {"share", f.share},
                                     {"droop_slope_ohm", f.droop_slope},
                                     {"mismatch_feedforward", f.mismatch_feedforward},
                                     {"controller",
                                      {{"k_p", m.k_p},
                                       {"k_i", m.k_i},
                                       {"k_r", m.k_r},
                                       {"k_c", m.k_c},
                                       {"k_l", m.k_l},
                                       {"v_max_volt", m.v_max}}}});
    }
    j["network"] = std::move(net);

    const auto& h = s.hub;
    Json hub;
    hub["v_dc_volt"] = h.params.v_dc_nominal;
    hub["c_dc_farad"] = h.params.c_dc;
    hub["v_dc_init_volt"] = h.v_dc_initial > 0.0 ? h.v_dc_initial : h.params.v_dc_nominal;
    hub["collapse_fraction"] = h.collapse_fraction;
    hub["cpl_floor_volt"] = h.cpl_floor;
    hub["vic_loop_z_ohm"] = h.vic_loop_z;
    hub["dab_bandwidth_hz"] = h.dab_bandwidth_hz;
    hub["afe"] = {{"enabled", h.afe.enabled}, {"v_ref_volt", h.afe.v_ref}, {"k_p", h.afe.k_p},
                  {"k_i", h.afe.k_i},         {"v_d_volt", h.afe.v_d},     {"q_ref_var", h.afe.q_ref},
                  {"loss_factor", h.afe.loss_factor}};
    hub["bess"] = {{"enabled", h.bess.enabled},
                   {"capacity_coulomb", h.params.q_battery},
                   {"v_battery_volt", h.params.v_battery},
                   {"power_limit_watt", h.params.p_battery_limit},
                   {"soc_initial", h.bess.soc_initial},
                   {"p_request_watt", h.bess.p_request}};
    hub["loads"] = Json::array();
    for (const auto& l : h.loads) {
        Json lj;
        lj["id"] = l.id;
        const Json model = load_model_json(l.model);
        for (const auto& [k, v] : model.items()) lj[k] = v;
        hub["loads"].push_back(std::move(lj));
    }
    j["hub"] = std::move(hub);

    // Per-feeder gains are explicit above, so the defaults block only needs
    // to reproduce itself.
    j["controllers"] = {{"ripple_cutoff_hz", s.controller.ripple_cutoff_hz},
                        {"v_max_fraction", s.controller.v_max_fraction}};

    j["events"] = Json::array();
    for (const auto& e : s.events) {
        Json ej;
        ej["t_s"] = e.time;
        std::visit(
            [&](const auto& k) {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, event::PRefStep>) {
                    ej["kind"] = "p_ref_step";
                    ej["feeder"] = k.feeder;
                    ej["p_watt"] = k.watts;
                } else if constexpr (std::is_same_v<K, event::QRefStep>) {
                    ej["kind"] = "q_ref_step";
                    ej["feeder"] = k.feeder;
                    ej["q_var"] = k.vars;
                } else if constexpr (std::is_same_v<K, event::LoadStep>) {
                    ej["kind"] = "load_step";
                    ej["load"] = k.load;
                    auto lm = load_model_json(k.model);
                    ej["load_kind"] = lm["kind"];
                    lm.erase("kind");
                    for (auto& [key, v] : lm.items()) ej[key] = v;
                } else if constexpr (std::is_same_v<K, event::VoltageSag>) {
                    ej["kind"] = "voltage_sag";
                    ej["feeder"] = k.feeder;
                    ej["fraction"] = k.fraction;
                    ej["duration_s"] = k.duration;
                } else if constexpr (std::is_same_v<K, event::RippleEnable>) {
                    ej["kind"] = "ripple_enable";
                    ej["feeder"] = k.feeder;
                    ej["delta_i_amp"] = k.delta_i;
                    ej["omega_rad_s"] = k.omega;
                } else if constexpr (std::is_same_v<K, event::ImpedanceChange>) {
                    ej["kind"] = "impedance_change";
                    ej["feeder"] = k.feeder;
                    ej["r_ohm"] = k.r_ohm;
                    ej["x_ohm"] = k.x_ohm;
                    ej["l_henry"] = k.l_henry;
                } else {
                    ej["kind"] = "feeder_bypass";
                    ej["feeder"] = k.feeder;
                }
            },
            e.kind);
        j["events"].push_back(std::move(ej));
    }
    j["output"] = {{"compare", parsed.compare}, {"compare_closed_form", s.compare_closed_form}};
    return j;
}

}  // namespace gridrouter
