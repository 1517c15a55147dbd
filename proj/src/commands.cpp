#include "gridrouter/commands.hpp"

#include <cmath>
#include <complex>
#include <ostream>
#include <sstream>

#include "gridrouter/kernels.hpp"

namespace gridrouter {

namespace {

Json opt_num(const std::optional<double>& v) {
    if (!v || !std::isfinite(*v)) return nullptr;
    return *v;
}

std::string opt_cell(const std::optional<double>& v) {
    return v && std::isfinite(*v) ? format_double(*v) : std::string();
}

Json feeder_json(const FeederSummary& f) {
    Json j;
    j["id"] = f.id;
    j["final_current_amp"] = opt_num(f.final_current);
    j["i_ref_amp"] = opt_num(f.i_ref);
    j["settling_time_s"] = opt_num(f.settling_time);
    j["steady_state_error"] = opt_num(f.steady_state_error);
    j["partial_power_fraction"] = opt_num(f.partial_power_fraction);
    j["ripple_amplitude_amp"] = opt_num(f.ripple_amplitude);
    j["stability"] = f.stability ? Json(to_string(*f.stability)) : Json(nullptr);
    j["vic_stable"] = f.vic_stable ? Json(*f.vic_stable) : Json(nullptr);
    return j;
}

std::string complex_text(std::complex<double> z) {
    std::ostringstream ss;
    ss << format_double(z.real());
    if (z.imag() != 0.0) ss << (z.imag() < 0 ? " - " : " + ") << format_double(std::abs(z.imag())) << "j";
    return ss.str();
}

const DcFeederConfig* stability_feeder(const Scenario& s, const std::optional<std::string>& id) {
    for (const auto& f : s.dc) {
        if (id ? f.feeder.id == *id : f.mode == ControlMode::series_module) return &f;
    }
    return nullptr;
}

}  // namespace

int exit_code(Verdict v) {
    switch (v) {
        case Verdict::completed: return kExitCompleted;
        case Verdict::collapsed: return kExitCollapsed;
        case Verdict::diverged: return kExitDiverged;
    }
    return kExitUsage;
}

Json summary_json(const RunSummary& s) {
    Json j;
    j["verdict"] = to_string(s.verdict);
    j["dc_feeders"] = Json::array();
    for (const auto& f : s.dc) j["dc_feeders"].push_back(feeder_json(f));
    j["ac_feeders"] = Json::array();
    for (const auto& f : s.ac) j["ac_feeders"].push_back(feeder_json(f));
    j["sharing_error"] = opt_num(s.sharing_error);
    j["ripple_hz"] = opt_num(s.ripple_hz);
    j["v_dc_ripple_amplitude_volt"] = opt_num(s.v_dc_ripple_amplitude);
    j["max_balance_residual_ratio"] = opt_num(s.max_balance_residual_ratio);
    j["closed_form_max_relative_gap"] = opt_num(s.closed_form_max_gap);
    return j;
}

Json run_report(const ParsedScenario& parsed, const Trace& trace) {
    Json j;
    j["schema"] = kSchemaVersion;
    j["scenario"] = parsed.scenario.name;
    j["digest"] = parsed.digest;
    j["verdict"] = to_string(trace.verdict);
    j["exit_code"] = exit_code(trace.verdict);
    j["failure_tick"] = trace.failure_tick ? Json(*trace.failure_tick) : Json(nullptr);
    j["defaults"] = Json::array();
    for (const auto& d : parsed.defaults) j["defaults"].push_back({{"path", d.path}, {"value", d.value}});
    j["summary"] = summary_json(summarize(parsed.scenario, trace));
    return j;
}

int cmd_simulate(const std::filesystem::path& file, const SimulateOptions& opt, std::ostream& out,
                 std::ostream& err) {
    ParsedScenario parsed;
    try {
        parsed = parse_scenario(file);
    } catch (const ScenarioError& e) {
        for (const auto& p : e.problems()) err << file.string() << ": " << p << "\n";
        return kExitUsage;
    }
    if (opt.compare_closed_form) parsed.scenario.compare_closed_form = true;

    std::vector<Scenario> runs{parsed.scenario};
    for (const auto& c : parsed.compare) runs.push_back(c == "kr_off" ? without_ripple_feedforward(parsed.scenario)
                                                                     : as_droop(parsed.scenario));
    const auto traces = kernels::parallel::run_scenarios(runs);

    Json report = run_report(parsed, traces[0]);
    const auto base = summarize(parsed.scenario, traces[0]);
    try {
        std::filesystem::create_directories(opt.out_dir);
        const auto stem = opt.out_dir / parsed.scenario.name;
        Json files = Json::array();
        write_file(stem.string() + ".csv", trace_csv(traces[0]));
        files.push_back(stem.string() + ".csv");

        Json comparisons = Json::object();
        for (std::size_t k = 0; k < parsed.compare.size(); ++k) {
            const auto& name = parsed.compare[k];
            const auto& tr = traces[k + 1];
            const auto sum = summarize(runs[k + 1], tr);
            Json c;
            c["verdict"] = to_string(tr.verdict);
            c["summary"] = summary_json(sum);
            if (name == "kr_off") {
                Json ratios = Json::object();
                for (std::size_t i = 0; i < base.dc.size(); ++i) {
                    const auto& on = base.dc[i].ripple_amplitude;
                    const auto& off = sum.dc[i].ripple_amplitude;
                    ratios[base.dc[i].id] = (on && off && *off > 0.0) ? Json(*on / *off) : Json(nullptr);
                }
                c["ripple_ratio_on_over_off"] = std::move(ratios);
            } else {
                c["sharing_error_series_module"] = opt_num(base.sharing_error);
                c["sharing_error_droop"] = opt_num(sum.sharing_error);
            }
            const auto path = stem.string() + "." + name + ".csv";
            write_file(path, trace_csv(tr));
            files.push_back(path);
            comparisons[name] = std::move(c);
        }
        report["comparisons"] = std::move(comparisons);
        const auto report_path = stem.string() + ".report.json";
        files.push_back(report_path);
        report["files"] = std::move(files);
        write_file(report_path, report.dump(2) + "\n");
        out << parsed.scenario.name << ": " << to_string(traces[0].verdict) << " -> " << report_path << "\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return exit_code(traces[0].verdict);
}

std::string stability_text(const SmallSignalParams& p) {
    validate(p);
    const auto poly = characteristic_poly(p);
    const auto [p1, p2] = poles(poly);
    std::ostringstream ss;
    ss << "characteristic: [" << format_double(poly[0]) << ", " << format_double(poly[1]) << ", "
       << format_double(poly[2]) << "]\n";
    ss << "poles: " << complex_text(p1) << ", " << complex_text(p2) << "\n";
    ss << "damping condition: " << (is_stable_condition(p) ? "holds" : "violated") << "\n";
    ss << "verdict: " << to_string(classify_stability(p)) << "\n";
    ss << "virtual inertia: " << (vic_stable(p.c, p.k_c, p.z) ? "stable" : "unstable") << "\n";
    ss << "current-loop pole: " << format_double(current_loop_pole(p.r, p.l, p.k_l)) << "\n";
    return ss.str();
}

std::string bode_triad_csv(const SmallSignalParams& p, const BodeOptions& opt) {
    SmallSignalParams baseline = p;
    baseline.k_c = baseline.k_r = baseline.k_l = 0.0;
    SmallSignalParams ripple = baseline;
    ripple.k_r = p.k_r;
    SmallSignalParams inertia = baseline;
    inertia.k_c = p.k_c;
    inertia.k_l = p.k_l;

    const SmallSignalParams* configs[] = {&baseline, &ripple, &inertia};
    const char* names[] = {"baseline", "ripple_mitigated", "inertia"};
    std::vector<std::vector<BodePoint>> cols;
    for (const auto* c : configs) {
        cols.push_back(bode_sample(closed_loop_tf(*c), opt.f_min, opt.f_max, opt.points));
        cols.push_back(bode_sample(vic_tf(c->c, c->k_c, c->z), opt.f_min, opt.f_max, opt.points));
    }

    std::string csv = "f_hz";
    for (const char* n : names) {
        for (const char* part : {"current", "link"}) {
            csv += std::string(",") + n + "_" + part + "_gain_db," + n + "_" + part + "_phase_deg";
        }
    }
    csv += "\r\n";
    for (std::size_t row = 0; row < cols[0].size(); ++row) {
        csv += format_double(cols[0][row].f_hz);
        for (const auto& c : cols) csv += "," + format_double(c[row].gain_db) + "," + format_double(c[row].phase_deg);
        csv += "\r\n";
    }
    return csv;
}

int cmd_stability(const StabilityOptions& opt, std::ostream& out, std::ostream& err) {
    SmallSignalParams p = opt.params;
    if (opt.scenario) {
        try {
            const auto parsed = parse_scenario(*opt.scenario);
            const auto* f = stability_feeder(parsed.scenario, opt.feeder);
            if (!f) {
                err << "error: no " << (opt.feeder ? "DC feeder '" + *opt.feeder + "'" : "series-module DC feeder")
                    << " in " << opt.scenario->string() << "\n";
                return kExitUsage;
            }
            p = small_signal_params(parsed.scenario, *f);
            out << "feeder: " << f->feeder.id << "\n";
        } catch (const ScenarioError& e) {
            for (const auto& problem : e.problems()) err << opt.scenario->string() << ": " << problem << "\n";
            return kExitUsage;
        }
    }
    try {
        out << stability_text(p);
        if (opt.bode) {
            write_file(*opt.bode, bode_triad_csv(p, opt.bode_options));
            out << "bode: " << opt.bode->string() << "\n";
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitCompleted;
}

std::vector<Scenario> sweep_scenarios(const ParsedScenario& base, const std::string& pointer,
                                      const std::vector<double>& values) {
    if (values.empty()) throw ScenarioError({"sweep: no values given"});
    const Json canonical = to_canonical_json(base);
    Json::json_pointer ptr;
    try {
        ptr = Json::json_pointer(pointer);
    } catch (const nlohmann::json::exception&) {
        throw ScenarioError({"sweep: malformed parameter path '" + pointer + "'"});
    }
    if (!canonical.contains(ptr) || !canonical.at(ptr).is_number()) {
        throw ScenarioError({"sweep: '" + pointer + "' does not name a numeric scenario field"});
    }
    std::vector<Scenario> out;
    out.reserve(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
        Json doc = canonical;
        doc[ptr] = values[k];
        try {
            out.push_back(parse_scenario_text(doc.dump()).scenario);
        } catch (const ScenarioError& e) {
            std::vector<std::string> problems;
            for (const auto& p : e.problems()) problems.push_back("value " + format_double(values[k]) + ": " + p);
            throw ScenarioError(problems);
        }
    }
    return out;
}

std::string sweep_csv(const std::vector<Scenario>& scenarios, const std::vector<double>& values,
                      const std::vector<Trace>& traces) {
    std::string csv = "value,verdict,failure_tick";
    for (const auto& f : scenarios.front().dc) {
        const auto& id = f.feeder.id;
        csv += "," + id + "_settling_s," + id + "_steady_state_error," + id + "_ripple_amp," + id + "_stability";
    }
    csv += ",sharing_error,v_dc_ripple_volt,max_balance_residual_ratio\r\n";
    for (std::size_t k = 0; k < scenarios.size(); ++k) {
        const auto sum = summarize(scenarios[k], traces[k]);
        csv += format_double(values[k]) + "," + to_string(sum.verdict) + ",";
        if (traces[k].failure_tick) csv += std::to_string(*traces[k].failure_tick);
        for (const auto& f : sum.dc) {
            csv += "," + opt_cell(f.settling_time) + "," + opt_cell(f.steady_state_error) + "," +
                   opt_cell(f.ripple_amplitude) + "," + (f.stability ? to_string(*f.stability) : "");
        }
        csv += "," + opt_cell(sum.sharing_error) + "," + opt_cell(sum.v_dc_ripple_amplitude) + "," +
               opt_cell(sum.max_balance_residual_ratio) + "\r\n";
    }
    return csv;
}

int cmd_sweep(const std::filesystem::path& file, const SweepOptions& opt, std::ostream& out, std::ostream& err) {
    std::vector<Scenario> scenarios;
    try {
        scenarios = sweep_scenarios(parse_scenario(file), opt.param, opt.values);
    } catch (const ScenarioError& e) {
        for (const auto& p : e.problems()) err << file.string() << ": " << p << "\n";
        return kExitUsage;
    }
    const auto traces = kernels::parallel::run_scenarios(scenarios);
    const auto csv = sweep_csv(scenarios, opt.values, traces);
    try {
        if (opt.out_file) write_file(*opt.out_file, csv);
        else out << csv;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitCompleted;
}

}  // namespace gridrouter
