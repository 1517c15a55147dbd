#include <iostream>

#include <CLI11.hpp>

#include "gridrouter/commands.hpp"

using namespace gridrouter;

int main(int argc, char** argv) {
    CLI::App app{"Star-topology grid router simulator"};
    app.require_subcommand(1);

    std::string sim_file;
    SimulateOptions sim;
    std::string sim_out = ".";
    auto* simulate = app.add_subcommand("simulate", "run a scenario, write trace CSV and report JSON");
    simulate->add_option("file", sim_file, "scenario JSON")->required();
    simulate->add_option("--out", sim_out, "output directory");
    simulate->add_flag("--compare-closed-form", sim.compare_closed_form,
                       "report the gap between the closed-form and exact AC powers");

    StabilityOptions stab;
    std::string stab_scenario, stab_feeder, stab_bode;
    auto* stability = app.add_subcommand("stability", "small-signal checks for one DC feeder loop");
    auto* scen_opt = stability->add_option("--scenario", stab_scenario, "take parameters from a scenario");
    stability->add_option("--feeder", stab_feeder, "DC feeder id (default: first series-module feeder)")
        ->needs(scen_opt);
    auto& p = stab.params;
    p = SmallSignalParams{450e-6, 1.0, 300e-6, 100.0, 50.0, 0.0, 0.0, 0.0, 1.0};
    for (auto [name, field, desc] : {std::tuple{"--l", &p.l, "line inductance, H"},
                                     std::tuple{"--r", &p.r, "line resistance, ohm"},
                                     std::tuple{"--c", &p.c, "link capacitance, F"},
                                     std::tuple{"--kp", &p.k_p, "proportional gain"},
                                     std::tuple{"--ki", &p.k_i, "integral gain"},
                                     std::tuple{"--kl", &p.k_l, "derivative current gain"},
                                     std::tuple{"--kc", &p.k_c, "virtual-inertia gain"},
                                     std::tuple{"--kr", &p.k_r, "ripple feedforward gain"},
                                     std::tuple{"--z", &p.z, "virtual-inertia loop impedance, ohm"}}) {
        stability->add_option(name, *field, desc)->excludes(scen_opt)->capture_default_str();
    }
    stability->add_option("--bode", stab_bode, "write baseline/ripple/inertia Bode CSV");
    stability->add_option("--f-min", stab.bode_options.f_min, "Hz")->capture_default_str();
    stability->add_option("--f-max", stab.bode_options.f_max, "Hz")->capture_default_str();
    stability->add_option("--points", stab.bode_options.points)->capture_default_str();

    std::string sweep_file, sweep_out;
    SweepOptions sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "run one scenario per parameter value");
    sweep_cmd->add_option("file", sweep_file, "scenario JSON")->required();
    sweep_cmd->add_option("--param", sweep.param, "JSON pointer into the canonical scenario")->required();
    sweep_cmd->add_option("--values", sweep.values, "values to substitute")->required()->expected(1, -1);
    sweep_cmd->add_option("--out", sweep_out, "CSV file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    if (*simulate) {
        sim.out_dir = sim_out;
        return cmd_simulate(sim_file, sim, std::cout, std::cerr);
    }
    if (*stability) {
        if (!stab_scenario.empty()) stab.scenario = stab_scenario;
        if (!stab_feeder.empty()) stab.feeder = stab_feeder;
        if (!stab_bode.empty()) stab.bode = stab_bode;
        return cmd_stability(stab, std::cout, std::cerr);
    }
    if (!sweep_out.empty()) sweep.out_file = sweep_out;
    return cmd_sweep(sweep_file, sweep, std::cout, std::cerr);
}
