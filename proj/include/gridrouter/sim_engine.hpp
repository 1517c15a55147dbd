#pragma once

// Time-domain runs over the star network: N AC feeders into a stiff AC bus,
// M DC feeders into the hub DC link, with AFE, battery and hub loads.
//
// Tick order is fixed: apply due events, sample measurements (the state at
// the end of the previous tick), run controllers, integrate the plant with
// controller outputs held, account the hub balance, record.
//
// Sign conventions used by the engine:
//  - DC feeder current i_k flows from the feeder source into the hub link,
//    and a positive module injection aids it:
//        L di/dt = V_src - V_dc + v_inj - R i
//  - AC line currents follow (V_k - V_bus - V_inj)/Z; the module command is
//    mapped through the inverse sensitivity rotation so that the d axis
//    steers P and the q axis steers Q.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gridrouter/ac_powerflow.hpp"
#include "gridrouter/dc_dynamics.hpp"
#include "gridrouter/hub_balance.hpp"
#include "gridrouter/series_control.hpp"
#include "gridrouter/small_signal.hpp"

namespace gridrouter {

enum class ControlMode { series_module, droop, none };
enum class RefMode { setpoint, share };

const char* to_string(ControlMode m);
const char* to_string(RefMode m);

struct DcFeederConfig {
    DcFeeder feeder;
    ControlMode mode = ControlMode::series_module;
    RefMode ref_mode = RefMode::setpoint;
    double p_ref = 0.0;         // W, setpoint mode; i_ref = p_ref / V_dc nominal
    double share = 0.0;         // fraction of the total DC feeder current, share mode
    double droop_slope = 0.5;   // ohm, droop mode
    bool mismatch_feedforward = true;
};

struct AcFeederConfig {
    AcFeeder feeder;
    ControlMode mode = ControlMode::series_module;
    bool mismatch_feedforward = true;
};

struct AfeConfig {
    bool enabled = false;
    double v_ref = 0.0;       // V, defaults to the hub nominal
    double k_p = 2.0;         // A/V on the d-axis current command
    double k_i = 200.0;       // A/(V s)
    double v_d = 325.0;       // V, aligned grid voltage
    double q_ref = 0.0;       // var
    double loss_factor = 1.0;
};

struct BessConfig {
    bool enabled = false;
    double soc_initial = 0.5;
    double p_request = 0.0;   // W, positive discharges into the bus
};

struct HubLoad {
    std::string id;
    LoadModel model;
};

struct HubConfig {
    HubParams params;
    double v_dc_initial = 0.0;  // 0 means nominal
    AfeConfig afe;
    BessConfig bess;
    std::vector<HubLoad> loads;
    double collapse_fraction = 0.5;
    double cpl_floor = kDefaultCplFloor;
    double vic_loop_z = 1.0;    // ohm, loop impedance for the virtual-inertia predicate
    // The DAB feeding the DC modules follows their power only below this
    // bandwidth; faster power swings are buffered on the module side.
    double dab_bandwidth_hz = 1.0;
};

struct ControllerDefaults {
    double ripple_cutoff_hz = kDefaultRippleCutoffHz;
    double v_max_fraction = 0.1;
};

namespace event {
struct PRefStep { std::string feeder; double watts = 0.0; };
struct QRefStep { std::string feeder; double vars = 0.0; };
struct LoadStep { std::string load; LoadModel model; };
struct VoltageSag { std::string feeder; double fraction = 0.0; double duration = 0.0; };
struct RippleEnable { std::string feeder; double delta_i = 0.0; double omega = 0.0; };
/// For DC feeders x is ignored and l_henry replaces the inductance when > 0.
struct ImpedanceChange { std::string feeder; double r_ohm = 0.0; double x_ohm = 0.0; double l_henry = 0.0; };
struct FeederBypass { std::string feeder; };
}  // namespace event

using EventKind = std::variant<event::PRefStep, event::QRefStep, event::LoadStep, event::VoltageSag,
                               event::RippleEnable, event::ImpedanceChange, event::FeederBypass>;

struct Event {
    double time = 0.0;
    EventKind kind;
};

struct Scenario {
    std::string name;
    double duration = 0.0;
    double dt = 100e-6;
    double sample_period = 1e-4;
    double grid_hz = kDefaultGridHz;
    Phasor v_bus{230.0, 0.0};
    std::vector<AcFeederConfig> ac;
    std::vector<DcFeederConfig> dc;
    HubConfig hub;
    ControllerDefaults controller;
    std::vector<Event> events;
    bool compare_closed_form = false;
};

/// Throws std::invalid_argument describing the first violated invariant.
void validate(const Scenario& s);

/// Time-varying feeder conditions layered on the static configuration.
struct FeederCondition {
    bool bypassed = false;
    double sag_fraction = 0.0;
    double sag_until = -1.0;
    double ripple_v = 0.0;     // V amplitude on the source
    double ripple_omega = 0.0;
};

/// Mutable network description the events act upon.
struct Network {
    std::vector<AcFeederConfig> ac;
    std::vector<DcFeederConfig> dc;
    std::vector<FeederCondition> ac_cond;
    std::vector<FeederCondition> dc_cond;
    std::vector<HubLoad> loads;
    double c_dc = 0.0;
    double now = 0.0;  // event time of the most recent update

    static Network from(const Scenario& s);
    double ac_sag_factor(std::size_t k, double t) const;
    double dc_source_voltage(std::size_t k, double t) const;
};

/// Structural update for one event. Throws std::invalid_argument for an
/// unknown feeder or load id.
Network apply_event(Network net, const Event& e);

enum class Verdict { completed, collapsed, diverged };
const char* to_string(Verdict v);

struct Trace {
    double sample_period = 0.0;
    std::vector<std::string> names;
    std::vector<double> time;
    std::vector<std::vector<double>> columns;
    Verdict verdict = Verdict::completed;
    std::optional<std::uint64_t> failure_tick;
    std::optional<double> closed_form_max_gap;

    std::span<const double> column(const std::string& name) const;
    bool has(const std::string& name) const;
};

Trace run_scenario(const Scenario& s);

/// Amplitude of the f-frequency component by single-bin projection over the
/// longest trailing window spanning a whole number of periods. Throws when
/// fewer than 10 periods are available.
double ripple_amplitude(std::span<const double> signal, double sample_period, double f_hz);

/// Small-signal parameters of a DC feeder's loop at the hub.
SmallSignalParams small_signal_params(const Scenario& s, const DcFeederConfig& f);

struct FeederSummary {
    std::string id;
    double final_current = 0.0;
    std::optional<double> i_ref;
    std::optional<double> settling_time;
    std::optional<double> steady_state_error;  // relative
    std::optional<double> partial_power_fraction;
    std::optional<double> ripple_amplitude;
    std::optional<StabilityVerdict> stability;
    std::optional<bool> vic_stable;
};

struct RunSummary {
    Verdict verdict = Verdict::completed;
    std::vector<FeederSummary> dc;
    std::vector<FeederSummary> ac;
    std::optional<double> sharing_error;
    std::optional<double> ripple_hz;
    std::optional<double> v_dc_ripple_amplitude;
    std::optional<double> max_balance_residual_ratio;
    std::optional<double> closed_form_max_gap;
};

inline constexpr double kSettlingBand = 0.02;

RunSummary summarize(const Scenario& s, const Trace& t);

/// Same scenario with every DC module's ripple gain set to zero.
Scenario without_ripple_feedforward(Scenario s);

/// Same scenario with every DC feeder switched to droop control.
Scenario as_droop(Scenario s);

}  // namespace gridrouter
