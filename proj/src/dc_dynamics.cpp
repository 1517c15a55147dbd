#include "gridrouter/dc_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridrouter {

namespace {
template <class... Ts>
struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

void validate(const LoadModel& load) {
    std::visit(overloaded{
                   [](const ResistiveLoad& l) {
                       if (!(l.r_ohm > 0.0)) throw std::invalid_argument("resistive load: r_ohm must be positive");
                   },
                   [](const ConstantPowerLoad& l) {
                       if (!std::isfinite(l.p_watt)) throw std::invalid_argument("constant power load: p_watt must be finite");
                   },
                   [](const ConstantCurrentLoad& l) {
                       if (!std::isfinite(l.i_amp)) throw std::invalid_argument("constant current load: i_amp must be finite");
                   },
                   [](const RippleSource& l) {
                       if (!(l.omega > 0.0)) throw std::invalid_argument("ripple source: omega must be positive");
                       if (!std::isfinite(l.delta_i)) throw std::invalid_argument("ripple source: delta_i must be finite");
                   },
               },
               load);
}

double load_current(const LoadModel& load, double v, double t, double v_floor) {
    return std::visit(overloaded{
                          [&](const ResistiveLoad& l) { return v / l.r_ohm; },
                          [&](const ConstantPowerLoad& l) { return cpl_current(l.p_watt, v, v_floor); },
                          [&](const ConstantCurrentLoad& l) { return l.i_amp; },
                          [&](const RippleSource& l) { return l.delta_i * std::sin(l.omega * t); },
                      },
                      load);
}

double dc_link_derivative(double c, double i_dc, double i_meas) {
    if (!(c > 0.0)) throw std::invalid_argument("dc_link_derivative: capacitance must be positive");
    return (i_dc - i_meas) / c;
}

double line_current_derivative(double l, double r, double i, double v_dc, double v_inj) {
    if (!(l > 0.0)) throw std::invalid_argument("line_current_derivative: inductance must be positive");
    return (v_dc - v_inj - r * i) / l;
}

double cpl_current(double p, double v, double v_floor) {
    if (!(v_floor > 0.0)) throw std::invalid_argument("cpl_current: v_floor must be positive");
    return p / std::max(v, v_floor);
}

double ripple_voltage(double delta_i, double omega, double c_dc) {
    if (!(omega > 0.0)) throw std::invalid_argument("ripple_voltage: omega must be positive");
    if (!(c_dc > 0.0)) throw std::invalid_argument("ripple_voltage: capacitance must be positive");
    return delta_i / (omega * c_dc);
}

double effective_ripple(double delta_v_ripple, double v_series) { return delta_v_ripple - v_series; }

double required_capacitance(double delta_i, double omega, double delta_v_effective) {
    if (!(delta_v_effective > 0.0)) {
        throw std::invalid_argument("required_capacitance: effective ripple must be positive");
    }
    return delta_i / (omega * delta_v_effective);
}

HoldupTime holdup_time(double c, double v_init, double v_min, double p_load, double q_battery,
                       double v_battery) {
    if (!(p_load > 0.0)) throw std::invalid_argument("holdup_time: load power must be positive");
    if (!(v_min >= 0.0) || !(v_init >= v_min)) {
        throw std::invalid_argument("holdup_time: need V_init >= V_min >= 0");
    }
    const double dv2 = v_init * v_init - v_min * v_min;
    HoldupTime h;
    h.t_capacitor = 2.0 * c * dv2 / p_load;
    h.t_battery = q_battery * v_battery / p_load;
    h.t_total = h.t_capacitor + h.t_battery;
    h.t_capacitor_energy_based = 0.5 * c * dv2 / p_load;
    return h;
}

void rk4_step(std::vector<double>& x, double t, double dt, const Derivative& f) {
    Rk4 rk(x.size());
    if (!rk.step(x, t, dt, f)) throw std::runtime_error("rk4_step: non-finite state");
}

DcPlantState integrate_step(const DcPlantState& s, double t, double dt, const PlantDerivative& f) {
    if (!(dt > 0.0)) throw std::invalid_argument("integrate_step: dt must be positive");
    std::vector<double> x{s.v_dc, s.i_meas};
    rk4_step(x, t, dt, [&](double tt, std::span<const double> xs, std::span<double> d) {
        const auto dd = f(tt, {xs[0], xs[1]});
        d[0] = dd.v_dc;
        d[1] = dd.i_meas;
    });
    return {x[0], x[1]};
}

}  // namespace gridrouter
