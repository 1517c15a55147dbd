#include "gridrouter/hub_balance.hpp"

#include <algorithm>
#include <stdexcept>

namespace gridrouter {

PowerPair afe_power(double v_d, double v_q, double i_d, double i_q) {
    return {1.5 * (v_d * i_d + v_q * i_q), 1.5 * (v_d * i_q - v_q * i_d)};
}

double afe_power_aligned(double v_d, double i_d) { return 1.5 * (v_d * i_d); }

double dc_feeder_power(double v_dc, double v_inj, double i_line) { return (v_dc + v_inj) * i_line; }

double bus_balance_residual(double p_afe_dc, double p_bess, std::span<const double> feeder_powers) {
    double out = p_afe_dc + p_bess;
    for (double p : feeder_powers) out -= p;
    return out;
}

PartialPower partial_power_metrics(double v_bus, double v_inj, double i_line) {
    if (!(v_bus > 0.0)) throw std::invalid_argument("partial_power_metrics: V_bus must be positive");
    PartialPower out;
    out.p_transfer = v_bus * i_line;
    out.p_series = v_inj * i_line;
    if (i_line != 0.0) out.fraction = std::abs(v_inj / v_bus);
    return out;
}

BessState bess_step(BessState state, double p_request, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("bess_step: dt must be positive");
    double p = std::clamp(p_request, -state.power_limit, state.power_limit);
    if (state.capacity <= 0.0 || state.voltage <= 0.0) {
        p = 0.0;
    } else if (p > 0.0) {
        p = std::min(p, state.charge * state.voltage / dt);
    } else if (p < 0.0) {
        p = std::max(p, -(state.capacity - state.charge) * state.voltage / dt);
    }
    if (p != 0.0) {
        state.charge = std::clamp(state.charge - p * dt / state.voltage, 0.0, state.capacity);
    }
    state.power = p;
    return state;
}

}  // namespace gridrouter
