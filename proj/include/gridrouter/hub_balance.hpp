#pragma once

// Power accounting at the router hub: AFE powers, DC feeder powers, the
// lossless DC-bus balance, partial-power metrics and battery bookkeeping.

#include <optional>
#include <span>

#include "gridrouter/ac_powerflow.hpp"

namespace gridrouter {

struct AfeState {
    double v_d = 0.0;
    double v_q = 0.0;
    double i_d = 0.0;
    double i_q = 0.0;
    double v_dc = 0.0;
    double i_afe_dc = 0.0;
};

/// Battery at the hub. Positive power means discharge into the bus.
struct BessState {
    double charge = 0.0;       // C
    double capacity = 0.0;     // C
    double voltage = 48.0;     // V
    double power = 0.0;        // W, last delivered
    double power_limit = 0.0;  // W
    double soc() const { return capacity > 0.0 ? charge / capacity : 0.0; }
};

/// (3/2)(vd id + vq iq), (3/2)(vd iq - vq id)
PowerPair afe_power(double v_d, double v_q, double i_d, double i_q);

/// (3/2) vd id, valid when the frame is aligned (vq = 0).
double afe_power_aligned(double v_d, double i_d);

/// (V_dc + v_inj) i_line
double dc_feeder_power(double v_dc, double v_inj, double i_line);

/// P_afe_dc + P_bess - sum(P_dc,k)
double bus_balance_residual(double p_afe_dc, double p_bess, std::span<const double> feeder_powers);

struct PartialPower {
    double p_transfer = 0.0;
    double p_series = 0.0;
    std::optional<double> fraction;  // absent when no power is transferred
};

PartialPower partial_power_metrics(double v_bus, double v_inj, double i_line);

/// Delivers the request clamped to the power limit and to the charge
/// available over dt (discharge) or the headroom left (charge).
BessState bess_step(BessState state, double p_request, double dt);

}  // namespace gridrouter
