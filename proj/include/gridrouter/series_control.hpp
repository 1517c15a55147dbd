#pragma once

// Discrete-time controllers for the series modules.
//
// Integrators use conditional integration: while an axis saturates at
// +/-v_max the integrator keeps the value it had when saturation began.
// Derivatives are backward differences over stored previous samples and are
// zero on the first call.

#include "gridrouter/core_model.hpp"

namespace gridrouter {

/// (P_ref/|V|, Q_ref/|V|). Throws for |V| == 0.
DqPair ac_reference_currents(double p_ref, double q_ref, double v_mag);

/// One PI step per dq axis with feedforward. Mutates the state.
DqInjection ac_pi_step(AcSeriesModuleState& state, DqPair i_ref, DqPair i_meas,
                       DqPair feedforward, double dt);

/// Phase/magnitude mismatch feedforward, evaluated exactly as published.
DqPair mismatch_feedforward(double v_mag_k, Phasor v_bus, Phasor v_feeder, double dtheta,
                            double delta_k);

struct DcStepInputs {
    double i_ref = 0.0;
    double i_meas = 0.0;
    double v_ripple_meas = 0.0;
    double v_dc = 0.0;
    double v_mismatch = 0.0;
};

/// PI + ripple feedforward + virtual inertia + mismatch feedforward.
double dc_injection_step(DcSeriesModuleState& state, const DcStepInputs& in, double dt);

double virtual_inertia_term(double k_c, double k_l, double dvdc_dt, double de_dt);

/// |v_i - v_j|
double dc_mismatch(double v_i, double v_j);

/// V0 - m i. Throws for m < 0.
double droop_step(double v0, double droop_slope, double i_meas);

/// First-order high-pass filter, discretised as
/// y[n] = a (y[n-1] + x[n] - x[n-1]), a = RC / (RC + dt).
/// The first sample primes the filter and yields zero.
class RippleFilter {
public:
    RippleFilter() = default;
    RippleFilter(double cutoff_hz, double dt);

    double update(double x);
    void reset() { primed_ = false; y_ = 0.0; }

private:
    double a_ = 0.0;
    double x_prev_ = 0.0;
    double y_ = 0.0;
    bool primed_ = false;
};

inline constexpr double kDefaultRippleCutoffHz = 10.0;

}  // namespace gridrouter
