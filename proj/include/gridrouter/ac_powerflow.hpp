#pragma once

// Steady-state power flow of one feeder into the AC bus of the router.
//
// Three evaluators are provided and kept separate:
//  - exact phasor products (the model the simulator uses),
//  - the resistive-line closed forms,
//  - the small-angle dq approximations with their cross-coupling terms.
// The closed forms and approximations are not exact; callers that need both
// should compare them explicitly (see closed_form_gap).

#include <array>

#include "gridrouter/core_model.hpp"

namespace gridrouter {

struct PowerPair {
    double p = 0.0;  // W
    double q = 0.0;  // var
};

struct CrossCoupling {
    double dp = 0.0;
    double dq = 0.0;
};

/// Row-major 2x2: {dP/dvd, dP/dvq, dQ/dvd, dQ/dvq}.
using Sensitivity = std::array<double, 4>;

/// (v_feeder - v_bus - v_inj) / Z.
Phasor line_current(Phasor v_feeder, Phasor v_bus, Phasor v_inj, const Impedance& z);

/// P + jQ = V * conj(I).
PowerPair feeder_power_exact(Phasor v_feeder, Phasor i_line);

struct ClosedFormInputs {
    double v_feeder_mag = 0.0;
    double v_bus_mag = 0.0;
    double delta_feeder = 0.0;
    double delta_bus = 0.0;
    Impedance z;
    Phasor v_inj;
    Phasor i_line;
};

PowerPair feeder_power_closed_form(const ClosedFormInputs& in);

/// Small-angle dq approximation including the cross-coupling terms. The bus
/// angle is the frame reference (zero).
PowerPair approx_power_dq(double v_feeder_mag, double v_bus_mag, double delta_feeder,
                          const Impedance& z, DqInjection inj);

CrossCoupling cross_coupling_terms(double v_feeder_mag, double delta_feeder, const Impedance& z,
                                   DqInjection inj);

/// |V|/|Z| times the rotation by the impedance angle.
Sensitivity sensitivity_matrix(double v_feeder_mag, const Impedance& z);

/// Injection phasor produced by a dq command expressed in the frame aligned
/// with the feeder voltage. Positive d drives active power towards the bus.
Phasor injection_phasor(DqInjection cmd, double delta_feeder);

/// Exact power of a feeder whose series module applies `cmd` through
/// injection_phasor. Power is affine in `cmd` with Jacobian sensitivity_matrix.
PowerPair dq_power_exact(Phasor v_feeder, Phasor v_bus, const Impedance& z, DqInjection cmd);

/// Relative gap between the closed forms and the exact products at one
/// operating point, normalised by the exact apparent power.
struct ClosedFormGap {
    PowerPair exact;
    PowerPair closed_form;
    double relative_gap = 0.0;
};

ClosedFormGap closed_form_gap(Phasor v_feeder, Phasor v_bus, Phasor v_inj, const Impedance& z);

}  // namespace gridrouter
