#include "gridrouter/series_control.hpp"

#include <algorithm>
#include <stdexcept>

namespace gridrouter {

namespace {

void require_finite(std::initializer_list<double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(std::string(what) + ": non-finite input");
        }
    }
}

// Returns the saturated output and advances the integrator only when the
// unclamped output is inside the limits.
double pi_axis(double k_p, double k_i, double& integrator, double error, double extra,
               double v_max, double dt) {
    const double candidate = integrator + error * dt;
    const double v = k_p * error + k_i * candidate + extra;
    if (v > v_max) return v_max;
    if (v < -v_max) return -v_max;
    integrator = candidate;
    return v;
}

}  // namespace

DqPair ac_reference_currents(double p_ref, double q_ref, double v_mag) {
    if (v_mag == 0.0 || !std::isfinite(v_mag)) {
        throw std::invalid_argument("ac_reference_currents: voltage magnitude must be nonzero");
    }
    return {p_ref / v_mag, q_ref / v_mag};
}

DqInjection ac_pi_step(AcSeriesModuleState& state, DqPair i_ref, DqPair i_meas,
                       DqPair feedforward, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("ac_pi_step: dt must be positive");
    require_finite({i_ref.d, i_ref.q, i_meas.d, i_meas.q, feedforward.d, feedforward.q},
                   "ac_pi_step");
    DqInjection out;
    out.d = pi_axis(state.k_p, state.k_i, state.integrator_d, i_ref.d - i_meas.d, feedforward.d,
                    state.v_max, dt);
    out.q = pi_axis(state.k_p, state.k_i, state.integrator_q, i_ref.q - i_meas.q, feedforward.q,
                    state.v_max, dt);
    state.last_injection = out;
    return out;
}

DqPair mismatch_feedforward(double v_mag_k, Phasor v_bus, Phasor v_feeder, double dtheta,
                            double delta_k) {
    const double phase = 2.0 * v_mag_k * std::sin(dtheta / 2.0);
    return {phase * std::cos(delta_k), (v_feeder - v_bus).magnitude() + phase * std::sin(delta_k)};
}

double virtual_inertia_term(double k_c, double k_l, double dvdc_dt, double de_dt) {
    return k_c * dvdc_dt + k_l * de_dt;
}

double dc_injection_step(DcSeriesModuleState& state, const DcStepInputs& in, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("dc_injection_step: dt must be positive");
    require_finite({in.i_ref, in.i_meas, in.v_ripple_meas, in.v_dc, in.v_mismatch},
                   "dc_injection_step");

    const double error = in.i_ref - in.i_meas;
    const double dv_dt = state.prev_v_dc ? (in.v_dc - *state.prev_v_dc) / dt : 0.0;
    const double de_dt = state.prev_error ? (error - *state.prev_error) / dt : 0.0;

    const double extra = -state.k_r * in.v_ripple_meas +
                         virtual_inertia_term(state.k_c, state.k_l, dv_dt, de_dt) + in.v_mismatch;
    const double v = pi_axis(state.k_p, state.k_i, state.integrator, error, extra, state.v_max, dt);

    state.prev_error = error;
    state.prev_v_dc = in.v_dc;
    state.last_injection = v;
    return v;
}

double dc_mismatch(double v_i, double v_j) { return std::abs(v_i - v_j); }

double droop_step(double v0, double droop_slope, double i_meas) {
    if (droop_slope < 0.0) throw std::invalid_argument("droop_step: slope must be non-negative");
    return v0 - droop_slope * i_meas;
}

RippleFilter::RippleFilter(double cutoff_hz, double dt) {
    if (!(cutoff_hz > 0.0) || !(dt > 0.0)) {
        throw std::invalid_argument("RippleFilter: cutoff and dt must be positive");
    }
    const double rc = 1.0 / angular_frequency(cutoff_hz);
    a_ = rc / (rc + dt);
}

double RippleFilter::update(double x) {
    if (!primed_) {
        primed_ = true;
        x_prev_ = x;
        y_ = 0.0;
        return 0.0;
    }
    y_ = a_ * (y_ + x - x_prev_);
    x_prev_ = x;
    return y_;
}

}  // namespace gridrouter
