#include "gridrouter/ac_powerflow.hpp"

#include <algorithm>
#include <stdexcept>

namespace gridrouter {

Phasor line_current(Phasor v_feeder, Phasor v_bus, Phasor v_inj, const Impedance& z) {
    require_nonzero(z, "line_current");
    const Complex drive = v_feeder.complex() - v_bus.complex() - v_inj.complex();
    return Phasor(drive / z.complex());
}

PowerPair feeder_power_exact(Phasor v_feeder, Phasor i_line) {
    const Complex s = v_feeder.complex() * std::conj(i_line.complex());
    return {s.real(), s.imag()};
}

PowerPair feeder_power_closed_form(const ClosedFormInputs& in) {
    require_nonzero(in.z, "feeder_power_closed_form");
    const double zmag = in.z.magnitude();
    const double zang = std::atan2(in.z.x, in.z.r);
    const double dd = in.delta_feeder - in.delta_bus;
    const double k = in.v_feeder_mag * in.v_bus_mag / zmag;

    const double inj = in.v_inj.magnitude() * in.i_line.magnitude();
    const double rel = in.v_inj.angle() - in.i_line.angle();

    PowerPair out;
    out.p = k * (std::cos(zang) * std::cos(dd) + std::sin(zang) * std::sin(dd)) + inj * std::cos(rel);
    out.q = k * (std::sin(zang) * std::cos(dd) - std::cos(zang) * std::sin(dd)) + inj * std::sin(rel);
    return out;
}

CrossCoupling cross_coupling_terms(double v_feeder_mag, double delta_feeder, const Impedance& z,
                                   DqInjection inj) {
    require_nonzero(z, "cross_coupling_terms");
    const double zmag = z.magnitude();
    const double c = std::cos(std::atan2(z.x, z.r));
    const double s = std::sin(std::atan2(z.x, z.r));
    const double kd = v_feeder_mag * inj.d / zmag;
    const double kq = v_feeder_mag * inj.q / zmag;

    CrossCoupling out;
    out.dp = -kq * c + kd * s * delta_feeder - kq * c * delta_feeder;
    out.dq = kd * s + kq * c * delta_feeder - kd * s * delta_feeder;
    return out;
}

PowerPair approx_power_dq(double v_feeder_mag, double v_bus_mag, double delta_feeder,
                          const Impedance& z, DqInjection inj) {
    require_nonzero(z, "approx_power_dq");
    const double zmag = z.magnitude();
    const double ang = std::atan2(z.x, z.r);
    const double c = std::cos(ang);
    const double s = std::sin(ang);
    const auto cross = cross_coupling_terms(v_feeder_mag, delta_feeder, z, inj);

    PowerPair out;
    out.p = v_feeder_mag * v_bus_mag / zmag * (c + s * delta_feeder) +
            v_feeder_mag * inj.d / zmag * c + cross.dp;
    out.q = v_feeder_mag * (v_feeder_mag - v_bus_mag) / zmag * s +
            v_feeder_mag * inj.q / zmag * s + cross.dq;
    return out;
}

Sensitivity sensitivity_matrix(double v_feeder_mag, const Impedance& z) {
    require_nonzero(z, "sensitivity_matrix");
    const double k = v_feeder_mag / z.magnitude();
    const double ang = std::atan2(z.x, z.r);
    const double c = k * std::cos(ang);
    const double s = k * std::sin(ang);
    return {c, -s, s, c};
}

Phasor injection_phasor(DqInjection cmd, double delta_feeder) {
    // conj(d + jq) rotated onto the feeder voltage, applied with opposing sign
    // in the line-current convention so that it aids the feeder current.
    const Complex w = std::conj(Complex(cmd.d, cmd.q)) * std::polar(1.0, delta_feeder);
    return Phasor(-w);
}

PowerPair dq_power_exact(Phasor v_feeder, Phasor v_bus, const Impedance& z, DqInjection cmd) {
    const Phasor v_inj = injection_phasor(cmd, v_feeder.angle());
    return feeder_power_exact(v_feeder, line_current(v_feeder, v_bus, v_inj, z));
}

ClosedFormGap closed_form_gap(Phasor v_feeder, Phasor v_bus, Phasor v_inj, const Impedance& z) {
    const Phasor i = line_current(v_feeder, v_bus, v_inj, z);
    ClosedFormGap g;
    g.exact = feeder_power_exact(v_feeder, i);
    g.closed_form = feeder_power_closed_form({v_feeder.magnitude(), v_bus.magnitude(),
                                              v_feeder.angle(), v_bus.angle(), z, v_inj, i});
    const double scale = std::max(std::hypot(g.exact.p, g.exact.q), 1e-300);
    g.relative_gap = std::hypot(g.closed_form.p - g.exact.p, g.closed_form.q - g.exact.q) / scale;
    return g;
}

}  // namespace gridrouter
