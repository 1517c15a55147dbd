#include "gridrouter/core_model.hpp"

#include <stdexcept>

namespace gridrouter {

Phasor phasor_from_polar(double magnitude, double angle) {
    if (!(magnitude >= 0.0)) {
        throw std::invalid_argument("phasor magnitude must be non-negative");
    }
    return {magnitude * std::cos(angle), magnitude * std::sin(angle)};
}

Impedance Impedance::from_inductance(double r_ohm, double l_henry, double omega) {
    return {r_ohm, omega * l_henry};
}

void require_nonzero(const Impedance& z, const char* what) {
    const double m = z.magnitude();
    if (!(m > 0.0) || !std::isfinite(m)) {
        throw std::invalid_argument(std::string(what) + ": impedance magnitude must be positive");
    }
}

double impedance_angle(const Impedance& z) {
    require_nonzero(z, "impedance_angle");
    return std::atan2(z.x, z.r);
}

void validate(const AcFeeder& f) {
    if (!(f.source.magnitude() > 0.0)) {
        throw std::invalid_argument("ac feeder '" + f.id + "': source magnitude must be positive");
    }
    require_nonzero(f.line, ("ac feeder '" + f.id + "'").c_str());
    if (f.module.k_p < 0.0 || f.module.k_i < 0.0) {
        throw std::invalid_argument("ac feeder '" + f.id + "': gains must be non-negative");
    }
}

void validate(const DcFeeder& f) {
    if (!(f.source_v > 0.0)) {
        throw std::invalid_argument("dc feeder '" + f.id + "': source voltage must be positive");
    }
    if (!(f.l_henry > 0.0)) {
        throw std::invalid_argument("dc feeder '" + f.id + "': inductance must be positive");
    }
    if (!(f.r_ohm >= 0.0)) {
        throw std::invalid_argument("dc feeder '" + f.id + "': resistance must be non-negative");
    }
    const auto& m = f.module;
    if (m.k_p < 0 || m.k_i < 0 || m.k_r < 0 || m.k_c < 0 || m.k_l < 0) {
        throw std::invalid_argument("dc feeder '" + f.id + "': gains must be non-negative");
    }
}

void validate(const HubParams& h) {
    if (!(h.v_dc_nominal > 0.0)) throw std::invalid_argument("hub: v_dc must be positive");
    if (!(h.c_dc > 0.0)) throw std::invalid_argument("hub: c_dc must be positive");
    if (!(h.q_battery >= 0.0)) throw std::invalid_argument("hub: battery capacity must be non-negative");
}

}  // namespace gridrouter
