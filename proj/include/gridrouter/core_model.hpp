#pragma once

// Shared domain types for the hybrid AC/DC router model. All quantities are SI.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

namespace gridrouter {

using Complex = std::complex<double>;

/// Rectangular complex AC quantity (volts or amps).
struct Phasor {
    double re = 0.0;
    double im = 0.0;

    constexpr Phasor() = default;
    constexpr Phasor(double r, double i) : re(r), im(i) {}
    explicit Phasor(Complex c) : re(c.real()), im(c.imag()) {}

    Complex complex() const { return {re, im}; }
    double magnitude() const { return std::hypot(re, im); }
    double angle() const { return std::atan2(im, re); }

    friend Phasor operator+(Phasor a, Phasor b) { return {a.re + b.re, a.im + b.im}; }
    friend Phasor operator-(Phasor a, Phasor b) { return {a.re - b.re, a.im - b.im}; }
    friend Phasor operator*(Phasor a, Phasor b) { return Phasor(a.complex() * b.complex()); }
    friend Phasor operator*(double k, Phasor a) { return {k * a.re, k * a.im}; }
    Phasor conj() const { return {re, -im}; }
    friend bool operator==(const Phasor&, const Phasor&) = default;
};

/// Throws std::invalid_argument for negative magnitude.
Phasor phasor_from_polar(double magnitude, double angle);

/// Line impedance at nominal grid frequency.
struct Impedance {
    double r = 0.0;  // ohms
    double x = 0.0;  // ohms

    Complex complex() const { return {r, x}; }
    double magnitude() const { return std::hypot(r, x); }

    /// Builds from an inductance at angular frequency omega (X = omega L).
    static Impedance from_inductance(double r_ohm, double l_henry, double omega);
    /// Inverse of from_inductance.
    double inductance(double omega) const { return x / omega; }
};

/// atan2(X, R). Throws std::invalid_argument for |Z| == 0.
double impedance_angle(const Impedance& z);

/// Throws std::invalid_argument if |Z| is zero or non-finite.
void require_nonzero(const Impedance& z, const char* what);

inline constexpr double kDefaultGridHz = 50.0;

inline double angular_frequency(double hz) { return 2.0 * std::numbers::pi * hz; }

// Controller states live here because the feeder types own them.

/// dq-axis pair (d = active axis, q = reactive axis).
struct DqPair {
    double d = 0.0;
    double q = 0.0;
    friend bool operator==(const DqPair&, const DqPair&) = default;
};

using DqInjection = DqPair;

struct AcSeriesModuleState {
    double k_p = 100.0;
    double k_i = 50.0;
    double integrator_d = 0.0;
    double integrator_q = 0.0;
    DqInjection last_injection{};
    double v_max = std::numeric_limits<double>::infinity();
};

struct DcSeriesModuleState {
    double k_p = 100.0;
    double k_i = 50.0;
    double k_r = 0.0;
    double k_c = 0.0;
    double k_l = 0.0;
    double integrator = 0.0;
    double v_max = std::numeric_limits<double>::infinity();
    // Backward-difference memory; absent until the first step.
    std::optional<double> prev_error;
    std::optional<double> prev_v_dc;
    double last_injection = 0.0;
};

struct AcFeeder {
    std::string id;
    Phasor source;
    Impedance line;
    AcSeriesModuleState module;
    double p_ref = 0.0;  // W
    double q_ref = 0.0;  // var
};

struct DcFeeder {
    std::string id;
    double source_v = 0.0;
    double r_ohm = 0.0;
    double l_henry = 0.0;
    DcSeriesModuleState module;
    double i_meas = 0.0;
};

struct HubParams {
    double v_dc_nominal = 400.0;
    double c_dc = 300e-6;
    double q_battery = 0.0;   // C
    double v_battery = 48.0;  // V
    double p_battery_limit = 0.0;  // W
};

/// Throws std::invalid_argument when a feeder or hub violates its invariants.
void validate(const AcFeeder& f);
void validate(const DcFeeder& f);
void validate(const HubParams& h);

}  // namespace gridrouter
