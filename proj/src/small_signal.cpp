#include "gridrouter/small_signal.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gridrouter {

void validate(const SmallSignalParams& p) {
    if (!(p.l > 0.0)) throw std::invalid_argument("small-signal: L must be positive");
    if (!(p.c > 0.0)) throw std::invalid_argument("small-signal: C must be positive");
    if (!(p.r >= 0.0)) throw std::invalid_argument("small-signal: R must be non-negative");
    if (!(p.z > 0.0)) throw std::invalid_argument("small-signal: Z must be positive");
}

Complex poly_eval(const Poly& p, Complex s) {
    Complex acc{0.0, 0.0};
    for (double a : p) acc = acc * s + a;
    return acc;
}

RationalTF closed_loop_tf(const SmallSignalParams& p) {
    validate(p);
    RationalTF tf;
    tf.num = {p.k_l, p.k_p, p.k_i};
    tf.den = {p.l + p.k_l, p.r + p.k_p - (p.k_c - p.k_r) / p.c, p.k_i + 1.0 / p.c};
    tf.cleared_s_power = 1;
    return tf;
}

Complex closed_loop_response(const SmallSignalParams& p, Complex s) {
    const Complex gc = p.k_p + p.k_i / s + p.k_l * s;
    return gc / (p.l * s + p.r + 1.0 / (p.c * s) + gc - (p.k_c - p.k_r) / p.c);
}

std::array<double, 3> characteristic_poly(const SmallSignalParams& p) {
    validate(p);
    return {p.l, p.r + p.k_p + p.k_l - (p.k_c - p.k_r) / p.c, p.k_i + 1.0 / p.c};
}

std::pair<Complex, Complex> poles(const std::array<double, 3>& poly) {
    const auto [a2, a1, a0] = poly;
    if (a2 == 0.0) throw std::invalid_argument("poles: leading coefficient is zero");
    const double disc = a1 * a1 - 4.0 * a2 * a0;
    if (disc < 0.0) {
        const double re = -a1 / (2.0 * a2);
        const double im = std::sqrt(-disc) / (2.0 * std::abs(a2));
        return {{re, im}, {re, -im}};
    }
    const double sign = a1 >= 0.0 ? 1.0 : -1.0;
    const double q = -0.5 * (a1 + sign * std::sqrt(disc));
    if (q == 0.0) return {{0.0, 0.0}, {0.0, 0.0}};
    return {{q / a2, 0.0}, {a0 / q, 0.0}};
}

bool is_stable_condition(const SmallSignalParams& p) {
    return p.k_c - p.k_r < (p.r + p.k_p + p.k_l) * p.c;
}

StabilityVerdict classify_stability(const SmallSignalParams& p) {
    const double margin = (p.r + p.k_p + p.k_l) * p.c - (p.k_c - p.k_r);
    if (std::abs(margin) <= kMarginalBand) return StabilityVerdict::marginal;
    return margin > 0.0 ? StabilityVerdict::stable : StabilityVerdict::unstable;
}

const char* to_string(StabilityVerdict v) {
    switch (v) {
        case StabilityVerdict::stable: return "stable";
        case StabilityVerdict::marginal: return "marginal";
        case StabilityVerdict::unstable: return "unstable";
    }
    return "unknown";
}

RationalTF vic_tf(double c, double k_c, double z) {
    if (!(c > 0.0) || !(z > 0.0)) throw std::invalid_argument("vic_tf: C and Z must be positive");
    return {{-1.0}, {c + k_c / z, 0.0}, 0};
}

bool vic_stable(double c, double k_c, double z) { return k_c < z * c; }

double current_loop_pole(double r, double l, double k_l) {
    if (!(l + k_l > 0.0)) throw std::invalid_argument("current_loop_pole: L + K_L must be positive");
    return -r / (l + k_l);
}

std::vector<BodePoint> bode_sample(const RationalTF& tf, double f_min, double f_max, int points) {
    if (!(f_min > 0.0) || !(f_max > f_min) || points < 2) {
        throw std::invalid_argument("bode_sample: need 0 < f_min < f_max and points >= 2");
    }
    std::vector<BodePoint> out;
    out.reserve(static_cast<std::size_t>(points));
    const double lmin = std::log10(f_min);
    const double step = (std::log10(f_max) - lmin) / (points - 1);
    double prev_phase = 0.0;
    for (int k = 0; k < points; ++k) {
        const double f = k == points - 1 ? f_max : std::pow(10.0, lmin + step * k);
        const Complex h = tf.eval({0.0, 2.0 * std::numbers::pi * f});
        double phase = std::arg(h) * 180.0 / std::numbers::pi;
        if (k > 0) {
            while (phase - prev_phase > 180.0) phase -= 360.0;
            while (phase - prev_phase < -180.0) phase += 360.0;
        }
        prev_phase = phase;
        out.push_back({f, 20.0 * std::log10(std::abs(h)), phase});
    }
    return out;
}

std::array<double, 4> filtered_characteristic_poly(const SmallSignalParams& p, double cutoff_hz) {
    validate(p);
    if (!(cutoff_hz > 0.0)) throw std::invalid_argument("filtered_characteristic_poly: cutoff must be positive");
    const double wc = angular_frequency(cutoff_hz);
    const double b2 = p.l + p.k_l;
    const double b1 = p.r + p.k_p - p.k_c / p.c;
    const double b0 = p.k_i + 1.0 / p.c;
    return {b2, b1 + wc * b2, b0 + wc * b1 + p.k_r / p.c, wc * b0};
}

bool is_stable_filtered(const SmallSignalParams& p, double cutoff_hz) {
    const auto [a3, a2, a1, a0] = filtered_characteristic_poly(p, cutoff_hz);
    return a3 > 0.0 && a2 > 0.0 && a1 > 0.0 && a0 > 0.0 && a2 * a1 > a3 * a0;
}

}  // namespace gridrouter
