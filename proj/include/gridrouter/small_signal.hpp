#pragma once

// Linearised single-feeder DC loop: closed-loop current transfer function,
// its quadratic characteristic polynomial, the damping condition, the
// virtual-inertia voltage loop, and Bode sampling.

#include <array>
#include <complex>
#include <utility>
#include <vector>

#include "gridrouter/core_model.hpp"

namespace gridrouter {

struct SmallSignalParams {
    double l = 0.0;
    double r = 0.0;
    double c = 0.0;
    double k_p = 0.0;
    double k_i = 0.0;
    double k_l = 0.0;
    double k_c = 0.0;
    double k_r = 0.0;
    double z = 1.0;  // loop impedance of the virtual-inertia voltage loop
};

/// Throws std::invalid_argument when L <= 0, C <= 0, R < 0 or Z <= 0.
void validate(const SmallSignalParams& p);

/// Polynomial coefficients in descending powers of s.
using Poly = std::vector<double>;

Complex poly_eval(const Poly& p, Complex s);

struct RationalTF {
    Poly num;
    Poly den;
    /// Power of s both sides were multiplied by to clear 1/s terms. Those
    /// roots at the origin are not poles of the original expression.
    int cleared_s_power = 0;

    Complex eval(Complex s) const { return poly_eval(num, s) / poly_eval(den, s); }
};

/// i/i_ref with G_c(s) = K_p + K_i/s + K_L s, cleared by multiplying by s.
/// The K_L s term of G_c lands in the s^2 coefficient, so the cleared
/// denominator equals characteristic_poly only when K_L = 0.
RationalTF closed_loop_tf(const SmallSignalParams& p);

/// Direct complex evaluation of the uncleared closed-loop expression.
Complex closed_loop_response(const SmallSignalParams& p, Complex s);

/// [L, R + K_p + K_L - (K_C - K_r)/C, K_i + 1/C], as published.
std::array<double, 3> characteristic_poly(const SmallSignalParams& p);

/// Roots of a2 s^2 + a1 s + a0 by the cancellation-free form.
/// Throws std::invalid_argument when a2 == 0.
std::pair<Complex, Complex> poles(const std::array<double, 3>& poly);

/// K_C - K_r < (R + K_p + K_L) C
bool is_stable_condition(const SmallSignalParams& p);

enum class StabilityVerdict { stable, marginal, unstable };

inline constexpr double kMarginalBand = 1e-9;

/// is_stable_condition with a +/-kMarginalBand dead zone around equality.
StabilityVerdict classify_stability(const SmallSignalParams& p);

const char* to_string(StabilityVerdict v);

/// H(s) = -1 / ((C + K_C/Z) s)
RationalTF vic_tf(double c, double k_c, double z);

/// K_C < Z C
bool vic_stable(double c, double k_c, double z);

/// -R / (L + K_L). Throws when L + K_L <= 0.
double current_loop_pole(double r, double l, double k_l);

struct BodePoint {
    double f_hz = 0.0;
    double gain_db = 0.0;
    double phase_deg = 0.0;
};

/// Log-spaced samples of H(j 2 pi f) with the phase unwrapped along the grid.
std::vector<BodePoint> bode_sample(const RationalTF& tf, double f_min, double f_max, int points);

/// Cubic characteristic polynomial when the ripple measurement passes
/// through a first-order high-pass s/(s + wc) instead of a pure
/// differentiator. Descending coefficients, normalised as characteristic_poly.
std::array<double, 4> filtered_characteristic_poly(const SmallSignalParams& p, double cutoff_hz);

/// Routh-Hurwitz test on filtered_characteristic_poly.
bool is_stable_filtered(const SmallSignalParams& p, double cutoff_hz);

}  // namespace gridrouter
