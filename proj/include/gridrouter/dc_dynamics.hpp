#pragma once

// Averaged DC plant: DC-link capacitor, RL feeder lines, load models and the
// capacitor/battery sizing relations. Integration is fixed-step classical RK4
// with the controller output held over the step.

#include <cmath>
#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace gridrouter {

struct DcPlantState {
    double v_dc = 0.0;
    double i_meas = 0.0;
    friend bool operator==(const DcPlantState&, const DcPlantState&) = default;
};

struct ResistiveLoad { double r_ohm = 0.0; };
struct ConstantPowerLoad { double p_watt = 0.0; };
struct ConstantCurrentLoad { double i_amp = 0.0; };
struct RippleSource {
    double delta_i = 0.0;  // A, amplitude
    double omega = 0.0;    // rad/s
};

using LoadModel = std::variant<ResistiveLoad, ConstantPowerLoad, ConstantCurrentLoad, RippleSource>;

/// Throws std::invalid_argument when a load violates its invariants.
void validate(const LoadModel& load);

/// Current drawn by a load at voltage v and time t.
double load_current(const LoadModel& load, double v, double t, double v_floor);

/// (I_dc - i_meas) / C
double dc_link_derivative(double c, double i_dc, double i_meas);

/// (V_dc - v_inj - R i) / L
double line_current_derivative(double l, double r, double i, double v_dc, double v_inj);

/// P / max(V, v_floor)
double cpl_current(double p, double v, double v_floor);

/// dI / (omega C)
double ripple_voltage(double delta_i, double omega, double c_dc);

double effective_ripple(double delta_v_ripple, double v_series);

/// Capacitance index dI / (omega dV_eff), proportionality constant 1.
double required_capacitance(double delta_i, double omega, double delta_v_effective);

struct HoldupTime {
    double t_capacitor = 0.0;
    double t_battery = 0.0;
    double t_total = 0.0;
    /// 0.5 C (V_init^2 - V_min^2) / P, reported alongside for comparison.
    double t_capacitor_energy_based = 0.0;
};

/// t_cap = 2 C (V_init^2 - V_min^2) / P, t_batt = Q V_batt / P.
HoldupTime holdup_time(double c, double v_init, double v_min, double p_load, double q_battery,
                       double v_battery);

/// dx/dt = f(t, x), written into dxdt.
using Derivative = std::function<void(double t, std::span<const double> x, std::span<double> dxdt)>;

/// Classical RK4 with reusable stage buffers.
class Rk4 {
public:
    explicit Rk4(std::size_t n = 0) { resize(n); }
    void resize(std::size_t n) {
        k1_.assign(n, 0.0); k2_.assign(n, 0.0); k3_.assign(n, 0.0); k4_.assign(n, 0.0); tmp_.assign(n, 0.0);
    }

    /// Advances x in place. Returns false when the new state is non-finite.
    template <class F>
    bool step(std::span<double> x, double t, double dt, F&& f) {
        const std::size_t n = x.size();
        if (k1_.size() != n) resize(n);
        f(t, std::span<const double>(x), std::span<double>(k1_));
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * dt * k1_[i];
        f(t + 0.5 * dt, std::span<const double>(tmp_), std::span<double>(k2_));
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * dt * k2_[i];
        f(t + 0.5 * dt, std::span<const double>(tmp_), std::span<double>(k3_));
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + dt * k3_[i];
        f(t + dt, std::span<const double>(tmp_), std::span<double>(k4_));
        bool finite = true;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
            finite = finite && std::isfinite(x[i]);
        }
        return finite;
    }

private:
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// One RK4 step, in place. Throws std::runtime_error when the resulting
/// state is non-finite.
void rk4_step(std::vector<double>& x, double t, double dt, const Derivative& f);

using PlantDerivative = std::function<DcPlantState(double t, const DcPlantState&)>;

DcPlantState integrate_step(const DcPlantState& s, double t, double dt, const PlantDerivative& f);

inline constexpr double kDefaultCplFloor = 1.0;

}  // namespace gridrouter
