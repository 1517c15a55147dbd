#include <numbers>
#include <vector>

#include "gridrouter/dc_dynamics.hpp"
#include "support.hpp"

using namespace gridrouter;
using testing::rel_close;

constexpr double two_pi = 2 * std::numbers::pi;

TEST_CASE("dc_link_derivative examples") {
    CHECK(dc_link_derivative(1e-3, 1, 1) == 0.0);
    CHECK(dc_link_derivative(1e-3, 2, 1) == doctest::Approx(1000.0).epsilon(1e-15));
    CHECK(dc_link_derivative(2e-3, 0, 1) == doctest::Approx(-500.0).epsilon(1e-15));
    CHECK_THROWS_AS(dc_link_derivative(0.0, 1, 1), std::invalid_argument);
}

TEST_CASE("line_current_derivative examples") {
    CHECK(line_current_derivative(1e-3, 0.1, 0, 400, 0) == doctest::Approx(4e5).epsilon(1e-15));
    CHECK(line_current_derivative(1e-3, 0.1, 10, 1, 0) == 0.0);
    CHECK(line_current_derivative(2e-3, 0.5, (400.0 - 12.0) / 0.5, 400, 12) == 0.0);
    CHECK_THROWS_AS(line_current_derivative(0.0, 0.1, 0, 1, 0), std::invalid_argument);
}

TEST_CASE("cpl current and its negative incremental resistance") {
    CHECK(cpl_current(1000, 400, 1) == 2.5);
    CHECK(cpl_current(0, 123, 1) == 0.0);
    const double h = 1e-3;
    const double didv = (cpl_current(1000, 400 + h, 1) - cpl_current(1000, 400 - h, 1)) / (2 * h);
    CHECK(didv == doctest::Approx(-1000.0 / (400.0 * 400.0)).epsilon(1e-6));

    testing::Gen g(41);
    for (int n = 0; n < 1000; ++n) {
        const double p = g.uniform(1, 1e4), v = g.uniform(2, 800), dv = 1e-4 * v;
        CHECK(cpl_current(p, v + dv, 1) < cpl_current(p, v - dv, 1));
    }
    // Below the floor the current stops growing.
    CHECK(cpl_current(1000, 0.1, 1) == 1000.0);
}

TEST_CASE("ripple voltage examples") {
    CHECK(ripple_voltage(1, two_pi * 100, 300e-6) == doctest::Approx(5.305).epsilon(1e-4));
    CHECK(ripple_voltage(1, two_pi * 100, 300e-6) == doctest::Approx(1.0 / (two_pi * 100 * 300e-6)).epsilon(1e-15));
    CHECK(ripple_voltage(0, 7, 1e-3) == 0.0);
    CHECK(ripple_voltage(1, two_pi * 100, 600e-6) == doctest::Approx(2.653).epsilon(1e-3));
    CHECK(ripple_voltage(1, two_pi * 100, 600e-6) * 2 ==
          doctest::Approx(ripple_voltage(1, two_pi * 100, 300e-6)).epsilon(1e-15));
}

TEST_CASE("effective ripple and required capacitance") {
    CHECK(effective_ripple(5.305, 5.305) == 0.0);
    CHECK(effective_ripple(5.305, 0) == 5.305);
    CHECK(effective_ripple(5, 2) == 3.0);
    CHECK(required_capacitance(1, two_pi * 100, 5.305) == doctest::Approx(300e-6).epsilon(1e-4));
    CHECK(required_capacitance(1, two_pi * 100, 10.61) == doctest::Approx(150e-6).epsilon(1e-4));
    CHECK(required_capacitance(1, two_pi * 100, 10.0) * 2 ==
          doctest::Approx(required_capacitance(1, two_pi * 100, 5.0)).epsilon(1e-15));
    CHECK_THROWS_AS(required_capacitance(1, two_pi * 100, 0.0), std::invalid_argument);
}

TEST_CASE("ripple_voltage and required_capacitance are inverses") {
    testing::Gen g(42);
    for (int n = 0; n < 1000; ++n) {
        const double di = g.log_uniform(1e-3, 100), w = g.log_uniform(10, 1e5), c = g.log_uniform(1e-6, 1e-1);
        CHECK(rel_close(required_capacitance(di, w, ripple_voltage(di, w, c)), c, 1e-12));
        const double dv = ripple_voltage(di, w, c);
        CHECK(effective_ripple(dv, dv) == 0.0);
    }
}

TEST_CASE("holdup time hand values") {
    const auto h = holdup_time(300e-6, 400, 360, 1000, 36000, 48);
    const double t_cap = 2.0 * 300e-6 * (400.0 * 400.0 - 360.0 * 360.0) / 1000.0;
    CHECK(h.t_capacitor == t_cap);
    CHECK(h.t_capacitor == 0.01824);
    CHECK(h.t_battery == 1728.0);
    CHECK(h.t_total == 0.01824 + 1728.0);
    CHECK(h.t_capacitor_energy_based == doctest::Approx(0.01824 / 4).epsilon(1e-15));
    CHECK(holdup_time(300e-6, 360, 360, 1000, 0, 48).t_capacitor == 0.0);
    CHECK_THROWS_AS(holdup_time(300e-6, 300, 360, 1000, 0, 48), std::invalid_argument);
    CHECK_THROWS_AS(holdup_time(300e-6, 400, 360, 0, 0, 48), std::invalid_argument);
}

TEST_CASE("integrate_step basics") {
    const DcPlantState s{400, 3};
    const auto still = integrate_step(s, 0, 1e-3, [](double, const DcPlantState&) { return DcPlantState{}; });
    CHECK(still == s);

    const auto cap = integrate_step({0, 0}, 0, 1e-3, [](double, const DcPlantState&) {
        return DcPlantState{dc_link_derivative(1e-3, 1.0, 0.0), 0.0};
    });
    CHECK(cap.v_dc == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("RK4 RL step response matches the analytic solution") {
    const double v = 10, r = 2, l = 5e-3;
    const double dt = l / (100 * r);
    std::vector<double> x{0.0};
    Rk4 rk;
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
        rk.step(x, n * dt, dt, [&](double, std::span<const double> xs, std::span<double> d) {
            d[0] = line_current_derivative(l, r, xs[0], v, 0.0);
        });
        const double t = (n + 1) * dt;
        const double exact = v / r * (1 - std::exp(-r * t / l));
        worst = std::max(worst, std::abs(x[0] - exact) / (v / r));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("lossless LC energy is conserved over 1e4 steps") {
    const double c = 300e-6, l = 450e-6;
    const double dt = std::sqrt(l * c) / 50;
    std::vector<double> x{400.0, 0.0};
    auto energy = [&] { return 0.5 * c * x[0] * x[0] + 0.5 * l * x[1] * x[1]; };
    const double e0 = energy();
    Rk4 rk;
    double worst = 0.0;
    for (int n = 0; n < 10000; ++n) {
        rk.step(x, n * dt, dt, [&](double, std::span<const double> xs, std::span<double> d) {
            d[0] = dc_link_derivative(c, xs[1], 0.0);
            d[1] = line_current_derivative(l, 0.0, xs[1], -xs[0], 0.0);
        });
        worst = std::max(worst, std::abs(energy() - e0) / e0);
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("rk4 reports non-finite states") {
    std::vector<double> x{1.0};
    CHECK_THROWS_AS(rk4_step(x, 0, 1, [](double, std::span<const double>, std::span<double> d) { d[0] = INFINITY; }),
                    std::runtime_error);
    Rk4 rk;
    std::vector<double> y{1.0};
    CHECK_FALSE(rk.step(y, 0, 1, [](double, std::span<const double>, std::span<double> d) { d[0] = NAN; }));
}

TEST_CASE("load models") {
    CHECK(load_current(ResistiveLoad{40}, 400, 0, 1) == 10.0);
    CHECK(load_current(ConstantPowerLoad{4000}, 400, 0, 1) == 10.0);
    CHECK(load_current(ConstantCurrentLoad{3}, 123, 0, 1) == 3.0);
    CHECK(load_current(RippleSource{2, two_pi * 100}, 400, 0.0025, 1) == doctest::Approx(2.0));
    CHECK_THROWS_AS(validate(LoadModel{ResistiveLoad{0}}), std::invalid_argument);
    CHECK_THROWS_AS(validate(LoadModel{RippleSource{1, -1}}), std::invalid_argument);
}
