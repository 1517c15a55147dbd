#include <numbers>
#include <vector>

#include "gridrouter/dc_dynamics.hpp"
#include "gridrouter/series_control.hpp"
#include "support.hpp"

using namespace gridrouter;
using testing::rel_close;

TEST_CASE("ac_reference_currents examples") {
    auto a = ac_reference_currents(2300, 0, 230);
    CHECK(a.d == 10.0);
    CHECK(a.q == 0.0);
    auto b = ac_reference_currents(0, 0, 17);
    CHECK(b.d == 0.0);
    CHECK(b.q == 0.0);
    auto c = ac_reference_currents(1000, 500, 100);
    CHECK(c.d == 10.0);
    CHECK(c.q == 5.0);
    CHECK_THROWS_AS(ac_reference_currents(1, 1, 0), std::invalid_argument);
}

TEST_CASE("ac_pi_step single step") {
    AcSeriesModuleState s;
    auto v = ac_pi_step(s, {0.01, 0}, {0, 0}, {0, 0}, 1e-4);
    CHECK(v.d == doctest::Approx(1.00005).epsilon(1e-14));
    CHECK(v.q == 0.0);
    CHECK(s.last_injection == v);

    AcSeriesModuleState z;
    auto w = ac_pi_step(z, {1, 2}, {1, 2}, {0, 0}, 1e-4);
    CHECK(w.d == 0.0);
    CHECK(w.q == 0.0);
    CHECK(z.integrator_d == 0.0);
    CHECK(z.integrator_q == 0.0);

    CHECK_THROWS_AS(ac_pi_step(z, {1, 2}, {1, 2}, {0, 0}, 0.0), std::invalid_argument);
}

TEST_CASE("constant error integrates affinely until saturation") {
    AcSeriesModuleState s;
    s.v_max = 20.0;
    const double dt = 1e-3, e = 0.1;
    double held = 0.0;
    for (int n = 1; n <= 5000; ++n) {
        const auto v = ac_pi_step(s, {e, 0}, {0, 0}, {0, 0}, dt);
        const double expected = s.k_p * e + s.k_i * e * n * dt;
        if (expected <= s.v_max) {
            CHECK(rel_close(v.d, expected, 1e-12));
            held = s.integrator_d;
        } else {
            CHECK(v.d == s.v_max);
            CHECK(s.integrator_d == held);
        }
    }
}

TEST_CASE("PI output is linear in the error sequence") {
    testing::Gen g(31);
    for (int trial = 0; trial < 50; ++trial) {
        const double alpha = g.uniform(-5, 5);
        DcSeriesModuleState a, b;
        a.k_l = b.k_l = g.uniform(0, 1e-3);
        for (int n = 0; n < 200; ++n) {
            const double e = g.uniform(-1, 1);
            const double va = dc_injection_step(a, {e, 0, 0, 400, 0}, 1e-4);
            const double vb = dc_injection_step(b, {alpha * e, 0, 0, 400, 0}, 1e-4);
            CHECK(std::abs(vb - alpha * va) <= 1e-12 * std::max(1.0, std::abs(vb)));
        }
    }
}

TEST_CASE("anti-windup freezes the integrator during saturation") {
    DcSeriesModuleState s;
    s.v_max = 5.0;
    // Small error: unsaturated, integrator grows.
    for (int n = 0; n < 10; ++n) dc_injection_step(s, {0.01, 0, 0, 400, 0}, 1e-3);
    const double entry = s.integrator;
    CHECK(entry > 0.0);
    for (int n = 0; n < 1000; ++n) CHECK(dc_injection_step(s, {1.0, 0, 0, 400, 0}, 1e-3) == 5.0);
    CHECK(s.integrator == entry);
    const double v = dc_injection_step(s, {0.0, 0, 0, 400, 0}, 1e-3);
    CHECK(v == doctest::Approx(s.k_i * entry));
    CHECK(s.integrator == entry);
}

TEST_CASE("mismatch_feedforward examples") {
    auto a = mismatch_feedforward(230, {230, 0}, {230, 0}, 0.0, 0.0);
    CHECK(a.d == 0.0);
    CHECK(a.q == 0.0);
    auto b = mismatch_feedforward(230, {225, 0}, {230, 0}, 0.0, 0.0);
    CHECK(b.d == 0.0);
    CHECK(b.q == doctest::Approx(5.0).epsilon(1e-14));
    auto c = mismatch_feedforward(230, {230, 0}, {230, 0}, 0.02, 0.0);
    CHECK(c.d == doctest::Approx(2 * 230 * std::sin(0.01)).epsilon(1e-14));
    CHECK(c.d == doctest::Approx(4.599923).epsilon(1e-6));
    CHECK(c.q == 0.0);
}

TEST_CASE("dc_injection_step examples") {
    DcSeriesModuleState zero;
    zero.k_p = zero.k_i = 0.0;
    CHECK(dc_injection_step(zero, {0, 0, 0, 400, 5}, 1e-4) == 5.0);

    DcSeriesModuleState r;
    r.k_p = r.k_i = 0.0;
    r.k_r = 1.0;
    CHECK(dc_injection_step(r, {0, 0, 2, 400, 0}, 1e-4) == -2.0);

    DcSeriesModuleState pi;
    pi.k_c = 0.01;
    pi.k_l = 0.001;
    CHECK(dc_injection_step(pi, {0.01, 0, 0, 400, 0}, 1e-4) == doctest::Approx(1.00005).epsilon(1e-14));
}

TEST_CASE("all-zero gains pass the mismatch term through") {
    testing::Gen g(32);
    DcSeriesModuleState s;
    s.k_p = s.k_i = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const double vm = g.uniform(-50, 50);
        CHECK(dc_injection_step(s, {g.uniform(-10, 10), g.uniform(-10, 10), 0, g.uniform(300, 500), vm}, 1e-4) ==
              vm);
    }
}

TEST_CASE("derivative terms vanish on constant signals") {
    DcSeriesModuleState a, b;
    b.k_c = 0.05;
    b.k_l = 0.002;
    for (int n = 0; n < 20; ++n) {
        const double va = dc_injection_step(a, {2.0, 1.5, 0, 390, 0}, 1e-4);
        const double vb = dc_injection_step(b, {2.0, 1.5, 0, 390, 0}, 1e-4);
        CHECK(va == vb);
    }
}

TEST_CASE("virtual inertia term examples") {
    CHECK(virtual_inertia_term(0, 0, 1e6, -3e5) == 0.0);
    CHECK(virtual_inertia_term(0.01, 0, 100, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(virtual_inertia_term(0, 0.001, 0, 500) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("dc_mismatch and droop examples") {
    CHECK(dc_mismatch(400, 400) == 0.0);
    CHECK(dc_mismatch(400, 395) == 5.0);
    CHECK(dc_mismatch(395, 400) == 5.0);
    CHECK(droop_step(400, 0.5, 10) == 395.0);
    CHECK(droop_step(400, 0, 1234.5) == 400.0);
    CHECK(droop_step(230, 0.1, -10) == 231.0);
    CHECK_THROWS_AS(droop_step(400, -0.1, 1), std::invalid_argument);
}

TEST_CASE("ripple filter passes 100 Hz and blocks DC") {
    const double dt = 1e-5, f = 100.0;
    RippleFilter hp(kDefaultRippleCutoffHz, dt);
    CHECK(hp.update(400.0) == 0.0);
    double peak = 0.0;
    for (int n = 1; n < 100000; ++n) {
        const double y = hp.update(400.0 + 5.0 * std::sin(2 * std::numbers::pi * f * n * dt));
        if (n > 80000) peak = std::max(peak, std::abs(y));
    }
    // First-order high-pass gain at f: 1 / sqrt(1 + (fc/f)^2).
    CHECK(peak == doctest::Approx(5.0 / std::sqrt(1.0 + 0.01)).epsilon(2e-3));

    RippleFilter dc(kDefaultRippleCutoffHz, dt);
    double y = 0.0;
    for (int n = 0; n < 100000; ++n) y = dc.update(400.0);
    CHECK(y == 0.0);
    CHECK_THROWS_AS(RippleFilter(0.0, dt), std::invalid_argument);
}

TEST_CASE("PI drives a first-order plant to its reference") {
    testing::Gen g(33);
    for (int trial = 0; trial < 10; ++trial) {
        const double r = g.uniform(0.05, 1.0), l = g.uniform(1e-3, 5e-3), i_ref = g.uniform(-20, 20);
        AcSeriesModuleState s;
        s.k_p = 5.0;
        s.k_i = g.uniform(10, 200);
        const double dt = 1e-4;
        std::vector<double> x{0.0};
        for (int n = 0; n < 200000; ++n) {
            const double v = ac_pi_step(s, {i_ref, 0}, {x[0], 0}, {0, 0}, dt).d;
            rk4_step(x, n * dt, dt, [&](double, std::span<const double> xs, std::span<double> d) {
                d[0] = (v - r * xs[0]) / l;
            });
        }
        CHECK(std::abs(x[0] - i_ref) < 1e-9 * std::max(1.0, std::abs(i_ref)));
    }
}
