#include <bit>
#include <filesystem>

#include "gridrouter/kernels.hpp"
#include "gridrouter/scenario_io.hpp"
#include "support.hpp"

using namespace gridrouter;
namespace k = gridrouter::kernels;

namespace {

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

std::vector<k::DqPoint> random_points(std::size_t n, std::uint64_t seed) {
    testing::Gen g(seed);
    std::vector<k::DqPoint> pts(n);
    for (auto& p : pts) {
        p.v_feeder = phasor_from_polar(g.uniform(200, 250), g.uniform(-0.2, 0.2));
        p.v_bus = phasor_from_polar(g.uniform(200, 250), g.uniform(-0.2, 0.2));
        p.z = {g.uniform(0.01, 1), g.uniform(0.05, 2)};
        p.cmd = {g.uniform(-20, 20), g.uniform(-20, 20)};
    }
    return pts;
}

}  // namespace

TEST_CASE("thread_count is positive") { CHECK(k::thread_count() >= 1); }

TEST_CASE("exact_power: parallel equals serial bit for bit") {
    testing::Gen g(101);
    std::vector<Phasor> v(50000), i(50000);
    for (std::size_t n = 0; n < v.size(); ++n) {
        v[n] = {g.uniform(-400, 400), g.uniform(-400, 400)};
        i[n] = {g.uniform(-50, 50), g.uniform(-50, 50)};
    }
    std::vector<PowerPair> a(v.size()), b(v.size());
    k::serial::exact_power(v, i, a);
    k::parallel::exact_power(v, i, b);
    for (std::size_t n = 0; n < a.size(); ++n) {
        CHECK(same_bits(a[n].p, b[n].p));
        CHECK(same_bits(a[n].q, b[n].q));
    }
}

TEST_CASE("dq_power and sensitivities: parallel equals serial bit for bit") {
    const auto pts = random_points(20000, 102);
    std::vector<PowerPair> a(pts.size()), b(pts.size());
    k::serial::dq_power(pts, a);
    k::parallel::dq_power(pts, b);
    std::vector<Sensitivity> sa(pts.size()), sb(pts.size());
    k::serial::sensitivities(pts, sa);
    k::parallel::sensitivities(pts, sb);
    for (std::size_t n = 0; n < pts.size(); ++n) {
        CHECK(same_bits(a[n].p, b[n].p));
        CHECK(same_bits(a[n].q, b[n].q));
        for (int j = 0; j < 4; ++j) CHECK(same_bits(sa[n][j], sb[n][j]));
    }
}

TEST_CASE("stability: parallel equals serial and agrees with the predicate") {
    testing::Gen g(103);
    std::vector<SmallSignalParams> ps(20000);
    for (auto& p : ps) {
        p = {g.log_uniform(1e-4, 1e-2), g.log_uniform(1e-3, 1), g.log_uniform(1e-5, 1e-2), g.log_uniform(1, 300),
             g.log_uniform(1, 300), g.uniform(0, 1e-3), g.uniform(0, 1), g.uniform(0, 0.5)};
    }
    std::vector<k::StabilityResult> a(ps.size()), b(ps.size());
    k::serial::stability(ps, a);
    k::parallel::stability(ps, b);
    for (std::size_t n = 0; n < ps.size(); ++n) {
        CHECK(a[n].condition == b[n].condition);
        CHECK(same_bits(a[n].max_real_pole, b[n].max_real_pole));
        CHECK(a[n].verdict == b[n].verdict);
        CHECK(a[n].condition == is_stable_condition(ps[n]));
    }
}

TEST_CASE("run_scenarios: parallel equals serial and preserves order") {
    const auto dir = std::filesystem::path(GRIDROUTER_SOURCE_DIR) / "scenarios";
    auto base = parse_scenario(dir / "dc_step_tracking.json").scenario;
    base.duration = 0.06;
    std::vector<Scenario> batch;
    for (double kp : {60.0, 80.0, 100.0, 120.0, 140.0, 160.0}) {
        auto s = base;
        for (auto& f : s.dc) f.feeder.module.k_p = kp;
        batch.push_back(s);
    }
    const auto a = k::serial::run_scenarios(batch);
    const auto b = k::parallel::run_scenarios(batch);
    REQUIRE(a.size() == batch.size());
    REQUIRE(b.size() == batch.size());
    for (std::size_t n = 0; n < a.size(); ++n) {
        CHECK(trace_csv(a[n]) == trace_csv(b[n]));
        CHECK(trace_csv(a[n]) == trace_csv(run_scenario(batch[n])));
    }
}
