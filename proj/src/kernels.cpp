#include "gridrouter/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gridrouter::kernels {

namespace {

void require_same(std::size_t a, std::size_t b) {
    if (a != b) throw std::invalid_argument("kernels: input and output sizes differ");
}

StabilityResult stability_one(const SmallSignalParams& p) {
    StabilityResult r;
    r.condition = is_stable_condition(p);
    const auto [s1, s2] = poles(characteristic_poly(p));
    r.max_real_pole = std::max(s1.real(), s2.real());
    r.verdict = classify_stability(p);
    return r;
}

}  // namespace

int thread_count() {
    if (const char* env = std::getenv("GRIDROUTER_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace serial {

void exact_power(std::span<const Phasor> v, std::span<const Phasor> i, std::span<PowerPair> out) {
    require_same(v.size(), i.size());
    require_same(v.size(), out.size());
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = feeder_power_exact(v[k], i[k]);
}

void dq_power(std::span<const DqPoint> pts, std::span<PowerPair> out) {
    require_same(pts.size(), out.size());
    for (std::size_t k = 0; k < pts.size(); ++k)
        out[k] = dq_power_exact(pts[k].v_feeder, pts[k].v_bus, pts[k].z, pts[k].cmd);
}

void sensitivities(std::span<const DqPoint> pts, std::span<Sensitivity> out) {
    require_same(pts.size(), out.size());
    for (std::size_t k = 0; k < pts.size(); ++k)
        out[k] = sensitivity_matrix(pts[k].v_feeder.magnitude(), pts[k].z);
}

void stability(std::span<const SmallSignalParams> params, std::span<StabilityResult> out) {
    require_same(params.size(), out.size());
    for (std::size_t k = 0; k < params.size(); ++k) out[k] = stability_one(params[k]);
}

std::vector<Trace> run_scenarios(std::span<const Scenario> scenarios) {
    std::vector<Trace> out;
    out.reserve(scenarios.size());
    for (const auto& s : scenarios) out.push_back(run_scenario(s));
    return out;
}

}  // namespace serial

namespace parallel {

void exact_power(std::span<const Phasor> v, std::span<const Phasor> i, std::span<PowerPair> out) {
    require_same(v.size(), i.size());
    require_same(v.size(), out.size());
    const auto n = static_cast<long>(v.size());
#pragma omp parallel for num_threads(thread_count()) schedule(static)
    for (long k = 0; k < n; ++k) out[k] = feeder_power_exact(v[k], i[k]);
}

void dq_power(std::span<const DqPoint> pts, std::span<PowerPair> out) {
    require_same(pts.size(), out.size());
    const auto n = static_cast<long>(pts.size());
#pragma omp parallel for num_threads(thread_count()) schedule(static)
    for (long k = 0; k < n; ++k)
        out[k] = dq_power_exact(pts[k].v_feeder, pts[k].v_bus, pts[k].z, pts[k].cmd);
}

void sensitivities(std::span<const DqPoint> pts, std::span<Sensitivity> out) {
    require_same(pts.size(), out.size());
    const auto n = static_cast<long>(pts.size());
#pragma omp parallel for num_threads(thread_count()) schedule(static)
    for (long k = 0; k < n; ++k) out[k] = sensitivity_matrix(pts[k].v_feeder.magnitude(), pts[k].z);
}

void stability(std::span<const SmallSignalParams> params, std::span<StabilityResult> out) {
    require_same(params.size(), out.size());
    const auto n = static_cast<long>(params.size());
#pragma omp parallel for num_threads(thread_count()) schedule(static)
    for (long k = 0; k < n; ++k) out[k] = stability_one(params[k]);
}

std::vector<Trace> run_scenarios(std::span<const Scenario> scenarios) {
    std::vector<Trace> out(scenarios.size());
    std::vector<std::exception_ptr> errors(scenarios.size());
    const auto n = static_cast<long>(scenarios.size());
#pragma omp parallel for num_threads(thread_count()) schedule(dynamic, 1)
    for (long k = 0; k < n; ++k) {
        try {
            out[k] = run_scenario(scenarios[k]);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace parallel

}  // namespace gridrouter::kernels
