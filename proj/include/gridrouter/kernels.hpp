#pragma once

// Batch evaluators over independent points. Each kernel has a serial
// reference in kernels::serial and an OpenMP version in kernels::parallel
// with the same signature; both produce bit-identical outputs because every
// element is computed by the same scalar code.

#include <span>
#include <vector>

#include "gridrouter/ac_powerflow.hpp"
#include "gridrouter/sim_engine.hpp"
#include "gridrouter/small_signal.hpp"

namespace gridrouter::kernels {

struct DqPoint {
    Phasor v_feeder;
    Phasor v_bus;
    Impedance z;
    DqInjection cmd;
};

struct StabilityResult {
    bool condition = false;      // damping inequality
    double max_real_pole = 0.0;  // from the characteristic roots
    StabilityVerdict verdict = StabilityVerdict::stable;
};

/// Worker count for the parallel kernels: GRIDROUTER_THREADS when set to a
/// positive integer, otherwise the OpenMP default.
int thread_count();

namespace serial {
void exact_power(std::span<const Phasor> v, std::span<const Phasor> i, std::span<PowerPair> out);
void dq_power(std::span<const DqPoint> pts, std::span<PowerPair> out);
void sensitivities(std::span<const DqPoint> pts, std::span<Sensitivity> out);
void stability(std::span<const SmallSignalParams> params, std::span<StabilityResult> out);
std::vector<Trace> run_scenarios(std::span<const Scenario> scenarios);
}  // namespace serial

namespace parallel {
void exact_power(std::span<const Phasor> v, std::span<const Phasor> i, std::span<PowerPair> out);
void dq_power(std::span<const DqPoint> pts, std::span<PowerPair> out);
void sensitivities(std::span<const DqPoint> pts, std::span<Sensitivity> out);
void stability(std::span<const SmallSignalParams> params, std::span<StabilityResult> out);
/// Runs independent scenarios concurrently; output order follows input order.
std::vector<Trace> run_scenarios(std::span<const Scenario> scenarios);
}  // namespace parallel

}  // namespace gridrouter::kernels
