#pragma once

#include <vector>

#include "chiloc/sim/world.hpp"

namespace chiloc {

struct AccelTraceParams {
    double step_frequency = 2.0;  // Hz
    double duration = 10.0;       // seconds
    double sample_rate = 50.0;    // Hz
    double noise_sigma = 0.0;
    double amplitude = 2.0;       // m/s^2 around gravity
    double gravity = 9.81;
};

/// Accelerometer magnitude of a steady walk: gravity plus a sinusoid at the step frequency
/// plus Gaussian noise. Throws when the sample rate cannot resolve the step frequency.
std::vector<double> synth_accel_trace(const AccelTraceParams& params, Rng& rng);

}  // namespace chiloc
