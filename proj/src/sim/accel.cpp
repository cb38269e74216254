#include "chiloc/sim/accel.hpp"

#include <cmath>
#include <stdexcept>

namespace chiloc {

std::vector<double> synth_accel_trace(const AccelTraceParams& params, Rng& rng) {
    if (!(params.sample_rate > 2.0 * params.step_frequency)) {
        throw std::invalid_argument("sample rate must exceed twice the step frequency");
    }
    if (!(params.duration >= 0.0)) throw std::invalid_argument("duration must be >= 0");
    const auto n = static_cast<std::size_t>(std::llround(params.duration * params.sample_rate));
    std::vector<double> trace(n);
    std::normal_distribution<double> noise(0.0, params.noise_sigma > 0.0 ? params.noise_sigma : 1.0);
    const double w = 2.0 * kPi * params.step_frequency / params.sample_rate;
    for (std::size_t k = 0; k < n; ++k) {
        double v = params.gravity + params.amplitude * std::sin(w * static_cast<double>(k));
        if (params.noise_sigma > 0.0) v += noise(rng);
        trace[k] = v;
    }
    return trace;
}

}  // namespace chiloc
