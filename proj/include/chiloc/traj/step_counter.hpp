#pragma once

#include <span>
#include <utility>

namespace chiloc {

struct NascConfig {
    double min_frequency = 0.8;  // Hz
    double max_frequency = 3.0;  // Hz
    double walking_threshold = 0.7;
};

struct StepCount {
    double steps = 0.0;           // rounded to a whole number
    double frequency = 0.0;       // Hz, 0 when no walking was found
    double walking_duration = 0.0;  // seconds
};

// Normalized auto-correlation step counter over sliding windows of an acceleration
// magnitude trace. Throws std::invalid_argument when the trace is shorter than two
// periods of the slowest cadence in the band.
StepCount count_steps_nasc(std::span<const double> trace, double sample_rate, const NascConfig& config = {});

// Normalized auto-correlation of the two adjacent length-`lag` windows starting at `m`.
// Returns 0 when either window has no variance.
double normalized_autocorrelation(std::span<const double> trace, std::size_t m, std::size_t lag);

struct StrideModel {
    double slope = 0.3;      // length-units per Hz
    double intercept = 0.2;  // length-units
    double min_frequency = 0.8;
    double max_frequency = 3.0;

    // Throws unless the predicted stride is positive across the supported range.
    void validate() const;
};

double stride_length(double step_frequency, const StrideModel& model);

// Ordinary least squares over (frequency, stride) pairs; needs two distinct frequencies.
StrideModel fit_stride_model(std::span<const std::pair<double, double>> samples);

}  // namespace chiloc
