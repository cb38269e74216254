#include "chiloc/traj/step_counter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace chiloc {

double normalized_autocorrelation(std::span<const double> x, std::size_t m, std::size_t lag) {
    if (lag == 0 || m + 2 * lag > x.size()) throw std::out_of_range("autocorrelation window exceeds trace");
    double mu_a = 0.0, mu_b = 0.0;
    for (std::size_t k = 0; k < lag; ++k) {
        mu_a += x[m + k];
        mu_b += x[m + lag + k];
    }
    mu_a /= static_cast<double>(lag);
    mu_b /= static_cast<double>(lag);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t k = 0; k < lag; ++k) {
        const double a = x[m + k] - mu_a;
        const double b = x[m + lag + k] - mu_b;
        saa += a * a;
        sbb += b * b;
        sab += a * b;
    }
    const double denom = std::sqrt(saa * sbb);
    if (denom <= 1e-12 * static_cast<double>(lag)) return 0.0;
    return sab / denom;
}

namespace {

struct LagPick {
    double correlation = 0.0;
    double lag = 0.0;  // fractional
    std::size_t whole_lag = 0;
};

LagPick best_lag(std::span<const double> x, std::size_t m, std::size_t lo, std::size_t hi) {
    std::vector<double> chi(hi - lo + 1);
    for (std::size_t t = lo; t <= hi; ++t) chi[t - lo] = normalized_autocorrelation(x, m, t);
    const double top = *std::max_element(chi.begin(), chi.end());

    // The first near-best local maximum is the step period; later ones are its multiples.
    std::size_t pick = static_cast<std::size_t>(std::max_element(chi.begin(), chi.end()) - chi.begin());
    for (std::size_t i = 0; i < chi.size(); ++i) {
        const bool left_ok = i == 0 || chi[i] >= chi[i - 1];
        const bool right_ok = i + 1 == chi.size() || chi[i] >= chi[i + 1];
        if (left_ok && right_ok && chi[i] >= top - 0.05) {
            pick = i;
            break;
        }
    }
    LagPick out{chi[pick], static_cast<double>(lo + pick), lo + pick};
    if (pick > 0 && pick + 1 < chi.size()) {
        const double a = chi[pick - 1], b = chi[pick], c = chi[pick + 1];
        const double curv = a - 2.0 * b + c;
        if (curv < 0.0) out.lag += std::clamp(0.5 * (a - c) / curv, -0.5, 0.5);
    }
    return out;
}

}  // namespace

StepCount count_steps_nasc(std::span<const double> trace, double sample_rate, const NascConfig& config) {
    if (!(sample_rate > 0.0)) throw std::invalid_argument("sample_rate must be > 0");
    if (!(config.min_frequency > 0.0) || !(config.max_frequency > config.min_frequency)) {
        throw std::invalid_argument("NASC cadence band must satisfy 0 < min < max");
    }
    const auto lag_lo = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(sample_rate / config.max_frequency)));
    const auto lag_hi = static_cast<std::size_t>(std::ceil(sample_rate / config.min_frequency));
    const std::size_t span = 2 * lag_hi;
    if (trace.size() < span) throw std::invalid_argument("trace too short for the slowest cadence in the band");

    // Windows near the end search a shorter lag range so the tail of the trace is covered.
    std::vector<std::size_t> starts;
    for (std::size_t m = 0; m + 2 * lag_lo <= trace.size(); m += lag_lo) starts.push_back(m);

    std::vector<char> walking(trace.size(), 0);
    double freq_sum = 0.0;
    std::size_t freq_n = 0;
    for (std::size_t m : starts) {
        const LagPick p = best_lag(trace, m, lag_lo, std::min(lag_hi, (trace.size() - m) / 2));
        if (p.correlation <= config.walking_threshold) continue;
        freq_sum += sample_rate / p.lag;
        ++freq_n;
        std::fill(walking.begin() + static_cast<std::ptrdiff_t>(m),
                  walking.begin() + static_cast<std::ptrdiff_t>(m + 2 * p.whole_lag), 1);
    }
    StepCount out;
    if (freq_n == 0) return out;
    out.frequency = freq_sum / static_cast<double>(freq_n);
    out.walking_duration = static_cast<double>(std::count(walking.begin(), walking.end(), 1)) / sample_rate;
    out.steps = std::round(out.walking_duration * out.frequency);
    return out;
}

void StrideModel::validate() const {
    if (!(min_frequency > 0.0) || !(max_frequency >= min_frequency)) {
        throw std::invalid_argument("stride model frequency range must satisfy 0 < min <= max");
    }
    if (!(slope * min_frequency + intercept > 0.0) || !(slope * max_frequency + intercept > 0.0)) {
        throw std::invalid_argument("stride model predicts a non-positive stride in its range");
    }
}

double stride_length(double step_frequency, const StrideModel& model) {
    if (!(step_frequency >= model.min_frequency && step_frequency <= model.max_frequency)) {
        throw std::out_of_range("step frequency outside the stride model's supported range");
    }
    return model.slope * step_frequency + model.intercept;
}

StrideModel fit_stride_model(std::span<const std::pair<double, double>> samples) {
    if (samples.size() < 2) throw std::invalid_argument("need at least two samples to fit a stride model");
    double mf = 0.0, ms = 0.0;
    double lo = samples.front().first, hi = lo;
    for (auto [f, s] : samples) {
        mf += f;
        ms += s;
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    const double n = static_cast<double>(samples.size());
    mf /= n;
    ms /= n;
    double sff = 0.0, sfs = 0.0;
    for (auto [f, s] : samples) {
        sff += (f - mf) * (f - mf);
        sfs += (f - mf) * (s - ms);
    }
    if (sff <= 0.0) throw std::invalid_argument("stride samples need two distinct frequencies");
    StrideModel model;
    model.slope = sfs / sff;
    model.intercept = ms - model.slope * mf;
    model.min_frequency = lo;
    model.max_frequency = hi;
    model.validate();
    return model;
}

}  // namespace chiloc
