#include "tapfit/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tapfit {

void PulseTrace::validate() const {
    if (times.size() < 2) {
        throw std::invalid_argument("trace needs at least 2 samples");
    }
    if (flux.size() != times.size()) {
        throw std::invalid_argument("times and flux lengths differ");
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]) || !std::isfinite(flux[i])) {
            throw std::invalid_argument("non-finite sample at index " + std::to_string(i));
        }
        if (i > 0 && !(times[i] > times[i - 1])) {
            throw std::invalid_argument("times not strictly increasing at index " +
                                        std::to_string(i));
        }
    }
}

namespace preprocess {

double trapezoid_area(std::span<const double> times, std::span<const double> values) {
    double area = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
        area += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
    }
    return area;
}

ShiftedTrace baseline_shift(const PulseTrace& trace) {
    trace.validate();
    const double m = *std::min_element(trace.flux.begin(), trace.flux.end());
    ShiftedTrace out{trace, m};
    for (double& v : out.trace.flux) v -= m;
    return out;
}

NormalizedPulse area_normalize(const PulseTrace& trace, double recorded_shift) {
    trace.validate();
    const double m = *std::min_element(trace.flux.begin(), trace.flux.end());
    if (m != 0.0) {
        throw std::invalid_argument("area_normalize expects a baseline-shifted trace");
    }
    const double area = trapezoid_area(trace.times, trace.flux);
    if (!(area > 0.0)) {
        throw DegenerateTraceError("trace area is not positive; nothing to normalize");
    }
    NormalizedPulse out;
    out.times = trace.times;
    out.flux_bar.resize(trace.flux.size());
    for (std::size_t i = 0; i < trace.flux.size(); ++i) out.flux_bar[i] = trace.flux[i] / area;
    out.baseline_shift = recorded_shift;
    out.area_scale = area;
    out.pulse_id = trace.pulse_id;
    out.injection_nmol = trace.injection_nmol;
    out.gain = trace.gain;
    out.meta = trace.meta;
    return out;
}

NormalizedPulse normalize(const PulseTrace& trace) {
    auto shifted = baseline_shift(trace);
    return area_normalize(shifted.trace, shifted.shift);
}

double flux_range(const PulseTrace& trace) {
    trace.validate();
    const auto [lo, hi] = std::minmax_element(trace.flux.begin(), trace.flux.end());
    return *hi - *lo;
}

}  // namespace preprocess
}  // namespace tapfit
