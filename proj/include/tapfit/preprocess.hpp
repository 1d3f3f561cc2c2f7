#pragma once

#include <span>

#include "tapfit/types.hpp"

namespace tapfit::preprocess {

struct ShiftedTrace {
    PulseTrace trace;
    double shift = 0.0;  // the subtracted minimum, in signal units
};

/// Trapezoidal quadrature over a possibly non-uniform time grid.
double trapezoid_area(std::span<const double> times, std::span<const double> values);

/// Subtracts min(flux) so the shifted flux is non-negative with at least one
/// exact zero. Idempotent.
ShiftedTrace baseline_shift(const PulseTrace& trace);

/// Divides a baseline-shifted trace by its trapezoidal area so flux_bar
/// integrates to one. Requires min(flux) == 0; throws DegenerateTraceError
/// when the area is not positive.
NormalizedPulse area_normalize(const PulseTrace& trace, double recorded_shift = 0.0);

/// baseline_shift followed by area_normalize.
NormalizedPulse normalize(const PulseTrace& trace);

/// max(flux) - min(flux) of the raw trace.
double flux_range(const PulseTrace& trace);

}  // namespace tapfit::preprocess
