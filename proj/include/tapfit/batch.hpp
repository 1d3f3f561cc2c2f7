#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tapfit/fingerprint.hpp"
#include "tapfit/fit.hpp"
#include "tapfit/types.hpp"

namespace tapfit {

enum class ModelSelect { Sdc, Gdc, Both };

struct PulseFitRow {
    std::string pulse_id;
    std::optional<double> injection_nmol;
    std::optional<double> flux_range;   // raw-signal range before preprocessing
    std::optional<int> gain;
    std::optional<FitResult> gdc;
    std::optional<FitResult> sdc;
    std::string error;  // non-empty when preprocessing or fitting threw
};

struct BatchOptions {
    SolverOptions solver{};
    ModelSelect models = ModelSelect::Gdc;
    int threads = 0;  // 0 = OpenMP default
    /// Fits below this R^2 are treated as optimizer failures when assembling
    /// fingerprint series points.
    double min_series_r2 = 0.5;
};

/// Preprocesses and fits every trace. Pulses are independent, so the batch
/// runs under OpenMP when enabled; row order always matches input order.
/// Per-pulse failures land in PulseFitRow::error instead of throwing.
std::vector<PulseFitRow> fit_series(std::span<const PulseTrace> traces,
                                    const BatchOptions& opts = {});

/// Converged GDC fits as fingerprint series points. Rows with errors,
/// non-converged fits, or fit R^2 below min_r2 are excluded.
std::vector<fingerprint::SeriesPoint> to_series_points(std::span<const PulseFitRow> rows,
                                                       double min_r2 = 0.5);

}  // namespace tapfit
