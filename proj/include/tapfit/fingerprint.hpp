#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tapfit/types.hpp"

namespace tapfit::fingerprint {

/// One converged GDC fit within a pulse series.
struct SeriesPoint {
    std::string pulse_id;
    double injection_nmol = std::numeric_limits<double>::quiet_NaN();
    double lambda = 0.0;
    double mu = 0.0;
    double sigma = 0.0;
    double fit_r2 = 0.0;
};

struct OlsResult {
    double a0 = 0.0, a1 = 0.0;    // intercept, slope
    double se0 = 0.0, se1 = 0.0;  // standard errors
    double t0 = 0.0, t1 = 0.0;    // t statistics
    double p0 = 1.0, p1 = 1.0;    // two-sided p values
    double r_squared = 0.0;
    int dof = 0;                  // n - 2
    bool degenerate = false;      // zero residual variance
};

enum class Regime { Knudsen, NonKnudsen, Indeterminate };

const char* to_string(Regime r);

struct RatioFlag {
    std::string pulse_id;
    double ratio = 0.0;          // lambda * exp(mu)
    bool above_boundary = false; // ratio > 0.209
};

struct FingerprintReport {
    Regime regime = Regime::Indeterminate;
    OlsResult ols;
    double alpha = 0.05;
    std::vector<RatioFlag> knudsen_ratios;
};

/// Closed-form simple linear regression y = a0 + a1 x with standard errors
/// from the residual variance and two-sided Student-t p values. Needs >= 3
/// points; throws RankDeficientError when x carries no variation. A perfect
/// fit (zero residual variance) is flagged degenerate and reports p = 0 for
/// nonzero estimates and p = 1 for zero ones.
OlsResult ols_fit(std::span<const double> x, std::span<const double> y);

/// Regresses lambda on exp(-mu) over the series and labels the transport
/// regime from the significance pattern at level alpha: intercept-only
/// significant => Knudsen; both significant => NonKnudsen; anything else =>
/// Indeterminate.
FingerprintReport classify(std::span<const SeriesPoint> series, double alpha = 0.05);

/// Per-pulse lambda * exp(mu) with an above/below-0.209 flag.
std::vector<RatioFlag> ratio_diagnostic(std::span<const SeriesPoint> series);

/// Elementwise 1/lambda + exp(mu + sigma^2/2) over the series.
std::vector<double> eta_series(std::span<const SeriesPoint> series);

}  // namespace tapfit::fingerprint
