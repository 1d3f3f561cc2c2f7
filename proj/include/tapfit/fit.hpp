#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tapfit/types.hpp"

namespace tapfit {

struct SolverOptions {
    int max_iterations = 500;
    double ss_rel_tol = 1e-12;    // stop on relative sum-of-squares improvement
    double step_rel_tol = 1e-10;  // stop on relative step length
    double initial_damping = 1e-3;
    int sdc_terms = 200;  // series length inside the SDC fit
    TimeBasis time_basis = TimeBasis::ClockTime;
    std::optional<GdcParams> init_gdc;  // overrides the moment-based start
    std::optional<double> init_eta;
};

/// Fitted model: intercept x_bar, area coefficient beta, and the shape
/// parameters (GDC triple or SDC eta).
struct FitModel {
    ModelKind kind = ModelKind::Gdc;
    TimeBasis time_basis = TimeBasis::ClockTime;
    double x_bar = 0.0;
    double beta = 1.0;
    GdcParams gdc{};    // meaningful when kind == Gdc
    double eta = 1.0;   // meaningful when kind == Sdc
};

struct FitResult {
    FitModel model;
    double rmse = 0.0;
    double mse = 0.0;
    double r_squared = 0.0;
    std::vector<double> residuals;  // data minus model
    std::vector<std::string> param_names;
    std::vector<double> covariance;  // p x p row-major, mse * (J^T J)^-1
    std::vector<double> std_errors;  // sqrt of the covariance diagonal
    int iterations = 0;
    bool converged = false;
    bool init_fallback = false;  // moment-based start was degenerate
};

struct InitGuess {
    GdcParams params;
    bool fallback = false;
};

/// Moment-based starting point: sigma0 = 1/2, mu0 = ln(t_peak) + sigma0^2,
/// lambda0 = 1/(t_mean - exp(mu0 + sigma0^2/2)) floored at 0.1. Falls back to
/// the Knudsen-ideal neighborhood (2.5, -2.4, 0.5) when the moments are
/// non-finite or the lambda0 denominator is not positive.
InitGuess default_init(const NormalizedPulse& pulse);

/// Levenberg-Marquardt fit of x_bar + beta * GDC(t | lambda, mu, sigma) to an
/// area-one pulse. Requires at least 6 samples. Non-convergence is reported
/// via FitResult::converged; a Jacobian column with no effect on the model
/// raises RankDeficientError.
FitResult fit_gdc(const NormalizedPulse& pulse, const SolverOptions& opts = {});

/// Same machinery for x_bar + beta * eta * SDC(t * eta). Requires >= 3 samples.
FitResult fit_sdc(const NormalizedPulse& pulse, const SolverOptions& opts = {});

struct Conversion {
    double value = 0.0;  // clamped to [0, 1]
    double raw = 0.0;    // 1 - sum(beta) before clamping
    bool clamped = false;
};

/// Conversion 1 - sum_i beta_i over the tracked species.
Conversion conversion(std::span<const double> betas);

}  // namespace tapfit
