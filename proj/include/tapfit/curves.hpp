#pragma once

#include <span>
#include <vector>

#include "tapfit/types.hpp"

namespace tapfit::curves {

/// Series length used for reference-quality evaluation.
inline constexpr int kDefaultSdcTerms = 2000;

/// Flux is defined as exactly zero below this dimensionless time; the series
/// converges too slowly there and the physical value is indistinguishable
/// from zero in double precision.
inline constexpr double kMinTau = 1e-6;

/// Magnitude below which a series term ends the summation early.
inline constexpr double kTermCutoff = 1e-14;

/// lambda * exp(mu) of the ideal Knudsen response, (pi^2/4) exp(-pi^2/4).
extern const double kIdealKnudsenRatio;

/// Rounded ratio boundary quoted for the Knudsen regime.
inline constexpr double kKnudsenRatioBoundary = 0.209;

/// Area-one outlet flux of the standard diffusion curve at eta = 1, N = 1:
///   pi * sum_{n=0}^{terms-1} (-1)^n (2n+1) exp(-(2n+1)^2 pi^2 tau / 4).
/// Callers rescale by eta*N and map t -> tau = t*eta. Returns 0 for
/// tau < kMinTau (including tau <= 0).
double sdc_flux(double tau, int terms = kDefaultSdcTerms);

/// Monotone factor of the SDC factorization,
///   F*(tau) = sum_{n=0}^{terms-1} (-1)^n (2n+1) exp(-n(n+1) pi^2 tau),
/// the cumulative-arrival term satisfying
///   sdc_flux(tau) = pi exp(-pi^2 tau/4) F*(tau).
Probability sdc_fstar(double tau, int terms = kDefaultSdcTerms);

/// Lognormal density over dimensionless time; 0 for tau <= 0.
double lognormal_pdf(double tau, double mu, double sigma);

/// Lognormal cumulative distribution 0.5 [1 + erf((ln tau - mu)/(sigma sqrt 2))];
/// 0 for tau <= 0.
Probability lognormal_cdf(double tau, double mu, double sigma);

/// Unnormalized generalized diffusion curve
///   lambda exp(-tau lambda) * Phi(tau | mu, sigma).
/// Divide by gdc_area to obtain the area-one curve (beta = 1/area).
double gdc_flux(double tau, const GdcParams& params);

/// Total integral of gdc_flux over (0, inf), by adaptive Gauss-Kronrod
/// quadrature on (0, tau_max] with tau_max = exp(mu + 6 sigma) + 20/lambda.
double gdc_area(const GdcParams& params);

/// lambda * exp(mu); equals kIdealKnudsenRatio under ideal Knudsen transport
/// and is invariant to the fitting time basis.
double knudsen_ratio(const GdcParams& params);

/// Sum of the means of the two GDC factors, 1/lambda + exp(mu + sigma^2/2).
/// Approximates the dimensionless mean residence time (0.501 for the ideal
/// Knudsen parameters).
double residence_time(const GdcParams& params);

/// Per-pulse transport-rate proxy, same formula as residence_time. Equals
/// the dimensionless residence time when the fit ran in dimensionless time
/// and scales as 1/eta when the fit ran in clock time.
double eta_from_gdc(const GdcParams& params);
std::vector<double> eta_from_gdc(std::span<const GdcParams> series);

// Grid kernels. Parallelized over grid points with OpenMP when enabled;
// results are bit-identical to the scalar functions point by point.
void sdc_flux_grid(std::span<const double> tau, int terms, std::span<double> out);
void sdc_fstar_grid(std::span<const double> tau, int terms, std::span<double> out);
void gdc_flux_grid(std::span<const double> tau, const GdcParams& params, std::span<double> out);

}  // namespace tapfit::curves
