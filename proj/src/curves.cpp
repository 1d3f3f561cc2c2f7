#include "tapfit/curves.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tapfit/quadrature.hpp"
#include "tapfit/specfun.hpp"

namespace tapfit {

GdcParams GdcParams::knudsen_ideal() {
    const double q = std::numbers::pi * std::numbers::pi / 4.0;
    return GdcParams{q, -q, 0.5};
}

namespace curves {

const double kIdealKnudsenRatio = knudsen_ratio(GdcParams::knudsen_ideal());

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPiSq = kPi * kPi;
const double kSqrt2 = std::sqrt(2.0);
const double kSqrt2Pi = std::sqrt(2.0 * kPi);

void check_terms(int terms) {
    if (terms < 1) throw std::invalid_argument("series terms must be >= 1");
}

void check_tau(double tau) {
    if (std::isnan(tau) || std::isinf(tau)) {
        throw std::invalid_argument("tau must be finite");
    }
}

// Successive exponents differ by (8n+8) * a, so each term follows from the
// previous with two multiplies instead of a fresh exp().
double sdc_flux_core(double tau, int terms) noexcept {
    if (tau < kMinTau) return 0.0;
    const double a = kPiSq * tau / 4.0;
    double e = std::exp(-a);            // exp(-(2n+1)^2 a) at n = 0
    const double w = std::exp(-8.0 * a);
    double g = w;                       // w^(n+1)
    double sum = 0.0;
    double sign = 1.0;
    for (int n = 0; n < terms; ++n) {
        const double term = (2.0 * n + 1.0) * e;
        if (term < kTermCutoff) break;
        sum += sign * term;
        sign = -sign;
        e *= g;
        g *= w;
    }
    return kPi * sum;
}

double sdc_fstar_core(double tau, int terms) noexcept {
    if (tau < kMinTau) return 0.0;
    const double b = kPiSq * tau;
    double h = 1.0;                     // exp(-n(n+1) b) at n = 0
    const double z = std::exp(-2.0 * b);
    double k = z;                       // z^(n+1)
    double sum = 0.0;
    double sign = 1.0;
    for (int n = 0; n < terms; ++n) {
        const double term = (2.0 * n + 1.0) * h;
        if (term < kTermCutoff) break;
        sum += sign * term;
        sign = -sign;
        h *= k;
        k *= z;
    }
    return sum;
}

double gdc_flux_core(double tau, const GdcParams& p) noexcept {
    if (tau <= 0.0) return 0.0;
    const double z = (std::log(tau) - p.mu) / (p.sigma * kSqrt2);
    const double phi = 0.5 * (1.0 + specfun::erf(z));
    return p.lambda * std::exp(-p.lambda * tau) * phi;
}

}  // namespace

double sdc_flux(double tau, int terms) {
    check_tau(tau);
    check_terms(terms);
    return sdc_flux_core(tau, terms);
}

Probability sdc_fstar(double tau, int terms) {
    check_tau(tau);
    check_terms(terms);
    return Probability(sdc_fstar_core(tau, terms));
}

double lognormal_pdf(double tau, double mu, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mu)) {
        throw std::invalid_argument("lognormal_pdf: sigma must be positive, mu finite");
    }
    if (!(tau > 0.0)) return 0.0;
    const double z = (std::log(tau) - mu) / sigma;
    return std::exp(-0.5 * z * z) / (tau * sigma * kSqrt2Pi);
}

Probability lognormal_cdf(double tau, double mu, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mu)) {
        throw std::invalid_argument("lognormal_cdf: sigma must be positive, mu finite");
    }
    if (!(tau > 0.0)) return Probability(0.0);
    const double z = (std::log(tau) - mu) / (sigma * kSqrt2);
    return Probability(0.5 * (1.0 + specfun::erf(z)));
}

double gdc_flux(double tau, const GdcParams& params) {
    params.validate();
    if (std::isnan(tau)) throw std::invalid_argument("gdc_flux: NaN tau");
    return gdc_flux_core(tau, params);
}

double gdc_area(const GdcParams& params) {
    params.validate();
    const double tau_max = std::exp(params.mu + 6.0 * params.sigma) + 20.0 / params.lambda;
    const auto res = quadrature::integrate(
        [&params](double t) { return gdc_flux_core(t, params); }, 0.0, tau_max, 1e-12, 1e-12);
    return res.value;
}

double knudsen_ratio(const GdcParams& params) {
    return params.lambda * std::exp(params.mu);
}

double residence_time(const GdcParams& params) {
    return 1.0 / params.lambda + std::exp(params.mu + 0.5 * params.sigma * params.sigma);
}

double eta_from_gdc(const GdcParams& params) { return residence_time(params); }

std::vector<double> eta_from_gdc(std::span<const GdcParams> series) {
    std::vector<double> out;
    out.reserve(series.size());
    for (const auto& p : series) out.push_back(eta_from_gdc(p));
    return out;
}

void sdc_flux_grid(std::span<const double> tau, int terms, std::span<double> out) {
    if (out.size() != tau.size()) throw std::invalid_argument("grid size mismatch");
    check_terms(terms);
    for (double t : tau) check_tau(t);
    const auto n = static_cast<std::ptrdiff_t>(tau.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = sdc_flux_core(tau[i], terms);
}

void sdc_fstar_grid(std::span<const double> tau, int terms, std::span<double> out) {
    if (out.size() != tau.size()) throw std::invalid_argument("grid size mismatch");
    check_terms(terms);
    for (double t : tau) check_tau(t);
    const auto n = static_cast<std::ptrdiff_t>(tau.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = sdc_fstar_core(tau[i], terms);
}

void gdc_flux_grid(std::span<const double> tau, const GdcParams& params, std::span<double> out) {
    if (out.size() != tau.size()) throw std::invalid_argument("grid size mismatch");
    params.validate();
    const auto n = static_cast<std::ptrdiff_t>(tau.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = gdc_flux_core(tau[i], params);
}

}  // namespace curves
}  // namespace tapfit
