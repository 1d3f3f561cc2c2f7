#pragma once

#include <cmath>
#include <cstdlib>

namespace tapfit::quadrature {

struct Result {
    double value = 0.0;
    double error_estimate = 0.0;
    long evaluations = 0;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK dqk15).
inline constexpr double kXgk[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691, 0.7415311855993944,
    0.5860872354676911, 0.4058451513773972, 0.2077849550078985, 0.0};
inline constexpr double kWgk[8] = {
    0.0229353220105292, 0.0630920926299786, 0.1047900103222502, 0.1406532597155259,
    0.1690047266392679, 0.1903505780647854, 0.2044329400752989, 0.2094821410847278};
inline constexpr double kWg[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189, 0.4179591836734694};

template <class F>
void gk15(F&& f, double a, double b, double& kronrod, double& err) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);

    const double fc = f(mid);
    double gauss = kWg[3] * fc;
    kronrod = kWgk[7] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kXgk[i];
        const double fsum = f(mid - dx) + f(mid + dx);
        kronrod += kWgk[i] * fsum;
        if (i % 2 == 1) gauss += kWg[i / 2] * fsum;
    }
    kronrod *= half;
    gauss *= half;
    err = std::fabs(kronrod - gauss);
}

template <class F>
double adapt(F&& f, double a, double b, double tol, int depth, Result& out) {
    double v, err;
    gk15(f, a, b, v, err);
    out.evaluations += 15;
    if (err <= tol || depth <= 0 || b - a < 1e-15 * (std::fabs(a) + 1.0)) {
        out.error_estimate += err;
        return v;
    }
    const double mid = 0.5 * (a + b);
    return adapt(f, a, mid, 0.5 * tol, depth - 1, out) +
           adapt(f, mid, b, 0.5 * tol, depth - 1, out);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (G7, K15) integration of f over [a, b] with
/// bisection until the per-interval error estimate meets the tolerance.
template <class F>
Result integrate(F&& f, double a, double b, double abs_tol = 1e-11,
                 double rel_tol = 1e-11, int max_depth = 40) {
    Result out;
    double v0, err0;
    detail::gk15(f, a, b, v0, err0);
    out.evaluations = 15;
    const double tol = std::max(abs_tol, rel_tol * std::fabs(v0));
    if (err0 <= tol) {
        out.value = v0;
        out.error_estimate = err0;
        return out;
    }
    out.error_estimate = 0.0;
    const double mid = 0.5 * (a + b);
    out.value = detail::adapt(f, a, mid, 0.5 * tol, max_depth, out) +
                detail::adapt(f, mid, b, 0.5 * tol, max_depth, out);
    return out;
}

}  // namespace tapfit::quadrature
