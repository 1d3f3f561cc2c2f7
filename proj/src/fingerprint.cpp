#include "tapfit/fingerprint.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tapfit/curves.hpp"
#include "tapfit/specfun.hpp"

namespace tapfit::fingerprint {

const char* to_string(Regime r) {
    switch (r) {
        case Regime::Knudsen: return "knudsen";
        case Regime::NonKnudsen: return "non-knudsen";
        case Regime::Indeterminate: return "indeterminate";
    }
    return "unknown";
}

OlsResult ols_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("ols_fit: size mismatch");
    const int n = static_cast<int>(x.size());
    if (n < 3) throw InsufficientDataError("ols_fit needs at least 3 points");

    double xb = 0.0, yb = 0.0;
    for (int i = 0; i < n; ++i) {
        xb += x[i];
        yb += y[i];
    }
    xb /= n;
    yb /= n;

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dx = x[i] - xb;
        const double dy = y[i] - yb;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) {
        throw RankDeficientError("ols_fit: regressor has no variation");
    }

    OlsResult out;
    out.dof = n - 2;
    out.a1 = sxy / sxx;
    out.a0 = yb - out.a1 * xb;

    double sse = 0.0;
    for (int i = 0; i < n; ++i) {
        const double e = y[i] - out.a0 - out.a1 * x[i];
        sse += e * e;
    }
    out.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;

    const double scale = std::fabs(out.a0) + std::fabs(out.a1) + 1.0;
    const bool perfect = sse <= 1e-24 * scale * scale * n;
    if (perfect) {
        out.degenerate = true;
        out.se0 = out.se1 = 0.0;
        const auto degenerate_stats = [&](double est, double& t, double& p) {
            if (std::fabs(est) <= 1e-12 * scale) {
                t = 0.0;
                p = 1.0;
            } else {
                t = est > 0 ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
                p = 0.0;
            }
        };
        degenerate_stats(out.a0, out.t0, out.p0);
        degenerate_stats(out.a1, out.t1, out.p1);
        return out;
    }

    const double s2 = sse / out.dof;
    out.se1 = std::sqrt(s2 / sxx);
    out.se0 = std::sqrt(s2 * (1.0 / n + xb * xb / sxx));
    out.t0 = out.a0 / out.se0;
    out.t1 = out.a1 / out.se1;
    out.p0 = specfun::student_t_two_sided_p(out.t0, out.dof);
    out.p1 = specfun::student_t_two_sided_p(out.t1, out.dof);
    return out;
}

FingerprintReport classify(std::span<const SeriesPoint> series, double alpha) {
    if (series.size() < 3) {
        throw InsufficientDataError("classify needs at least 3 converged pulses");
    }
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw std::invalid_argument("alpha must lie in (0, 1)");
    }
    std::vector<double> x, y;
    x.reserve(series.size());
    y.reserve(series.size());
    for (const auto& pt : series) {
        x.push_back(std::exp(-pt.mu));
        y.push_back(pt.lambda);
    }

    FingerprintReport rep;
    rep.alpha = alpha;
    rep.ols = ols_fit(x, y);
    rep.knudsen_ratios = ratio_diagnostic(series);

    const bool intercept_sig = rep.ols.p0 <= alpha;
    const bool slope_sig = rep.ols.p1 <= alpha;
    if (intercept_sig && slope_sig) {
        rep.regime = Regime::NonKnudsen;
    } else if (intercept_sig && !slope_sig) {
        rep.regime = Regime::Knudsen;
    } else {
        rep.regime = Regime::Indeterminate;
    }
    return rep;
}

std::vector<RatioFlag> ratio_diagnostic(std::span<const SeriesPoint> series) {
    std::vector<RatioFlag> out;
    out.reserve(series.size());
    for (const auto& pt : series) {
        RatioFlag f;
        f.pulse_id = pt.pulse_id;
        f.ratio = pt.lambda * std::exp(pt.mu);
        f.above_boundary = f.ratio > curves::kKnudsenRatioBoundary;
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<double> eta_series(std::span<const SeriesPoint> series) {
    std::vector<double> out;
    out.reserve(series.size());
    for (const auto& pt : series) {
        out.push_back(curves::eta_from_gdc(GdcParams{pt.lambda, pt.mu, pt.sigma}));
    }
    return out;
}

}  // namespace tapfit::fingerprint
