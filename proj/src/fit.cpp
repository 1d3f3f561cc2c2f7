#include "tapfit/fit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "tapfit/curves.hpp"
#include "tapfit/preprocess.hpp"

namespace tapfit {

namespace {

constexpr double kDampingFloor = 1e-12;
constexpr double kDampingCeil = 1e12;
constexpr double kFdStepScale = 1e-6;

// Cholesky factorization of a small SPD matrix (row-major). Returns false if
// a pivot is not positive.
bool cholesky(std::vector<double>& a, int p) {
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = a[i * p + j];
            for (int k = 0; k < j; ++k) sum -= a[i * p + k] * a[j * p + k];
            if (i == j) {
                if (!(sum > 0.0)) return false;
                a[i * p + i] = std::sqrt(sum);
            } else {
                a[i * p + j] = sum / a[j * p + j];
            }
        }
    }
    return true;
}

// Solves L L^T x = b given the factor from cholesky().
void cholesky_solve(const std::vector<double>& l, int p, std::vector<double>& b) {
    for (int i = 0; i < p; ++i) {
        double sum = b[i];
        for (int k = 0; k < i; ++k) sum -= l[i * p + k] * b[k];
        b[i] = sum / l[i * p + i];
    }
    for (int i = p - 1; i >= 0; --i) {
        double sum = b[i];
        for (int k = i + 1; k < p; ++k) sum -= l[k * p + i] * b[k];
        b[i] = sum / l[i * p + i];
    }
}

// Inverse of an SPD matrix through its Cholesky factor.
bool spd_inverse(std::vector<double> a, int p, std::vector<double>& inv) {
    if (!cholesky(a, p)) return false;
    inv.assign(static_cast<std::size_t>(p) * p, 0.0);
    std::vector<double> e(p);
    for (int j = 0; j < p; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        cholesky_solve(a, p, e);
        for (int i = 0; i < p; ++i) inv[i * p + j] = e[i];
    }
    return true;
}

// A scale-free basis curve g(t; shape) evaluated over the whole grid from
// internal (log-reparameterized) shape coordinates. The fitted model is
// x_bar + s * g with s = exp(u[1]).
struct CurveFamily {
    int n_shape = 0;
    std::function<void(const double* shape, std::vector<double>& g)> eval;
};

struct LmOutcome {
    std::vector<double> u;       // internal coordinates at the solution
    std::vector<double> g;       // basis curve at the solution
    double ss = 0.0;
    int iterations = 0;
    bool converged = false;
};

double sum_squares(const std::vector<double>& r) {
    double ss = 0.0;
    for (double v : r) ss += v * v;
    return ss;
}

void residuals_from(const std::vector<double>& y, double x_bar, double s,
                    const std::vector<double>& g, std::vector<double>& r) {
    for (std::size_t i = 0; i < y.size(); ++i) r[i] = x_bar + s * g[i] - y[i];
}

LmOutcome levenberg_marquardt(const std::vector<double>& y, const CurveFamily& fam,
                              std::vector<double> u, const SolverOptions& opts) {
    const int n = static_cast<int>(y.size());
    const int p = 2 + fam.n_shape;

    std::vector<double> g(n), g_plus(n), g_minus(n), g_trial(n);
    std::vector<double> r(n), jac(static_cast<std::size_t>(n) * p);

    fam.eval(u.data() + 2, g);
    double s = std::exp(u[1]);
    residuals_from(y, u[0], s, g, r);
    double ss = sum_squares(r);

    double damping = opts.initial_damping;
    LmOutcome out;
    out.converged = false;

    std::vector<double> jtj(static_cast<std::size_t>(p) * p), jtr(p), delta(p), u_trial(u),
        shape_pert(fam.n_shape);

    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        out.iterations = iter;
        s = std::exp(u[1]);

        // Jacobian of the residual w.r.t. internal coordinates. The intercept
        // and scale columns are analytic; shape columns use central
        // differences with step 1e-6 * max(|w|, 1).
        for (int i = 0; i < n; ++i) {
            jac[static_cast<std::size_t>(i) * p + 0] = 1.0;
            jac[static_cast<std::size_t>(i) * p + 1] = s * g[i];
        }
        for (int k = 0; k < fam.n_shape; ++k) {
            const double h = kFdStepScale * std::max(std::fabs(u[2 + k]), 1.0);
            std::copy(u.begin() + 2, u.end(), shape_pert.begin());
            shape_pert[k] = u[2 + k] + h;
            fam.eval(shape_pert.data(), g_plus);
            shape_pert[k] = u[2 + k] - h;
            fam.eval(shape_pert.data(), g_minus);
            const double inv2h = 1.0 / (2.0 * h);
            for (int i = 0; i < n; ++i) {
                jac[static_cast<std::size_t>(i) * p + 2 + k] =
                    s * (g_plus[i] - g_minus[i]) * inv2h;
            }
        }

        // A column with no effect on the model means the parameter cannot be
        // estimated from these samples.
        double max_col = 0.0;
        std::vector<double> col_norm(p, 0.0);
        for (int k = 0; k < p; ++k) {
            double nrm = 0.0;
            for (int i = 0; i < n; ++i) {
                const double v = jac[static_cast<std::size_t>(i) * p + k];
                nrm += v * v;
            }
            col_norm[k] = std::sqrt(nrm);
            max_col = std::max(max_col, col_norm[k]);
        }
        for (int k = 0; k < p; ++k) {
            if (col_norm[k] < 1e-13 * max_col) {
                throw RankDeficientError("fit parameter " + std::to_string(k) +
                                         " has no effect on the model over these samples");
            }
        }

        for (int a = 0; a < p; ++a) {
            for (int b = a; b < p; ++b) {
                double acc = 0.0;
                for (int i = 0; i < n; ++i) {
                    acc += jac[static_cast<std::size_t>(i) * p + a] *
                           jac[static_cast<std::size_t>(i) * p + b];
                }
                jtj[a * p + b] = acc;
                jtj[b * p + a] = acc;
            }
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += jac[static_cast<std::size_t>(i) * p + a] * r[i];
            jtr[a] = acc;
        }

        bool stepped = false;
        while (true) {
            std::vector<double> m(jtj);
            for (int a = 0; a < p; ++a) m[a * p + a] += damping;
            for (int a = 0; a < p; ++a) delta[a] = -jtr[a];
            if (!cholesky(m, p)) {
                damping *= 10.0;
                if (damping > kDampingCeil) break;
                continue;
            }
            cholesky_solve(m, p, delta);

            for (int a = 0; a < p; ++a) u_trial[a] = u[a] + delta[a];
            fam.eval(u_trial.data() + 2, g_trial);
            const double s_trial = std::exp(u_trial[1]);
            residuals_from(y, u_trial[0], s_trial, g_trial, r);
            const double ss_trial = sum_squares(r);

            if (std::isfinite(ss_trial) && ss_trial < ss) {
                const double improvement = (ss - ss_trial) / std::max(ss, 1e-300);
                double step2 = 0.0, u2 = 0.0;
                for (int a = 0; a < p; ++a) {
                    step2 += delta[a] * delta[a];
                    u2 += u[a] * u[a];
                }
                const double rel_step = std::sqrt(step2) / std::max(std::sqrt(u2), 1.0);

                u = u_trial;
                g.swap(g_trial);
                ss = ss_trial;
                damping = std::max(damping / 10.0, kDampingFloor);
                stepped = true;
                if (improvement < opts.ss_rel_tol || rel_step < opts.step_rel_tol) {
                    out.converged = true;
                }
                break;
            }
            damping *= 10.0;
            if (damping > kDampingCeil) break;
        }

        if (!stepped) break;  // damping exhausted: no descent direction left
        if (out.converged) break;
    }

    // r currently holds the residuals of the last *trial*; recompute at u.
    s = std::exp(u[1]);
    residuals_from(y, u[0], s, g, r);
    out.u = std::move(u);
    out.g = std::move(g);
    out.ss = sum_squares(r);
    return out;
}

// Covariance mse * (J^T J)^-1 in external coordinates. chain[k] is
// d(theta_k)/d(w_k) for each shape parameter; area_fn is the basis-curve area
// A(w) when the reported beta is s * A (empty for the SDC, where A == 1).
void fill_diagnostics(FitResult& res, const std::vector<double>& y, const CurveFamily& fam,
                      const LmOutcome& lm,
                      const std::function<double(const double*)>& area_fn,
                      const std::vector<double>& chain) {
    const int n = static_cast<int>(y.size());
    const int p = 2 + fam.n_shape;
    const double s = std::exp(lm.u[1]);

    res.iterations = lm.iterations;
    res.converged = lm.converged;
    res.mse = lm.ss / n;
    res.rmse = std::sqrt(res.mse);

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= n;
    double sstot = 0.0;
    for (double v : y) sstot += (v - mean) * (v - mean);
    res.r_squared = sstot > 0.0 ? 1.0 - lm.ss / sstot : 1.0;

    res.residuals.resize(n);
    for (int i = 0; i < n; ++i) res.residuals[i] = y[i] - (lm.u[0] + s * lm.g[i]);

    const double area = area_fn ? area_fn(lm.u.data() + 2) : 1.0;
    res.model.x_bar = lm.u[0];
    res.model.beta = s * area;

    // External Jacobian columns: d(model)/d(x_bar, beta, theta_k).
    std::vector<double> jac(static_cast<std::size_t>(n) * p);
    std::vector<double> g_plus(n), g_minus(n), shape(fam.n_shape);
    for (int i = 0; i < n; ++i) {
        jac[static_cast<std::size_t>(i) * p + 0] = 1.0;
        jac[static_cast<std::size_t>(i) * p + 1] = lm.g[i] / area;
    }
    for (int k = 0; k < fam.n_shape; ++k) {
        const double h = kFdStepScale * std::max(std::fabs(lm.u[2 + k]), 1.0);
        std::copy(lm.u.begin() + 2, lm.u.end(), shape.begin());
        shape[k] = lm.u[2 + k] + h;
        fam.eval(shape.data(), g_plus);
        const double area_plus = area_fn ? area_fn(shape.data()) : 1.0;
        shape[k] = lm.u[2 + k] - h;
        fam.eval(shape.data(), g_minus);
        const double area_minus = area_fn ? area_fn(shape.data()) : 1.0;
        const double inv2h = 1.0 / (2.0 * h);
        const double dA = (area_plus - area_minus) * inv2h;
        for (int i = 0; i < n; ++i) {
            const double dg = (g_plus[i] - g_minus[i]) * inv2h;
            // model = x_bar + (beta/A(w)) * g(w); differentiate at fixed beta.
            const double dmodel_dw = s * dg - s * (dA / area) * lm.g[i];
            jac[static_cast<std::size_t>(i) * p + 2 + k] = dmodel_dw / chain[k];
        }
    }

    std::vector<double> jtj(static_cast<std::size_t>(p) * p, 0.0);
    for (int a = 0; a < p; ++a) {
        for (int b = a; b < p; ++b) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                acc += jac[static_cast<std::size_t>(i) * p + a] *
                       jac[static_cast<std::size_t>(i) * p + b];
            }
            jtj[a * p + b] = acc;
            jtj[b * p + a] = acc;
        }
    }
    std::vector<double> inv;
    if (!spd_inverse(jtj, p, inv)) {
        if (res.converged) {
            throw RankDeficientError("J^T J is singular at the solution");
        }
        return;  // diverged fit: leave covariance empty
    }
    res.covariance.resize(inv.size());
    res.std_errors.resize(p);
    for (int a = 0; a < p; ++a) {
        for (int b = 0; b < p; ++b) res.covariance[a * p + b] = res.mse * inv[a * p + b];
        res.std_errors[a] = std::sqrt(std::max(res.covariance[a * p + a], 0.0));
    }
}

double trace_mean_time(const NormalizedPulse& pulse) {
    double m = 0.0;
    for (std::size_t i = 1; i < pulse.times.size(); ++i) {
        const double dt = pulse.times[i] - pulse.times[i - 1];
        m += 0.5 * (pulse.times[i] * pulse.flux_bar[i] +
                    pulse.times[i - 1] * pulse.flux_bar[i - 1]) * dt;
    }
    return m;
}

}  // namespace

InitGuess default_init(const NormalizedPulse& pulse) {
    constexpr double kSigma0 = 0.5;
    const GdcParams fallback{2.5, -2.4, 0.5};
    if (pulse.times.empty() || pulse.flux_bar.size() != pulse.times.size()) {
        throw std::invalid_argument("default_init: malformed pulse");
    }
    const auto peak_it = std::max_element(pulse.flux_bar.begin(), pulse.flux_bar.end());
    const double t_peak = pulse.times[std::distance(pulse.flux_bar.begin(), peak_it)];
    const double t_mean = trace_mean_time(pulse);

    if (!(t_peak > 0.0) || !std::isfinite(t_peak) || !std::isfinite(t_mean)) {
        return {fallback, true};
    }
    const double mu0 = std::log(t_peak) + kSigma0 * kSigma0;
    const double denom = t_mean - std::exp(mu0 + 0.5 * kSigma0 * kSigma0);
    if (!std::isfinite(mu0) || !(denom > 0.0)) {
        return {fallback, true};
    }
    const double lambda0 = std::clamp(1.0 / denom, 0.1, 1e3);
    return {GdcParams{lambda0, mu0, kSigma0}, false};
}

FitResult fit_gdc(const NormalizedPulse& pulse, const SolverOptions& opts) {
    if (pulse.times.size() < 6) {
        throw InsufficientDataError("fit_gdc needs at least 6 samples");
    }
    InitGuess init{opts.init_gdc.value_or(GdcParams{}), false};
    if (opts.init_gdc) {
        init.params.validate();
    } else {
        init = default_init(pulse);
    }

    CurveFamily fam;
    fam.n_shape = 3;
    const std::vector<double>& t = pulse.times;
    fam.eval = [&t](const double* w, std::vector<double>& g) {
        const GdcParams p{std::exp(w[0]), w[1], std::exp(w[2])};
        curves::gdc_flux_grid(t, p, g);
    };

    std::vector<double> u = {0.0, 0.0, std::log(init.params.lambda), init.params.mu,
                             std::log(init.params.sigma)};
    LmOutcome lm = levenberg_marquardt(pulse.flux_bar, fam, std::move(u), opts);

    FitResult res;
    res.model.kind = ModelKind::Gdc;
    res.model.time_basis = opts.time_basis;
    res.model.gdc = GdcParams{std::exp(lm.u[2]), lm.u[3], std::exp(lm.u[4])};
    res.param_names = {"x_bar", "beta", "lambda", "mu", "sigma"};
    res.init_fallback = init.fallback;

    const auto area_fn = [](const double* w) {
        return curves::gdc_area(GdcParams{std::exp(w[0]), w[1], std::exp(w[2])});
    };
    const std::vector<double> chain = {res.model.gdc.lambda, 1.0, res.model.gdc.sigma};
    fill_diagnostics(res, pulse.flux_bar, fam, lm, area_fn, chain);
    return res;
}

FitResult fit_sdc(const NormalizedPulse& pulse, const SolverOptions& opts) {
    if (pulse.times.size() < 3) {
        throw InsufficientDataError("fit_sdc needs at least 3 samples");
    }
    double eta0 = 1.0;
    if (opts.init_eta) {
        if (!(*opts.init_eta > 0.0)) throw std::invalid_argument("init_eta must be positive");
        eta0 = *opts.init_eta;
    } else {
        const double t_mean = trace_mean_time(pulse);
        // dimensionless mean residence time of the SDC is 1/2, so eta ~ 1/(2 t_mean)
        if (std::isfinite(t_mean) && t_mean > 0.0) {
            eta0 = std::clamp(0.5 / t_mean, 1e-3, 1e6);
        }
    }

    CurveFamily fam;
    fam.n_shape = 1;
    const std::vector<double>& t = pulse.times;
    const int terms = opts.sdc_terms;
    std::vector<double> tau(t.size());
    fam.eval = [&t, &tau, terms](const double* w, std::vector<double>& g) {
        const double eta = std::exp(w[0]);
        for (std::size_t i = 0; i < t.size(); ++i) tau[i] = t[i] * eta;
        curves::sdc_flux_grid(tau, terms, g);
        for (double& v : g) v *= eta;  // unit-area basis in clock time
    };

    std::vector<double> u = {0.0, 0.0, std::log(eta0)};
    LmOutcome lm = levenberg_marquardt(pulse.flux_bar, fam, std::move(u), opts);

    FitResult res;
    res.model.kind = ModelKind::Sdc;
    res.model.time_basis = opts.time_basis;
    res.model.eta = std::exp(lm.u[2]);
    res.param_names = {"x_bar", "beta", "eta"};

    const std::vector<double> chain = {res.model.eta};
    fill_diagnostics(res, pulse.flux_bar, fam, lm, nullptr, chain);
    return res;
}

Conversion conversion(std::span<const double> betas) {
    double total = 0.0;
    for (double b : betas) {
        if (!(b >= 0.0)) throw std::invalid_argument("conversion: beta must be >= 0");
        total += b;
    }
    Conversion out;
    out.raw = 1.0 - total;
    out.value = std::clamp(out.raw, 0.0, 1.0);
    out.clamped = out.value != out.raw;
    return out;
}

}  // namespace tapfit
