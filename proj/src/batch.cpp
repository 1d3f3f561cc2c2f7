#include "tapfit/batch.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tapfit/preprocess.hpp"

namespace tapfit {

namespace {

PulseFitRow fit_one(const PulseTrace& trace, const BatchOptions& opts) {
    PulseFitRow row;
    row.pulse_id = trace.pulse_id;
    row.injection_nmol = trace.injection_nmol;
    row.gain = trace.gain;
    try {
        row.flux_range = preprocess::flux_range(trace);
        const NormalizedPulse pulse = preprocess::normalize(trace);
        if (opts.models != ModelSelect::Sdc) row.gdc = fit_gdc(pulse, opts.solver);
        if (opts.models != ModelSelect::Gdc) row.sdc = fit_sdc(pulse, opts.solver);
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

}  // namespace

std::vector<PulseFitRow> fit_series(std::span<const PulseTrace> traces,
                                    const BatchOptions& opts) {
    std::vector<PulseFitRow> rows(traces.size());
    const auto n = static_cast<std::ptrdiff_t>(traces.size());
#ifdef _OPENMP
    const int threads = opts.threads > 0 ? opts.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        rows[i] = fit_one(traces[i], opts);
    }
    return rows;
}

std::vector<fingerprint::SeriesPoint> to_series_points(std::span<const PulseFitRow> rows,
                                                       double min_r2) {
    std::vector<fingerprint::SeriesPoint> out;
    for (const auto& row : rows) {
        if (!row.error.empty() || !row.gdc) continue;
        const FitResult& fit = *row.gdc;
        if (!fit.converged || !(fit.r_squared >= min_r2)) continue;
        if (!std::isfinite(fit.model.gdc.lambda) || !std::isfinite(fit.model.gdc.mu) ||
            !std::isfinite(fit.model.gdc.sigma)) {
            continue;
        }
        fingerprint::SeriesPoint pt;
        pt.pulse_id = row.pulse_id;
        if (row.injection_nmol) pt.injection_nmol = *row.injection_nmol;
        pt.lambda = fit.model.gdc.lambda;
        pt.mu = fit.model.gdc.mu;
        pt.sigma = fit.model.gdc.sigma;
        pt.fit_r2 = fit.r_squared;
        out.push_back(std::move(pt));
    }
    return out;
}

}  // namespace tapfit
