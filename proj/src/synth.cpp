#include "tapfit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "tapfit/curves.hpp"

namespace tapfit::synth {

double GainModel::scale(int gain) const {
    return std::pow(10.0, gain - reference_gain);
}

std::vector<double> default_time_grid() {
    constexpr int kPoints = 1000;
    constexpr double kStart = 0.001;
    constexpr double kEnd = 3.0;
    std::vector<double> t(kPoints);
    for (int i = 0; i < kPoints; ++i) {
        t[i] = kStart + (kEnd - kStart) * i / (kPoints - 1);
    }
    return t;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Area-one ground-truth curve over the grid.
std::vector<double> model_curve(const SynthConfig& c) {
    std::vector<double> out(c.time_grid.size());
    if (c.model == ModelKind::Sdc) {
        c.sdc.validate();
        std::vector<double> tau(c.time_grid.size());
        for (std::size_t i = 0; i < tau.size(); ++i) tau[i] = c.time_grid[i] * c.sdc.eta;
        curves::sdc_flux_grid(tau, c.sdc_terms, out);
        for (double& v : out) v *= c.sdc.eta * c.sdc.n_mol;
    } else {
        c.gdc.validate();
        curves::gdc_flux_grid(c.time_grid, c.gdc, out);
        const double area = curves::gdc_area(c.gdc);
        for (double& v : out) v /= area;
    }
    return out;
}

}  // namespace

PulseTrace generate_pulse(const SynthConfig& config) {
    if (config.time_grid.size() < 2) {
        throw std::invalid_argument("generate_pulse: time grid needs >= 2 points");
    }
    for (std::size_t i = 1; i < config.time_grid.size(); ++i) {
        if (!(config.time_grid[i] > config.time_grid[i - 1])) {
            throw std::invalid_argument("generate_pulse: time grid must increase");
        }
    }
    if (!(config.noise_sigma >= 0.0) || !(config.amplitude > 0.0) ||
        !std::isfinite(config.baseline_offset) || !std::isfinite(config.drift_slope)) {
        throw std::invalid_argument("generate_pulse: invalid config");
    }

    const std::vector<double> model = model_curve(config);
    const double gain_scale = config.gain_model.scale(config.gain);

    PulseTrace trace;
    trace.times = config.time_grid;
    trace.flux.resize(model.size());
    double peak = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        trace.flux[i] = config.amplitude * gain_scale * model[i];
        peak = std::max(peak, trace.flux[i]);
    }

    SplitMix64 rng{config.rng_seed};
    const double noise_std = config.noise_sigma * peak;
    for (std::size_t i = 0; i < trace.flux.size(); ++i) {
        trace.flux[i] += config.baseline_offset + config.drift_slope * trace.times[i];
        if (noise_std > 0.0) trace.flux[i] += noise_std * rng.next_gaussian();
    }

    trace.pulse_id = config.pulse_id;
    trace.injection_nmol = config.injection_nmol;
    trace.gain = config.gain;
    trace.meta["seed"] = std::to_string(config.rng_seed);
    if (config.model == ModelKind::Sdc) {
        trace.meta["truth_model"] = "sdc";
        trace.meta["truth_eta"] = fmt(config.sdc.eta);
        trace.meta["truth_nmol_model"] = fmt(config.sdc.n_mol);
    } else {
        trace.meta["truth_model"] = "gdc";
        trace.meta["truth_lambda"] = fmt(config.gdc.lambda);
        trace.meta["truth_mu"] = fmt(config.gdc.mu);
        trace.meta["truth_sigma"] = fmt(config.gdc.sigma);
    }
    return trace;
}

RegimeModel RegimeModel::knudsen() {
    RegimeModel m;
    m.kind = Kind::Knudsen;
    m.lambda0 = 1.546;
    m.slope = 0.0;
    return m;
}

RegimeModel RegimeModel::non_knudsen(double slope) {
    RegimeModel m;
    m.kind = Kind::NonKnudsen;
    m.lambda0 = 1.095;
    m.slope = slope;
    return m;
}

GdcParams RegimeModel::params_at(double nmol) const {
    const double expmu = expmu_offset + expmu_per_nmol * nmol;
    if (!(expmu > 0.0)) {
        throw std::invalid_argument("regime model yields non-positive exp(-mu)");
    }
    const double lambda =
        kind == Kind::Knudsen ? lambda0 : lambda0 + slope * expmu;
    return GdcParams{lambda, -std::log(expmu), sigma};
}

int RegimeModel::gain_at(double nmol, int base_gain) const {
    return nmol > gain_switch_nmol ? base_gain - 1 : base_gain;
}

std::vector<PulseTrace> generate_series(const SynthConfig& base,
                                        std::span<const double> nmol_schedule,
                                        const RegimeModel& regime) {
    if (nmol_schedule.empty()) {
        throw std::invalid_argument("generate_series: empty nmol schedule");
    }
    std::vector<PulseTrace> out;
    out.reserve(nmol_schedule.size());
    for (std::size_t i = 0; i < nmol_schedule.size(); ++i) {
        const double nmol = nmol_schedule[i];
        if (!(nmol > 0.0)) {
            throw std::invalid_argument("generate_series: nmol must be positive");
        }
        SynthConfig c = base;
        c.model = ModelKind::Gdc;
        c.gdc = regime.params_at(nmol);
        c.amplitude = base.amplitude * nmol;
        c.gain = regime.gain_at(nmol, base.gain);
        c.rng_seed = base.rng_seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(i);
        c.injection_nmol = nmol;
        char id[32];
        std::snprintf(id, sizeof(id), "pulse-%03zu", i);
        c.pulse_id = id;
        out.push_back(generate_pulse(c));
    }
    return out;
}

}  // namespace tapfit::synth
