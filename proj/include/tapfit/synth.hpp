#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tapfit/types.hpp"

namespace tapfit::synth {

/// splitmix64. Chosen because it is tiny and exactly specified, so traces can
/// be regenerated bit-for-bit outside this codebase from the seed alone.
struct SplitMix64 {
    std::uint64_t state = 0;
    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    /// Uniform draw on (0, 1]: ((bits >> 11) + 1) * 2^-53.
    double next_unit() { return ((next() >> 11) + 1) * 0x1.0p-53; }
    /// Basic Box-Muller, cosine branch; consumes exactly two uniforms.
    double next_gaussian() {
        const double u1 = next_unit();
        const double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }
};

/// Amplifier gain to linear signal scale: one decade per gain step relative
/// to the reference setting, scale = 10^(gain - reference_gain).
struct GainModel {
    int reference_gain = 8;
    double scale(int gain) const;
};

std::vector<double> default_time_grid();  // 1000 uniform points on [0.001, 3] s

struct SynthConfig {
    ModelKind model = ModelKind::Gdc;
    GdcParams gdc{2.46, -2.43, 0.50};
    SdcParams sdc{1.0, 1.0};
    int sdc_terms = 2000;
    std::vector<double> time_grid = default_time_grid();
    double noise_sigma = 0.0;      // Gaussian noise std as a fraction of peak height
    double baseline_offset = 0.0;  // signal units
    double drift_slope = 0.0;      // signal units per second
    double amplitude = 1.0;        // signal units per unit of model area
    int gain = 8;
    GainModel gain_model{};
    std::uint64_t rng_seed = 0;
    std::string pulse_id = "pulse-000";
    std::optional<double> injection_nmol;
};

/// flux(t) = amplitude * gain_scale * model(t) + baseline_offset +
///           drift_slope * t + N(0, noise_sigma * peak), where model(t) is the
/// area-one curve of the configured ground truth and peak is the maximum of
/// the scaled noiseless curve. Deterministic for a fixed seed. The ground
/// truth is recorded in the trace metadata (truth_* keys).
PulseTrace generate_pulse(const SynthConfig& config);

/// Per-pulse ground-truth schedule over an injection series. exp(-mu) is
/// affine in nmol; lambda is constant in the Knudsen regime and
/// a0 + a1 exp(-mu) otherwise. Coefficient defaults follow the magnitudes of
/// the argon regression table.
struct RegimeModel {
    enum class Kind { Knudsen, NonKnudsen };
    Kind kind = Kind::Knudsen;
    double lambda0 = 1.546;       // constant rate (Knudsen) or intercept a0
    double slope = 0.0;           // a1, used when non-Knudsen
    double expmu_offset = 2.9;    // exp(-mu) = offset + per_nmol * nmol
    double expmu_per_nmol = 0.45;
    double sigma = 0.5;
    double gain_switch_nmol = 12.2;  // gain drops by one step above this
    static RegimeModel knudsen();
    static RegimeModel non_knudsen(double slope);

    GdcParams params_at(double nmol) const;
    int gain_at(double nmol, int base_gain) const;
};

/// One trace per scheduled nmol. Pulse i uses an independent splitmix64
/// stream seeded with base.rng_seed + i * 0x9E3779B97F4A7C15, amplitude
/// base.amplitude * nmol, and the regime-model parameters; traces are
/// independent of generation order.
std::vector<PulseTrace> generate_series(const SynthConfig& base,
                                        std::span<const double> nmol_schedule,
                                        const RegimeModel& regime);

}  // namespace tapfit::synth
