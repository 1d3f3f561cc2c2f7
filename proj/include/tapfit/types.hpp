#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tapfit {

/// Parse failure with the 1-based line number of the offending input line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t line)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A trace whose area (after baseline shift) is zero or negative.
class DegenerateTraceError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The fit Jacobian lost rank: one or more parameters have no effect on the
/// model over the given samples.
class RankDeficientError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Fewer data points than the operation requires.
class InsufficientDataError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Filesystem-level failure (unreadable input, unwritable output).
class IoError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A probability value, guaranteed to lie in [0, 1]. Construction clamps
/// sub-epsilon numerical overshoot and rejects anything else.
class Probability {
public:
    explicit Probability(double v) {
        if (!std::isfinite(v) || v < -1e-9 || v > 1.0 + 1e-9) {
            throw std::invalid_argument("probability out of [0,1]: " + std::to_string(v));
        }
        value_ = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
    double value() const noexcept { return value_; }
    operator double() const noexcept { return value_; }

private:
    double value_;
};

/// Shape parameters of the generalized diffusion curve: exponential rate
/// lambda, lognormal log-median mu and log-scale sigma. lambda and mu are
/// dimensionless when fitting in dimensionless time and carry 1/s when
/// fitting in clock time.
struct GdcParams {
    double lambda = 1.0;
    double mu = 0.0;
    double sigma = 0.5;

    void validate() const {
        if (!(lambda > 0.0) || !std::isfinite(lambda) || !std::isfinite(mu) ||
            !(sigma > 0.0) || !std::isfinite(sigma)) {
            throw std::invalid_argument("invalid GDC parameters");
        }
    }

    /// Parameters of the ideal Knudsen response: lambda = pi^2/4,
    /// mu = -pi^2/4, sigma = 1/2.
    static GdcParams knudsen_ideal();
};

/// Standard-diffusion-curve parameters: transport rate eta = D/(eps L^2)
/// in 1/s and the injected amount in mol.
struct SdcParams {
    double eta = 1.0;
    double n_mol = 1.0;

    void validate() const {
        if (!(eta > 0.0) || !std::isfinite(eta) || !(n_mol > 0.0) || !std::isfinite(n_mol)) {
            throw std::invalid_argument("invalid SDC parameters");
        }
    }
};

/// Reactor geometry; supplies eta and the initial concentration N/(eps A L).
struct ReactorConfig {
    double length = 1.0;       // cm
    double area = 1.0;         // cm^2
    double porosity = 0.4;     // dimensionless
    double diffusivity = 1.0;  // cm^2/s

    void validate() const {
        if (!(length > 0.0) || !(area > 0.0) || !(diffusivity > 0.0) ||
            !(porosity > 0.0) || !(porosity < 1.0)) {
            throw std::invalid_argument("invalid reactor configuration");
        }
    }

    double eta() const { return diffusivity / (porosity * length * length); }
    double initial_concentration(double n_mol) const {
        return n_mol / (porosity * area * length);
    }
};

/// A raw pulse-response trace: sampled times (s) and flux in acquisition
/// signal units, plus whatever metadata the source carried.
struct PulseTrace {
    std::vector<double> times;
    std::vector<double> flux;
    std::string pulse_id;
    std::optional<double> injection_nmol;
    std::optional<int> gain;
    std::map<std::string, std::string> meta;

    void validate() const;
};

/// Baseline-shifted, area-one flux ready for fitting. baseline_shift is the
/// subtracted minimum, area_scale the trapezoidal area divided out.
struct NormalizedPulse {
    std::vector<double> times;
    std::vector<double> flux_bar;
    double baseline_shift = 0.0;
    double area_scale = 1.0;

    std::string pulse_id;
    std::optional<double> injection_nmol;
    std::optional<int> gain;
    std::map<std::string, std::string> meta;
};

enum class ModelKind { Sdc, Gdc };
enum class TimeBasis { ClockTime, Dimensionless };

}  // namespace tapfit
