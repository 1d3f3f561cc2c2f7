#include "tapfit/reference.hpp"

#include <cmath>
#include <numbers>

namespace tapfit::reference {

namespace {
constexpr double kPi = std::numbers::pi;
}

double sdc_flux(double tau, int terms) {
    if (tau < 1e-6) return 0.0;
    double sum = 0.0;
    for (int n = 0; n < terms; ++n) {
        const double m = 2.0 * n + 1.0;
        const double term = m * std::exp(-m * m * kPi * kPi * tau / 4.0);
        sum += (n % 2 == 0) ? term : -term;
    }
    return kPi * sum;
}

double sdc_fstar(double tau, int terms) {
    if (tau < 1e-6) return 0.0;
    double sum = 0.0;
    for (int n = 0; n < terms; ++n) {
        const double term =
            (2.0 * n + 1.0) * std::exp(-static_cast<double>(n) * (n + 1.0) * kPi * kPi * tau);
        sum += (n % 2 == 0) ? term : -term;
    }
    return sum;
}

void sdc_flux_grid(std::span<const double> tau, int terms, std::span<double> out) {
    for (std::size_t i = 0; i < tau.size(); ++i) out[i] = sdc_flux(tau[i], terms);
}

void sdc_fstar_grid(std::span<const double> tau, int terms, std::span<double> out) {
    for (std::size_t i = 0; i < tau.size(); ++i) out[i] = sdc_fstar(tau[i], terms);
}

}  // namespace tapfit::reference
