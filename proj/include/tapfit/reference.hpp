#pragma once

#include <span>

namespace tapfit::reference {

// Naive direct-summation forms of the series curves: one exp() per term, no
// recurrence, no early exit, strictly serial. Slow but transparently correct;
// the unit tests and the benchmark compare the production kernels against
// these.

double sdc_flux(double tau, int terms);
double sdc_fstar(double tau, int terms);

void sdc_flux_grid(std::span<const double> tau, int terms, std::span<double> out);
void sdc_fstar_grid(std::span<const double> tau, int terms, std::span<double> out);

}  // namespace tapfit::reference
