#pragma once

#include "tapfit/types.hpp"

namespace tapfit::specfun {

/// Error function, absolute error <= 1e-12 on [-6, 6]; saturates to +/-1
/// beyond |x| > 6. Throws std::invalid_argument on non-finite input.
double erf(double x);

/// Regularized incomplete beta function I_x(a, b), a > 0, b > 0, x in [0, 1].
/// Continued-fraction evaluation, absolute error <= 1e-10.
Probability reg_inc_beta(double a, double b, double x);

/// Two-sided Student-t tail probability P(|T| >= |t|) with dof degrees of
/// freedom.
Probability student_t_two_sided_p(double t, int dof);

}  // namespace tapfit::specfun
