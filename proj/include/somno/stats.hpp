#pragma once

namespace somno {

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation, absolute accuracy around 1e-14 over the tested domain.
double ibeta_regularized(double a, double b, double x);

// Student t CDF via the incomplete beta identity.
double student_t_cdf(double t, double df);

double normal_cdf(double z);

}  // namespace somno
