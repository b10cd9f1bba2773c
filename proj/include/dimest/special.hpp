#pragma once

namespace dimest {

// Upper regularized incomplete gamma Q(a, z) = Gamma(a, z) / Gamma(a).
// Series for z < a + 1, Lentz continued fraction otherwise; absolute error below 1e-10.
double regularized_gamma_Q(double a, double z);

// Lower regularized incomplete gamma P(a, z) = 1 - Q(a, z).
double regularized_gamma_P(double a, double z);

double std_normal_cdf(double x);

// Phi(x) - 1/2 without the cancellation of forming Phi first.
double std_normal_cdf_centered(double x);

}  // namespace dimest
