#pragma once

namespace subcal::stats {

// Regularized lower and upper incomplete gamma functions P(a,x), Q(a,x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Upper tail P(X > x) of a chi-square variable with df degrees of freedom.
double chi_square_sf(double x, double df);

}  // namespace subcal::stats
