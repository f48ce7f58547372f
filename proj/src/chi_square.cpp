#include "subcal/chi_square.hpp"

#include <cmath>
#include <limits>

#include "subcal/error.hpp"

namespace subcal::stats {
namespace {

constexpr int kMaxTerms = 10000;
constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;

// Series for P(a,x); converges quickly for x < a + 1.
double lower_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < kMaxTerms; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a,x); used for x >= a + 1.
double upper_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxTerms; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check_args(double a, double x) {
    if (!(a > 0.0)) throw DataError("incomplete gamma requires a > 0");
    if (std::isnan(x)) throw DataError("incomplete gamma argument is NaN");
}

}  // namespace

double gamma_p(double a, double x) {
    check_args(a, x);
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return x < a + 1.0 ? lower_series(a, x) : 1.0 - upper_fraction(a, x);
}

double gamma_q(double a, double x) {
    check_args(a, x);
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return x < a + 1.0 ? 1.0 - lower_series(a, x) : upper_fraction(a, x);
}

double chi_square_sf(double x, double df) {
    if (!(df > 0.0)) throw DataError("chi-square degrees of freedom must be positive");
    if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    return gamma_q(0.5 * df, 0.5 * x);
}

}  // namespace subcal::stats
