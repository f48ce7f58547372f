#include "subcal/link.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "subcal/error.hpp"

namespace subcal {

std::string_view to_string(Link link) {
    switch (link) {
        case Link::Cloglog: return "cloglog";
        case Link::Logit: return "logit";
    }
    return "unknown";
}

Link parse_link(std::string_view name) {
    if (name == "cloglog" || name == "gompertz") return Link::Cloglog;
    if (name == "logit" || name == "logistic") return Link::Logit;
    throw DataError("unknown link '" + std::string(name) + "' (expected cloglog or logit)");
}

namespace link_fn {
namespace {

double log_expit(double eta) {
    return eta > 0.0 ? -std::log1p(std::exp(-eta)) : eta - std::log1p(std::exp(eta));
}

}  // namespace

double response(Link link, double eta) {
    switch (link) {
        case Link::Cloglog: return -std::expm1(-std::exp(eta));
        case Link::Logit:
            return eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
    }
    return 0.0;
}

double predictor(Link link, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DataError("link predictor requires a probability in (0,1)");
    switch (link) {
        case Link::Cloglog: return std::log(-std::log1p(-p));
        case Link::Logit: return std::log(p) - std::log1p(-p);
    }
    return 0.0;
}

double log_response(Link link, double eta) {
    switch (link) {
        case Link::Cloglog: {
            // log(1 - exp(-u)) = log u - u/2 + O(u^2) for tiny u; avoids log(0) once exp(eta) underflows.
            if (eta < -30.0) return eta - 0.5 * std::exp(eta);
            return std::log(-std::expm1(-std::exp(eta)));
        }
        case Link::Logit: return log_expit(eta);
    }
    return 0.0;
}

double log_complement(Link link, double eta) {
    switch (link) {
        case Link::Cloglog: return -std::exp(eta);
        case Link::Logit: return log_expit(-eta);
    }
    return 0.0;
}

RowDerivatives bernoulli_row(Link link, double eta, int y, double w) {
    RowDerivatives r{};
    const double log_term = y == 1 ? log_response(link, eta) : log_complement(link, eta);
    r.loglik = w * log_term;

    if (link == Link::Logit) {
        const double h = response(link, eta);
        r.d1 = w * (y - h);
        r.d2 = -w * h * (1.0 - h);
        return r;
    }

    const double u = std::exp(eta);
    if (y == 0) {
        r.d1 = -w * u;
        r.d2 = -w * u;
    } else if (u > 50.0) {
        const double e = std::exp(-u);
        r.d1 = w * u * e;
        r.d2 = w * u * e * (1.0 - u);
    } else {
        const double em1 = std::expm1(u);
        const double numer = u < 1e-4 ? -u * u * (0.5 + u / 3.0 + u * u / 8.0) : em1 - u * std::exp(u);
        r.d1 = w * u / em1;
        r.d2 = w * u * numer / (em1 * em1);
    }
    return r;
}

}  // namespace link_fn
}  // namespace subcal
