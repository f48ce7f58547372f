#pragma once

#include <string>
#include <string_view>

namespace subcal {

// Response function h mapping the linear predictor to a hazard in (0,1).
enum class Link {
    Cloglog,  // inverse complementary log-log: h(eta) = 1 - exp(-exp(eta)) (Gompertz model)
    Logit,    // h(eta) = 1 / (1 + exp(-eta))
};

std::string_view to_string(Link link);
Link parse_link(std::string_view name);

// Derivatives of the per-row Bernoulli log-likelihood with respect to eta.
struct RowDerivatives {
    double loglik;
    double d1;
    double d2;
};

namespace link_fn {

double response(Link link, double eta);
// Inverse of response; p must lie in (0,1).
double predictor(Link link, double p);

// log h(eta) and log(1 - h(eta)) evaluated without forming h.
double log_response(Link link, double eta);
double log_complement(Link link, double eta);

// w * {y log h + (1-y) log(1-h)} and its first two eta-derivatives.
RowDerivatives bernoulli_row(Link link, double eta, int y, double w);

}  // namespace link_fn
}  // namespace subcal
