#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subcal/censoring.hpp"
#include "subcal/data_model.hpp"
#include "subcal/link.hpp"

namespace subcal {

enum class SeparationPolicy {
    Fail,  // throw SeparationError
    Keep,  // return the diverged estimate and list the affected times
};

struct FitOptions {
    double score_tolerance = 1e-8;
    double loglik_tolerance = 1e-10;  // relative change |dl| / (|l| + 0.1)
    int max_iterations = 100;
    int max_step_halvings = 40;
    SeparationPolicy separation = SeparationPolicy::Fail;
    // Without convergence, fitted hazards closer than this to 0 or 1 count as separated.
    double separation_hazard = 1e-8;
};

/// Discrete subdistribution hazard model
///   lambda_1(t | x) = h(baseline[t-1] + x' coefficients),  t = 1..k-1.
struct FittedModel {
    Link link = Link::Cloglog;
    int k = 2;
    std::vector<double> baseline;
    std::vector<double> coefficients;
    std::vector<std::string> covariate_names;

    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
    // Log-likelihood at the start and after every accepted Newton step.
    std::vector<double> loglik_trace;
    // Naive: inverse observed information, ignores the estimation of G.
    std::optional<std::vector<double>> standard_errors;
    // Times whose baseline diverged (SeparationPolicy::Keep only).
    std::vector<int> separated_times;
    // Censoring survival of the learning sample, carried for validation weights.
    std::optional<CensoringSurvival> censoring;

    std::size_t p() const { return coefficients.size(); }
    std::size_t n_parameters() const { return baseline.size() + coefficients.size(); }

    double linear_predictor(std::span<const double> x, int t) const;
};

// Parameter vector layout: (baseline_1..baseline_{k-1}, coefficients_1..coefficients_p).
struct LikelihoodEval {
    double loglik;
    std::vector<double> score;
    std::vector<double> hessian;  // symmetric n_parameters^2; empty unless requested
};

LikelihoodEval evaluate_likelihood(const std::vector<LongRecord>& rows, int k, std::size_t p,
                                   Link link, std::span<const double> theta,
                                   bool with_hessian = true);

/// Newton-Raphson with step halving on the weighted binary log-likelihood.
/// Throws DesignDeficiencyError, SeparationError or ConvergenceError.
FittedModel fit(const std::vector<LongRecord>& rows, int k, std::size_t p, Link link,
                const FitOptions& opts = {});

// Expands `learning` with its own reverse Kaplan-Meier censoring estimate and
// fits; the returned model carries that estimate.
FittedModel fit_dataset(const Dataset& learning, Link link, const FitOptions& opts = {});

double predict_hazard(const FittedModel& model, std::span<const double> x, int t);
double cumulative_incidence(const FittedModel& model, std::span<const double> x, int t);

}  // namespace subcal
