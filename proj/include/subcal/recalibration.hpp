#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "subcal/calibration.hpp"
#include "subcal/censoring.hpp"
#include "subcal/data_model.hpp"
#include "subcal/shm_glm.hpp"

namespace subcal {

// Binary outcome, weight and predicted hazard of one validation row.
struct RecalPair {
    int y;
    double w;
    double hazard;
};

/// Logistic recalibration logit(pi) = a + b * logit(hazard) fitted by weighted
/// maximum likelihood, with likelihood-ratio tests of
///   (i)   a = 0, b = 1          (overall, 2 df)
///   (ii)  a = 0 given b = 1     (calibration-in-the-large, 1 df)
///   (iii) b = 1 given a free    (refinement, 1 df)
struct RecalibrationResult {
    double a_hat = 0.0;
    double b_hat = 1.0;
    double a_given_b1 = 0.0;
    double b_given_a0 = 1.0;  // slope of the a = 0 fit
    double b_given_a = 1.0;   // equals b_hat

    double loglik_full = 0.0;
    double loglik_b1 = 0.0;
    double loglik_a0 = 0.0;
    double loglik_null = 0.0;

    double lr_overall = 0.0;
    double lr_intercept = 0.0;
    double lr_slope = 0.0;
    double p_overall = 1.0;
    double p_intercept = 1.0;
    double p_slope = 1.0;

    // False when every logit(hazard) is equal; b_hat and p_slope are then NaN.
    bool slope_identifiable = true;
    std::size_t n_pairs = 0;
};

// Generic weighted recalibration log-likelihood at (a, b).
double recal_loglik(double a, double b, std::span<const RecalPair> pairs);

/// Closed form of recal_loglik(0, b, pairs):
///   b sum w y log h + b sum w (1-y) log(1-h) - sum w log(h^b + (1-h)^b).
/// Throws DataError when a hazard is outside (0,1).
double reduced_loglik_a0(double b, std::span<const RecalPair> pairs);

struct RecalOptions {
    double score_tolerance = 1e-9;
    int max_iterations = 100;
    // |a| or |b| above this counts as divergence (separation).
    double divergence_bound = 1e3;
};

RecalibrationResult recalibrate_pairs(std::span<const RecalPair> pairs, const RecalOptions& opts = {});

// Expands the validation sample with the learning-sample censoring survival,
// predicts hazards with `model` and runs recalibrate_pairs.
RecalibrationResult recalibrate(const FittedModel& model, const Dataset& validation,
                                const CensoringSurvival& g_hat, const RecalOptions& opts = {});

std::vector<RecalPair> recal_pairs(const FittedModel& model, const Dataset& validation,
                                   const CensoringSurvival& g_hat);

std::string recalibration_to_json(const RecalibrationResult& r, std::string_view generator = {});
std::string recalibration_table(const RecalibrationResult& r);
void write_recalibration_csv(const RecalibrationResult& r, const std::filesystem::path& path,
                             std::string_view header_comment = {});

}  // namespace subcal
