#pragma once

#include <cstddef>
#include <filesystem>
#include <string_view>
#include <vector>

#include "subcal/censoring.hpp"
#include "subcal/data_model.hpp"
#include "subcal/shm_glm.hpp"

namespace subcal {

struct CalibrationGroup {
    int group_index = 0;         // 1-based
    double mean_predicted = 0.0;  // weighted mean of predicted hazards
    double mean_observed = 0.0;   // weighted mean of binary outcomes
    double weight_sum = 0.0;
    std::size_t pair_count = 0;
};

// A retained (subject, time) pair with its predicted hazard.
struct ScoredPair {
    std::size_t subject_index;
    int time;
    double hazard;
    int y;
    double w;
};

inline constexpr int kDefaultGroups = 20;

// Predicted hazards for every row of the long format, in row order.
std::vector<ScoredPair> score_pairs(const FittedModel& model, const Dataset& data,
                                    const std::vector<LongRecord>& rows);

/// Sorts pairs by (hazard, subject, time), cuts them into n_groups percentile
/// groups whose sizes differ by at most one, and returns weighted group means.
std::vector<CalibrationGroup> group_pairs(std::vector<ScoredPair> pairs, int n_groups);

/// Full calibration-plot procedure on a validation sample. Weights use the
/// censoring survival estimated on the learning sample.
std::vector<CalibrationGroup> calibration_points(const FittedModel& model, const Dataset& validation,
                                                 const CensoringSurvival& g_hat,
                                                 int n_groups = kDefaultGroups);

// Weight-sum weighted mean of |observed - predicted| across groups.
double mean_abs_deviation(const std::vector<CalibrationGroup>& groups);
double max_abs_deviation(const std::vector<CalibrationGroup>& groups);

// CSV `g,mean_predicted,mean_observed,weight_sum,pair_count` with a footer
// comment carrying the deviations.
void write_calibration_csv(const std::vector<CalibrationGroup>& groups,
                           const std::filesystem::path& path, std::string_view header_comment = {});
std::string calibration_svg(const std::vector<CalibrationGroup>& groups, std::string_view title = {},
                            std::string_view header_comment = {});

// Writes <dir>/points.csv and <dir>/plot.svg.
void emit_plot(const std::vector<CalibrationGroup>& groups, const std::filesystem::path& dir,
               std::string_view header_comment = {});

}  // namespace subcal
