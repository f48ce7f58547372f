#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "subcal/calibration.hpp"
#include "subcal/recalibration.hpp"
#include "subcal/simulation.hpp"

namespace subcal {

struct ReplicationResult {
    int replication = 0;
    bool ok = false;
    std::string error;

    std::vector<double> gamma_hat;
    RecalibrationResult recal;
    double calibration_mad = 0.0;  // weighted mean |observed - predicted| over groups
    int separated_times = 0;
    // Observed relative frequencies in the learning sample: censored, type 1, competing.
    std::array<double, 3> event_frequencies{};
    std::vector<CalibrationGroup> calibration;
};

struct FiveNumber {
    double min, q1, median, q3, max;
};

struct ScenarioSummary {
    ScenarioConfig config;
    CutPoints cutpoints;
    std::vector<ReplicationResult> replications;  // sorted by replication index

    int n_ok = 0;
    int n_failed = 0;
    std::vector<double> mean_gamma_hat;
    double mean_a = 0.0, mean_b = 0.0;
    double var_a = 0.0, var_b = 0.0;
    FiveNumber a_box{}, b_box{};
    // -log10 p quantiles for tests (i), (ii), (iii).
    std::array<FiveNumber, 3> neglog10p_box{};
    std::array<double, 3> rejection_rate{};  // at 5%
    double mean_calibration_mad = 0.0;
    std::array<double, 3> mean_event_frequencies{};
};

struct BenchOptions {
    int threads = 1;
    int n_groups = kDefaultGroups;
    Link link = Link::Cloglog;
    double alpha = 0.05;
    // Keep per-group calibration points for every replication.
    bool keep_calibration = true;
    std::optional<CutPoints> cutpoints;  // skip the pre-sample when given
};

ReplicationResult run_replication(const ScenarioConfig& config, const CutPoints& cutpoints,
                                  int replication, const BenchOptions& opts = {});

// Runs config.n_replications replications; failures are recorded, not thrown.
ScenarioSummary run_scenario(const ScenarioConfig& config, const BenchOptions& opts = {});

FiveNumber five_number(std::vector<double> values);

// Writes replications.csv, summary.csv, boxplot.csv and, from the first
// successful replication, calibration.csv / calibration.svg. Throws on empty results.
void summarize(const ScenarioSummary& summary, const std::filesystem::path& dir,
               std::string_view header_comment = {});

std::string summary_table(const ScenarioSummary& summary);

}  // namespace subcal
