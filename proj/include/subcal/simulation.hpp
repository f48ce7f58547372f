#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "subcal/data_model.hpp"
#include "subcal/shm_glm.hpp"

namespace subcal {

using Rng = std::mt19937_64;

// Indirect simulation of two competing events. Type-1 cumulative incidence
//   F1(t | x) = 1 - (1 - q + q exp(-t))^exp(x'gamma),
// competing-event times exponential with rate exp(x'beta), discrete censoring
//   P(C = t) = censor_b^(k-t+1) / sum_s censor_b^s.
struct ScenarioConfig {
    double q = 0.4;
    double censor_b = 1.0;
    int k = 5;
    int n_learn = 2500;
    int n_valid = 2500;
    std::vector<double> gamma{0.4, -0.4, 0.2, -0.2};
    std::vector<double> beta{-0.4, 0.4, -0.2, 0.2};
    int n_replications = 100;
    std::uint64_t seed = 0;
    int quantile_presample = 1'000'000;

    std::string name;

    // Throws DataError.
    void validate() const;
};

inline constexpr double kCensorWeak = 0.85;
inline constexpr double kCensorMedium = 1.0;
inline constexpr double kCensorStrong = 1.25;

// Key-value text: one `key = value` per line, '#' comments; vectors are
// comma-separated. `censoring` accepts weak/medium/strong as a shorthand for censor_b.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);
std::string scenario_to_text(const ScenarioConfig& config);

// Interval boundaries a_1 < ... < a_{k-1}; discrete time t covers [a_{t-1}, a_t).
struct CutPoints {
    std::vector<double> boundaries;

    int discretize(double continuous_time) const;
};

struct SubjectDraw {
    double continuous_time;
    int event_type;
    std::vector<double> covariates;
};

// Independent RNG streams derived from (seed, stream id).
Rng make_stream(std::uint64_t seed, std::uint64_t stream);
inline constexpr std::uint64_t kCutpointStream = 0xC07u;
inline std::uint64_t replication_stream(int replication) { return 1000u + static_cast<std::uint64_t>(replication); }

double type1_probability(double q, double linear_predictor);
// Inverse of the conditional type-1 time distribution F1(t|x)/pi1 at u in [0,1).
double invert_type1_time(double q, double linear_predictor, double u);

std::vector<double> draw_covariates(Rng& rng);
SubjectDraw draw_subject(const ScenarioConfig& config, Rng& rng);

std::vector<double> censoring_pmf(double censor_b, int k);
int draw_censoring(const ScenarioConfig& config, Rng& rng);

CutPoints estimate_cutpoints(const ScenarioConfig& config, Rng& rng);
CutPoints estimate_cutpoints(const ScenarioConfig& config);  // uses the dedicated cut-point stream

struct SimulatedData {
    Dataset learning;
    Dataset validation;
};

SimulatedData generate_dataset(const ScenarioConfig& config, const CutPoints& cutpoints, Rng& rng);

/// The data-generating model in discrete time: Gompertz link with
/// baseline[t-1] = log(-log(S0(a_t) / S0(a_{t-1}))), S0(a) = 1 - q + q exp(-a),
/// and coefficients gamma.
FittedModel oracle_model(const ScenarioConfig& config, const CutPoints& cutpoints);

}  // namespace subcal
