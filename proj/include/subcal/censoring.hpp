#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "subcal/data_model.hpp"

namespace subcal {

/// Step function G(t) = P(C > t) on t = 0..k-1 with G(0) = 1, estimated by
/// the reverse Kaplan-Meier product limit. Risk set at t is {T >= t}; type-1
/// and competing events observed at t stay in it.
class CensoringSurvival {
public:
    CensoringSurvival() = default;
    CensoringSurvival(std::vector<double> values, std::vector<long> n_at_risk,
                      std::vector<long> n_censor_events);

    // G(t); t beyond the estimated range returns the last value, t <= 0 returns 1.
    double operator()(int t) const;

    int max_time() const { return static_cast<int>(values_.size()) - 1; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<long>& n_at_risk() const { return n_at_risk_; }
    const std::vector<long>& n_censor_events() const { return n_censor_events_; }

private:
    std::vector<double> values_{1.0};
    std::vector<long> n_at_risk_{0};
    std::vector<long> n_censor_events_{0};
};

CensoringSurvival fit_reverse_km(const Dataset& learning);

// Diagnostic dump: `t,G_hat,n_risk,n_censored`.
void write_censoring_csv(const CensoringSurvival& g, const std::filesystem::path& path,
                         std::string_view header_comment = {});

}  // namespace subcal
