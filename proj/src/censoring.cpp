#include "subcal/censoring.hpp"

#include <algorithm>
#include <utility>

#include "subcal/csv.hpp"
#include "subcal/error.hpp"

namespace subcal {

CensoringSurvival::CensoringSurvival(std::vector<double> values, std::vector<long> n_at_risk,
                                     std::vector<long> n_censor_events)
    : values_(std::move(values)),
      n_at_risk_(std::move(n_at_risk)),
      n_censor_events_(std::move(n_censor_events)) {
    if (values_.empty() || values_.front() != 1.0) {
        throw DataError("censoring survival must start with G(0) = 1");
    }
    for (std::size_t t = 1; t < values_.size(); ++t) {
        if (!(values_[t] >= 0.0 && values_[t] <= values_[t - 1])) {
            throw DataError("censoring survival must be non-increasing in [0,1]");
        }
    }
    n_at_risk_.resize(values_.size(), 0);
    n_censor_events_.resize(values_.size(), 0);
}

double CensoringSurvival::operator()(int t) const {
    if (t <= 0) return 1.0;
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(t), values_.size() - 1);
    return values_[idx];
}

CensoringSurvival fit_reverse_km(const Dataset& learning) {
    if (learning.empty()) throw DataError("cannot estimate censoring survival from an empty sample");
    const int last = learning.k - 1;

    // Counts indexed by observed time 1..k.
    std::vector<long> exits(static_cast<std::size_t>(learning.k) + 2, 0);
    std::vector<long> censored(static_cast<std::size_t>(learning.k) + 2, 0);
    for (const auto& s : learning.subjects) {
        ++exits[static_cast<std::size_t>(s.observed_time)];
        if (s.status == 0) ++censored[static_cast<std::size_t>(s.observed_time)];
    }

    std::vector<double> g(static_cast<std::size_t>(last) + 1, 1.0);
    std::vector<long> risk(g.size(), 0), dc(g.size(), 0);
    long at_risk = static_cast<long>(learning.size());
    risk[0] = at_risk;
    double surv = 1.0;
    for (int t = 1; t <= last; ++t) {
        const auto ut = static_cast<std::size_t>(t);
        risk[ut] = at_risk;
        dc[ut] = censored[ut];
        if (at_risk > 0) surv *= 1.0 - static_cast<double>(dc[ut]) / static_cast<double>(at_risk);
        g[ut] = surv;
        at_risk -= exits[ut];
    }
    return CensoringSurvival(std::move(g), std::move(risk), std::move(dc));
}

void write_censoring_csv(const CensoringSurvival& g, const std::filesystem::path& path,
                         std::string_view header_comment) {
    auto out = csv::open_output(path, header_comment);
    out << "t,G_hat,n_risk,n_censored\n";
    for (std::size_t t = 0; t < g.values().size(); ++t) {
        out << t << ',' << csv::format_double(g.values()[t]) << ',' << g.n_at_risk()[t] << ','
            << g.n_censor_events()[t] << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace subcal
