#include "subcal/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "subcal/censoring.hpp"
#include "subcal/csv.hpp"
#include "subcal/error.hpp"

namespace subcal {
namespace {

double mean_of(const std::vector<double>& v) {
    return v.empty() ? std::nan("") : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v) {
    if (v.size() < 2) return std::nan("");
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double neglog10(double p) { return -std::log10(std::max(p, 1e-300)); }

}  // namespace

FiveNumber five_number(std::vector<double> values) {
    std::erase_if(values, [](double v) { return !std::isfinite(v); });
    if (values.empty()) {
        const double nan = std::nan("");
        return {nan, nan, nan, nan, nan};
    }
    std::sort(values.begin(), values.end());
    const auto quant = [&](double p) {
        const double h = static_cast<double>(values.size() - 1) * p;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };
    return {values.front(), quant(0.25), quant(0.5), quant(0.75), values.back()};
}

ReplicationResult run_replication(const ScenarioConfig& config, const CutPoints& cutpoints, int replication,
                                  const BenchOptions& opts) {
    ReplicationResult res;
    res.replication = replication;
    auto rng = make_stream(config.seed, replication_stream(replication));
    const auto data = generate_dataset(config, cutpoints, rng);

    std::array<double, 3> freq{};
    for (const auto& s : data.learning.subjects) {
        freq[s.status == 0 ? 0 : (s.event_type == 1 ? 1 : 2)] += 1.0;
    }
    for (auto& f : freq) f /= static_cast<double>(data.learning.size());
    res.event_frequencies = freq;

    try {
        FitOptions fopts;
        // Diverging baselines at times without type-1 events are kept, as a
        // standard GLM routine would return them.
        fopts.separation = SeparationPolicy::Keep;
        const auto model = fit_dataset(data.learning, opts.link, fopts);
        res.gamma_hat = model.coefficients;
        res.separated_times = static_cast<int>(model.separated_times.size());

        const auto rows = expand_long(data.validation, &*model.censoring);
        const auto scored = score_pairs(model, data.validation, rows);
        auto groups = group_pairs(scored, opts.n_groups);
        res.calibration_mad = mean_abs_deviation(groups);
        if (opts.keep_calibration) res.calibration = std::move(groups);

        std::vector<RecalPair> pairs;
        pairs.reserve(scored.size());
        for (const auto& s : scored) {
            if (!(s.hazard > 0.0 && s.hazard < 1.0)) throw InvalidLogitError(s.subject_index, s.time, s.hazard);
            pairs.push_back({s.y, s.w, s.hazard});
        }
        res.recal = recalibrate_pairs(pairs);
        res.ok = true;
    } catch (const Error& e) {
        res.ok = false;
        res.error = e.what();
    }
    return res;
}

ScenarioSummary run_scenario(const ScenarioConfig& config, const BenchOptions& opts) {
    config.validate();
    ScenarioSummary summary;
    summary.config = config;
    summary.cutpoints = opts.cutpoints ? *opts.cutpoints : estimate_cutpoints(config);

    const int reps = config.n_replications;
    summary.replications.resize(static_cast<std::size_t>(reps));
    std::atomic<int> next{0};
    const auto worker = [&] {
        for (int r = next++; r < reps; r = next++) {
            summary.replications[static_cast<std::size_t>(r)] =
                run_replication(config, summary.cutpoints, r, opts);
        }
    };
    const int n_threads = std::clamp(opts.threads, 1, reps);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    }

    std::vector<double> a, b, cal;
    std::array<std::vector<double>, 3> nlp;
    std::array<int, 3> rejected{}, tested{};
    const std::size_t p = config.gamma.size();
    std::vector<double> gamma_sum(p, 0.0);
    std::array<double, 3> freq_sum{};
    for (const auto& r : summary.replications) {
        for (int j = 0; j < 3; ++j) freq_sum[static_cast<std::size_t>(j)] += r.event_frequencies[static_cast<std::size_t>(j)];
        if (!r.ok) {
            ++summary.n_failed;
            continue;
        }
        ++summary.n_ok;
        a.push_back(r.recal.a_hat);
        b.push_back(r.recal.b_hat);
        cal.push_back(r.calibration_mad);
        for (std::size_t j = 0; j < p; ++j) gamma_sum[j] += r.gamma_hat[j];
        const std::array<double, 3> pv{r.recal.p_overall, r.recal.p_intercept, r.recal.p_slope};
        for (std::size_t j = 0; j < 3; ++j) {
            if (!std::isfinite(pv[j])) continue;
            ++tested[j];
            if (pv[j] < opts.alpha) ++rejected[j];
            nlp[j].push_back(neglog10(pv[j]));
        }
    }
    summary.mean_gamma_hat.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        summary.mean_gamma_hat[j] = summary.n_ok > 0 ? gamma_sum[j] / summary.n_ok : std::nan("");
    }
    summary.mean_a = mean_of(a);
    summary.mean_b = mean_of(b);
    summary.var_a = variance_of(a);
    summary.var_b = variance_of(b);
    summary.a_box = five_number(a);
    summary.b_box = five_number(b);
    for (std::size_t j = 0; j < 3; ++j) {
        summary.neglog10p_box[j] = five_number(nlp[j]);
        summary.rejection_rate[j] = tested[j] > 0 ? static_cast<double>(rejected[j]) / tested[j] : std::nan("");
        summary.mean_event_frequencies[j] = freq_sum[j] / reps;
    }
    summary.mean_calibration_mad = mean_of(cal);
    return summary;
}

void summarize(const ScenarioSummary& summary, const std::filesystem::path& dir, std::string_view header_comment) {
    if (summary.replications.empty()) throw DataError("no replication results to summarize");
    const auto fmt = csv::format_double;

    {
        auto out = csv::open_output(dir / "replications.csv", header_comment);
        out << "replication,ok,a_hat,b_hat,p_overall,p_intercept,p_slope,lr_overall,lr_intercept,lr_slope,"
               "calibration_mad,separated_times,freq_censored,freq_type1,freq_type2";
        for (std::size_t j = 0; j < summary.config.gamma.size(); ++j) out << ",gamma_hat_" << j + 1;
        out << ",error\n";
        for (const auto& r : summary.replications) {
            out << r.replication << ',' << (r.ok ? 1 : 0);
            if (r.ok) {
                out << ',' << fmt(r.recal.a_hat) << ',' << fmt(r.recal.b_hat) << ',' << fmt(r.recal.p_overall) << ','
                    << fmt(r.recal.p_intercept) << ',' << fmt(r.recal.p_slope) << ',' << fmt(r.recal.lr_overall) << ','
                    << fmt(r.recal.lr_intercept) << ',' << fmt(r.recal.lr_slope) << ',' << fmt(r.calibration_mad)
                    << ',' << r.separated_times;
            } else {
                out << ",,,,,,,,,,";
            }
            for (double f : r.event_frequencies) out << ',' << fmt(f);
            for (std::size_t j = 0; j < summary.config.gamma.size(); ++j) {
                out << ',' << (r.ok ? fmt(r.gamma_hat[j]) : std::string());
            }
            std::string err = r.error;
            std::replace(err.begin(), err.end(), ',', ';');
            out << ',' << err << '\n';
        }
        if (!out) throw IoError("write failed in '" + dir.string() + "'");
    }
    {
        auto out = csv::open_output(dir / "summary.csv", header_comment);
        out << "statistic,value\n";
        out << "q," << fmt(summary.config.q) << "\ncensor_b," << fmt(summary.config.censor_b) << "\nk,"
            << summary.config.k << "\nreplications," << summary.replications.size() << "\nok," << summary.n_ok
            << "\nfailed," << summary.n_failed << "\nmean_a," << fmt(summary.mean_a) << "\nmean_b,"
            << fmt(summary.mean_b) << "\nvar_a," << fmt(summary.var_a) << "\nvar_b," << fmt(summary.var_b)
            << "\nrejection_overall," << fmt(summary.rejection_rate[0]) << "\nrejection_intercept,"
            << fmt(summary.rejection_rate[1]) << "\nrejection_slope," << fmt(summary.rejection_rate[2])
            << "\nmean_calibration_mad," << fmt(summary.mean_calibration_mad) << "\nfreq_censored,"
            << fmt(summary.mean_event_frequencies[0]) << "\nfreq_type1," << fmt(summary.mean_event_frequencies[1])
            << "\nfreq_type2," << fmt(summary.mean_event_frequencies[2]) << '\n';
        for (std::size_t j = 0; j < summary.mean_gamma_hat.size(); ++j) {
            out << "mean_gamma_hat_" << j + 1 << ',' << fmt(summary.mean_gamma_hat[j]) << '\n';
        }
        for (std::size_t j = 0; j < summary.cutpoints.boundaries.size(); ++j) {
            out << "cutpoint_" << j + 1 << ',' << fmt(summary.cutpoints.boundaries[j]) << '\n';
        }
        if (!out) throw IoError("write failed in '" + dir.string() + "'");
    }
    {
        auto out = csv::open_output(dir / "boxplot.csv", header_comment);
        out << "quantity,min,q1,median,q3,max\n";
        const auto row = [&](const char* name, const FiveNumber& f) {
            out << name << ',' << fmt(f.min) << ',' << fmt(f.q1) << ',' << fmt(f.median) << ',' << fmt(f.q3) << ','
                << fmt(f.max) << '\n';
        };
        row("a_hat", summary.a_box);
        row("b_hat", summary.b_box);
        row("neglog10_p_overall", summary.neglog10p_box[0]);
        row("neglog10_p_intercept", summary.neglog10p_box[1]);
        row("neglog10_p_slope", summary.neglog10p_box[2]);
        if (!out) throw IoError("write failed in '" + dir.string() + "'");
    }
    const auto first_ok = std::find_if(summary.replications.begin(), summary.replications.end(),
                                       [](const ReplicationResult& r) { return r.ok && !r.calibration.empty(); });
    if (first_ok != summary.replications.end()) {
        write_calibration_csv(first_ok->calibration, dir / "calibration.csv", header_comment);
        auto out = csv::open_output(dir / "calibration.svg", {});
        std::ostringstream title;
        title << "replication " << first_ok->replication << "  (q = " << summary.config.q
              << ", censor_b = " << summary.config.censor_b << ", k = " << summary.config.k << ")";
        out << calibration_svg(first_ok->calibration, title.str(), header_comment);
    }
}

std::string summary_table(const ScenarioSummary& s) {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof buf, "scenario q=%.2f censor_b=%.2f k=%d  replications=%zu ok=%d failed=%d\n",
                  s.config.q, s.config.censor_b, s.config.k, s.replications.size(), s.n_ok, s.n_failed);
    os << buf;
    std::snprintf(buf, sizeof buf, "  observed frequencies  censored %.3f  type1 %.3f  type2 %.3f\n",
                  s.mean_event_frequencies[0], s.mean_event_frequencies[1], s.mean_event_frequencies[2]);
    os << buf;
    os << "  mean gamma_hat      ";
    for (double g : s.mean_gamma_hat) {
        std::snprintf(buf, sizeof buf, " %8.4f", g);
        os << buf;
    }
    os << '\n';
    std::snprintf(buf, sizeof buf, "  a_hat  mean %8.4f  var %.4f  median %8.4f  IQR [%.4f, %.4f]\n", s.mean_a, s.var_a,
                  s.a_box.median, s.a_box.q1, s.a_box.q3);
    os << buf;
    std::snprintf(buf, sizeof buf, "  b_hat  mean %8.4f  var %.4f  median %8.4f  IQR [%.4f, %.4f]\n", s.mean_b, s.var_b,
                  s.b_box.median, s.b_box.q1, s.b_box.q3);
    os << buf;
    std::snprintf(buf, sizeof buf, "  rejection at 5%%: (i) %.3f  (ii) %.3f  (iii) %.3f\n", s.rejection_rate[0],
                  s.rejection_rate[1], s.rejection_rate[2]);
    os << buf;
    std::snprintf(buf, sizeof buf, "  calibration plot: mean weighted |obs - pred| = %.5f\n", s.mean_calibration_mad);
    os << buf;
    return os.str();
}

}  // namespace subcal
