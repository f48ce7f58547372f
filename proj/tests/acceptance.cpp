// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "subcal/benchmark.hpp"
#include "subcal/calibration.hpp"
#include "subcal/censoring.hpp"
#include "subcal/recalibration.hpp"
#include "subcal/shm_glm.hpp"
#include "subcal/simulation.hpp"

using namespace subcal;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

void info(const std::string& detail) {
    std::printf("[INFO] %s\n", detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int thread_count() { return std::max(1u, std::thread::hardware_concurrency()); }

// ---------------------------------------------------------------------------

void criterion1() {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t n = 1 + rng() % 200;
        std::vector<RecalPair> pairs;
        for (std::size_t i = 0; i < n; ++i)
            pairs.push_back({u(rng) < 0.3 ? 1 : 0, 0.05 + u(rng), 0.001 + 0.998 * u(rng)});
        const double b = -2.0 + 6.0 * u(rng);
        const double closed = reduced_loglik_a0(b, pairs);
        const double generic = recal_loglik(0.0, b, pairs);
        worst = std::max(worst, std::abs(closed - generic) / std::abs(generic));
    }
    report(1, worst <= 1e-10, fmt("closed-form a=0 log-likelihood, max relative error %.3g over 1000 instances (tol 1e-10)", worst));
}

struct Rows {
    std::vector<std::vector<double>> x;
    std::vector<LongRecord> rows;
};

Rows random_rows(std::mt19937_64& rng, int k, std::size_t p, int n, Link link, const std::vector<double>& theta) {
    std::normal_distribution<double> norm;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Rows s;
    s.x.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int t = 1 + i % (k - 1);
        double eta = theta[static_cast<std::size_t>(t - 1)];
        for (std::size_t j = 0; j < p; ++j) {
            s.x[i].push_back(norm(rng));
            eta += theta[k - 1 + j] * s.x[i][j];
        }
        s.rows.push_back({static_cast<std::size_t>(i), t, u(rng) < link_fn::response(link, eta) ? 1 : 0,
                          0.2 + 0.8 * u(rng), {}});
    }
    for (int i = 0; i < n; ++i) s.rows[i].covariates = s.x[i];
    return s;
}

// Coarse-to-fine lattice search; concavity makes each refinement keep the global maximum.
std::vector<double> grid_argmax(const Rows& s, int k, std::size_t p, Link link, std::size_t dim) {
    std::vector<double> centre(dim, 0.0);
    const int half_width[] = {12, 6, 6, 12};
    const double steps[] = {0.25, 0.05, 0.01, 0.001};
    for (int level = 0; level < 4; ++level) {
        const int m = half_width[level];
        const int side = 2 * m + 1;
        long total = 1;
        for (std::size_t d = 0; d < dim; ++d) total *= side;
        double best = -INFINITY;
        std::vector<double> best_theta = centre, theta(dim);
        for (long idx = 0; idx < total; ++idx) {
            long rest = idx;
            for (std::size_t d = 0; d < dim; ++d) {
                theta[d] = centre[d] + steps[level] * static_cast<double>(rest % side - m);
                rest /= side;
            }
            const double ll = evaluate_likelihood(s.rows, k, p, link, theta, false).loglik;
            if (ll > best) {
                best = ll;
                best_theta = theta;
            }
        }
        centre = best_theta;
    }
    return centre;
}

void criterion2() {
    std::mt19937_64 rng(202);
    std::normal_distribution<double> norm(0.0, 0.5);
    double worst = 0.0;
    int fit_failures = 0;
    for (int inst = 0; inst < 50; ++inst) {
        const Link link = inst % 2 ? Link::Logit : Link::Cloglog;
        const int k = 2 + inst % 2;        // 1 or 2 baseline parameters
        const std::size_t p = 1 + (inst / 2) % 2 * (k == 2 ? 1 : 0);  // total <= 3
        const std::size_t dim = static_cast<std::size_t>(k - 1) + p;
        std::vector<double> truth(dim);
        for (std::size_t j = 0; j < dim; ++j) truth[j] = (j < static_cast<std::size_t>(k - 1) ? -0.7 : 0.0) + norm(rng);
        const auto s = random_rows(rng, k, p, 300, link, truth);
        FittedModel m;
        try {
            m = fit(s.rows, k, p, link);
        } catch (const std::exception& e) {
            info(fmt("criterion 2 instance %d: %s", inst, e.what()));
            ++fit_failures;
            continue;
        }
        auto theta = m.baseline;
        theta.insert(theta.end(), m.coefficients.begin(), m.coefficients.end());
        const auto grid = grid_argmax(s, k, p, link, dim);
        for (std::size_t j = 0; j < dim; ++j) worst = std::max(worst, std::abs(grid[j] - theta[j]));
    }
    report(2, worst <= 2e-3 && fit_failures == 0,
           fmt("Newton vs grid search (resolution 1e-3), max coordinate gap %.2e over 50 instances, %d fit failures (tol 2e-3)",
               worst, fit_failures));
}

void criterion3() {
    std::mt19937_64 rng(303);
    std::normal_distribution<double> norm(0.0, 0.7);
    double worst = 0.0;
    for (Link link : {Link::Cloglog, Link::Logit}) {
        for (int point = 0; point < 20; ++point) {
            const int k = 3 + point % 5;
            const std::size_t p = 1 + point % 4;
            std::vector<double> truth(static_cast<std::size_t>(k - 1) + p);
            for (auto& v : truth) v = norm(rng) - 0.5;
            const auto s = random_rows(rng, k, p, 500, link, truth);
            std::vector<double> theta(truth.size());
            for (auto& v : theta) v = norm(rng) - 0.5;
            const auto e = evaluate_likelihood(s.rows, k, p, link, theta, false);
            const double h = 1e-5;
            for (std::size_t j = 0; j < theta.size(); ++j) {
                auto up = theta, dn = theta;
                up[j] += h;
                dn[j] -= h;
                const double fd = (evaluate_likelihood(s.rows, k, p, link, up, false).loglik -
                                   evaluate_likelihood(s.rows, k, p, link, dn, false).loglik) / (2 * h);
                worst = std::max(worst, std::abs(e.score[j] - fd) / std::max(1.0, std::abs(e.score[j])));
            }
        }
    }
    report(3, worst <= 1e-6, fmt("score vs central differences, max relative error %.2e at 20 points per link (tol 1e-6)", worst));
}

// ---------------------------------------------------------------------------

struct ScenarioRun {
    ScenarioConfig config;
    ScenarioSummary summary;
    std::array<double, 3> oracle_rejection{};
    double oracle_mad20 = 0.0;
};

ScenarioConfig scenario(double q, double b, int k, std::uint64_t seed) {
    ScenarioConfig c;
    c.q = q;
    c.censor_b = b;
    c.k = k;
    c.n_replications = 100;
    c.seed = seed;
    return c;
}

std::string label(const ScenarioConfig& c) {
    const char* cens = c.censor_b == kCensorWeak ? "weak" : c.censor_b == kCensorMedium ? "medium" : "strong";
    return fmt("q=%.1f %s k=%d seed=%llu", c.q, cens, c.k, static_cast<unsigned long long>(c.seed));
}

// Same data as the benchmark replications, scored with the true model.
void oracle_reference(ScenarioRun& run) {
    const auto& cp = run.summary.cutpoints;
    const auto truth = oracle_model(run.config, cp);
    std::array<int, 3> rejected{};
    double mad = 0.0;
    int n_mad = 0;
    for (int r = 0; r < run.config.n_replications; ++r) {
        auto rng = make_stream(run.config.seed, replication_stream(r));
        const auto data = generate_dataset(run.config, cp, rng);
        const auto g = fit_reverse_km(data.learning);
        const auto rec = recalibrate(truth, data.validation, g);
        rejected[0] += rec.p_overall < 0.05;
        rejected[1] += rec.p_intercept < 0.05;
        rejected[2] += rec.p_slope < 0.05;
        if (r < 20) {
            mad += mean_abs_deviation(calibration_points(truth, data.validation, g));
            ++n_mad;
        }
    }
    for (int i = 0; i < 3; ++i) run.oracle_rejection[i] = rejected[i] / double(run.config.n_replications);
    run.oracle_mad20 = mad / n_mad;
}

double mean_mad_first(const ScenarioSummary& s, int n) {
    double sum = 0.0;
    int count = 0;
    for (const auto& r : s.replications) {
        if (r.replication >= n) break;
        if (!r.ok) continue;
        sum += r.calibration_mad;
        ++count;
    }
    return count ? sum / count : NAN;
}

}  // namespace

int main() {
    std::printf("acceptance suite (threads=%d)\n", thread_count());
    criterion1();
    criterion2();
    criterion3();

    BenchOptions opts;
    opts.threads = thread_count();
    opts.keep_calibration = false;

    // k = 5 grid; seeds fixed as 1000 + scenario index.
    std::vector<ScenarioRun> runs;
    std::uint64_t index = 0;
    for (double q : {0.2, 0.4, 0.8})
        for (double b : {kCensorWeak, kCensorMedium, kCensorStrong}) {
            ScenarioRun run;
            run.config = scenario(q, b, 5, 1000 + index++);
            run.summary = run_scenario(run.config, opts);
            oracle_reference(run);
            runs.push_back(std::move(run));
        }

    // Criterion 4: q = 0.4, medium censoring.
    {
        const auto& s = runs[4].summary;
        const std::vector<double> truth{0.4, -0.4, 0.2, -0.2};
        double worst = 0.0;
        for (std::size_t j = 0; j < 4; ++j) worst = std::max(worst, std::abs(s.mean_gamma_hat[j] - truth[j]));
        report(4, s.n_ok > 0 && worst <= 0.05,
               fmt("%s: mean gamma_hat (%.4f, %.4f, %.4f, %.4f) from %d fits, max deviation %.4f (tol 0.05)",
                   label(runs[4].config).c_str(), s.mean_gamma_hat[0], s.mean_gamma_hat[1], s.mean_gamma_hat[2],
                   s.mean_gamma_hat[3], s.n_ok, worst));
    }

    // Criterion 5: replications 0..19 of each k = 5 scenario.
    {
        bool pass = true;
        for (const auto& run : runs) {
            const double mad = mean_mad_first(run.summary, 20);
            pass &= mad <= 0.01;
            info(fmt("criterion 5 %s: mean weighted |obs - pred| = %.4f (true model on the same data: %.4f)",
                     label(run.config).c_str(), mad, run.oracle_mad20));
        }
        report(5, pass, "calibration-plot deviation <= 0.01 averaged over 20 replications in every k=5 scenario");
    }

    // Criterion 6.
    {
        bool pass = true;
        for (const auto& run : runs) {
            const auto& s = run.summary;
            const bool ok = s.mean_a >= -0.1 && s.mean_a <= 0.1 && s.mean_b >= 0.9 && s.mean_b <= 1.1 &&
                            s.rejection_rate[0] <= 0.12 && s.rejection_rate[1] <= 0.12 && s.rejection_rate[2] <= 0.12;
            pass &= ok;
            info(fmt("criterion 6 %s: %s n_ok=%d mean a=%.3f mean b=%.3f rejection (i)=%.2f (ii)=%.2f (iii)=%.2f; "
                     "true model (i)=%.2f (ii)=%.2f (iii)=%.2f",
                     label(run.config).c_str(), ok ? "ok" : "out", s.n_ok, s.mean_a, s.mean_b, s.rejection_rate[0],
                     s.rejection_rate[1], s.rejection_rate[2], run.oracle_rejection[0], run.oracle_rejection[1],
                     run.oracle_rejection[2]));
        }
        report(6, pass, "mean a in [-0.1,0.1], mean b in [0.9,1.1], rejection rates <= 0.12 in every k=5 scenario");
    }

    // Criterion 7.
    {
        ScenarioRun run;
        run.config = scenario(0.2, kCensorStrong, 15, 2000);
        run.summary = run_scenario(run.config, opts);
        const auto& s = run.summary;
        int separated = 0;
        for (const auto& r : s.replications) separated += r.ok && r.separated_times > 0;
        const bool pass = s.rejection_rate[0] >= 0.25 && s.rejection_rate[0] <= 0.75 &&
                          s.rejection_rate[2] >= 0.25 && s.rejection_rate[2] <= 0.75;
        report(7, pass,
               fmt("%s: rejection (i)=%.2f (iii)=%.2f [(ii)=%.2f], n_ok=%d, %d fits with separated times (band [0.25,0.75])",
                   label(run.config).c_str(), s.rejection_rate[0], s.rejection_rate[2], s.rejection_rate[1], s.n_ok,
                   separated));
    }

    info("criterion 8: single-replication reference estimates are not reproducible (unknown seeds, private data); "
         "covered by the distributional checks of criteria 5-7");
    {
        const auto& first = runs[4].summary.replications.front();
        if (first.ok)
            info(fmt("criterion 8 example, replication 0 of %s: a=%.3f b=%.3f", label(runs[4].config).c_str(),
                     first.recal.a_hat, first.recal.b_hat));
    }

    // Criterion 9: no competing events; independent single-event calibration.
    {
        bool identical = true;
        std::size_t compared = 0;
        for (int d = 0; d < 10; ++d) {
            ScenarioConfig c = scenario(0.4, kCensorMedium, 4 + d % 4, 3000 + d);
            c.q = 0.999999;  // essentially every subject has a type-1 event eventually
            c.quantile_presample = 200'000;
            c.n_learn = c.n_valid = 1500;
            const auto cp = estimate_cutpoints(c);
            auto rng = make_stream(c.seed, replication_stream(0));
            auto data = generate_dataset(c, cp, rng);
            for (auto* ds : {&data.learning, &data.validation})
                for (auto& s : ds->subjects)
                    if (s.is_competing_event()) s.event_type = 1;  // collapse to a single event type

            const auto model = fit_dataset(data.learning, Link::Cloglog);
            const auto groups = calibration_points(model, data.validation, *model.censoring, 20);

            // Single-event version: rows 1..T, y = 1 at an observed event, unit weights.
            struct Pair {
                double hazard;
                std::size_t subject;
                int time;
                int y;
            };
            std::vector<Pair> pairs;
            const int k = data.validation.k;
            for (std::size_t i = 0; i < data.validation.subjects.size(); ++i) {
                const auto& s = data.validation.subjects[i];
                const int last = std::min(s.observed_time, k - 1);
                for (int t = 1; t <= last; ++t) {
                    double eta = model.baseline[static_cast<std::size_t>(t - 1)];
                    for (std::size_t j = 0; j < s.covariates.size(); ++j) eta += s.covariates[j] * model.coefficients[j];
                    const double hazard = -std::expm1(-std::exp(eta));
                    pairs.push_back({hazard, i, t, (s.status == 1 && t == s.observed_time) ? 1 : 0});
                }
            }
            std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
                return a.hazard != b.hazard ? a.hazard < b.hazard
                                            : a.subject != b.subject ? a.subject < b.subject : a.time < b.time;
            });
            const std::size_t n = pairs.size();
            for (std::size_t g = 0; g < 20; ++g) {
                const std::size_t lo = g * n / 20, hi = (g + 1) * n / 20;
                double sum_h = 0.0, sum_y = 0.0, count = 0.0;
                for (std::size_t i = lo; i < hi; ++i) {
                    sum_h += pairs[i].hazard;
                    sum_y += pairs[i].y;
                    count += 1.0;
                }
                identical &= groups[g].mean_predicted == sum_h / count && groups[g].mean_observed == sum_y / count &&
                             groups[g].pair_count == hi - lo;
                ++compared;
            }
        }
        report(9, identical, fmt("single-event reduction: %zu calibration points from 10 datasets compared bit-for-bit", compared));
    }

    std::printf("%d criterion/criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
