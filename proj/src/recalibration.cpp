#include "subcal/recalibration.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "subcal/chi_square.hpp"
#include "subcal/csv.hpp"
#include "subcal/error.hpp"

namespace subcal {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double log_expit(double eta) {
    return eta > 0.0 ? -std::log1p(std::exp(-eta)) : eta - std::log1p(std::exp(eta));
}

double expit(double eta) {
    return eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
}

void check_hazard(double h) {
    if (!(h > 0.0 && h < 1.0)) {
        std::ostringstream os;
        os << "predicted hazard " << h << " outside (0,1)";
        throw DataError(os.str());
    }
}

double logit(double h) { return std::log(h) - std::log1p(-h); }

// Value, gradient and negative Hessian of a concave objective in up to two parameters.
struct Local {
    double value;
    std::array<double, 2> grad;
    std::array<double, 4> info;  // -Hessian, row-major 2x2
};

struct Solution {
    std::array<double, 2> x;
    double value;
};

// Damped Newton for dim = 1 or 2; throws SeparationError on divergence.
template <class Eval>
Solution newton_maximize(Eval eval, std::array<double, 2> x, int dim, double grad_tol,
                         const RecalOptions& opts, const char* label) {
    Local cur = eval(x);
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        const double gmax = dim == 1 ? std::abs(cur.grad[0]) : std::max(std::abs(cur.grad[0]), std::abs(cur.grad[1]));
        if (gmax < grad_tol) return {x, cur.value};

        std::array<double, 2> step{0.0, 0.0};
        if (dim == 1) {
            step[0] = cur.info[0] > 0.0 ? cur.grad[0] / cur.info[0] : cur.grad[0];
        } else {
            const double det = cur.info[0] * cur.info[3] - cur.info[1] * cur.info[2];
            if (det > 0.0 && cur.info[0] > 0.0) {
                step[0] = (cur.info[3] * cur.grad[0] - cur.info[1] * cur.grad[1]) / det;
                step[1] = (-cur.info[2] * cur.grad[0] + cur.info[0] * cur.grad[1]) / det;
            } else {
                step = cur.grad;
            }
        }

        bool accepted = false;
        double scale = 1.0;
        for (int h = 0; h < 50; ++h, scale *= 0.5) {
            const std::array<double, 2> cand{x[0] + scale * step[0], x[1] + scale * step[1]};
            Local trial = eval(cand);
            const double slack = 1e-12 * (std::abs(cur.value) + 1.0);
            if (std::isfinite(trial.value) && trial.value >= cur.value - slack) {
                x = cand;
                cur = trial;
                accepted = true;
                break;
            }
        }
        if (std::abs(x[0]) > opts.divergence_bound || std::abs(x[1]) > opts.divergence_bound) {
            throw SeparationError(std::string("recalibration fit (") + label +
                                  ") diverged: the predicted logits separate the outcomes");
        }
        if (!accepted) {
            const double g = dim == 1 ? std::abs(cur.grad[0])
                                      : std::max(std::abs(cur.grad[0]), std::abs(cur.grad[1]));
            if (g < 1e3 * grad_tol) return {x, cur.value};
            break;
        }
    }
    throw SeparationError(std::string("recalibration fit (") + label +
                          ") did not converge; the outcomes are (quasi-)separated by the predicted logits");
}

struct Prepared {
    std::vector<double> z, w, log_h, log_1mh;
    std::vector<int> y;
    double weight_total = 0.0;
};

Prepared prepare(std::span<const RecalPair> pairs) {
    Prepared p;
    p.z.reserve(pairs.size());
    for (const auto& q : pairs) {
        check_hazard(q.hazard);
        p.log_h.push_back(std::log(q.hazard));
        p.log_1mh.push_back(std::log1p(-q.hazard));
        p.z.push_back(p.log_h.back() - p.log_1mh.back());
        p.w.push_back(q.w);
        p.y.push_back(q.y);
        p.weight_total += q.w;
    }
    return p;
}

// Logistic model logit(pi) = a + b z; `free_a`/`free_b` select the parameters.
Local logistic_local(const Prepared& p, double a, double b, bool free_a, bool free_b) {
    Local l{0.0, {0.0, 0.0}, {0.0, 0.0, 0.0, 0.0}};
    double gaa = 0, gab = 0, gbb = 0, ga = 0, gb = 0;
    for (std::size_t i = 0; i < p.z.size(); ++i) {
        const double eta = a + b * p.z[i];
        const double pi = expit(eta);
        l.value += p.w[i] * (p.y[i] == 1 ? log_expit(eta) : log_expit(-eta));
        const double r = p.w[i] * (p.y[i] - pi);
        const double v = p.w[i] * pi * (1.0 - pi);
        ga += r;
        gb += r * p.z[i];
        gaa += v;
        gab += v * p.z[i];
        gbb += v * p.z[i] * p.z[i];
    }
    if (free_a && free_b) {
        l.grad = {ga, gb};
        l.info = {gaa, gab, gab, gbb};
    } else if (free_a) {
        l.grad = {ga, 0.0};
        l.info = {gaa, 0.0, 0.0, 0.0};
    } else {
        l.grad = {gb, 0.0};
        l.info = {gbb, 0.0, 0.0, 0.0};
    }
    return l;
}

}  // namespace

double recal_loglik(double a, double b, std::span<const RecalPair> pairs) {
    double ll = 0.0;
    for (const auto& q : pairs) {
        check_hazard(q.hazard);
        const double eta = a + b * logit(q.hazard);
        ll += q.w * (q.y == 1 ? log_expit(eta) : log_expit(-eta));
    }
    return ll;
}

double reduced_loglik_a0(double b, std::span<const RecalPair> pairs) {
    double s_event = 0.0, s_nonevent = 0.0, s_norm = 0.0;
    for (const auto& q : pairs) {
        check_hazard(q.hazard);
        const double lh = std::log(q.hazard);
        const double l1mh = std::log1p(-q.hazard);
        s_event += q.w * q.y * lh;
        s_nonevent += q.w * (1 - q.y) * l1mh;
        // log(h^b + (1-h)^b) as a log-sum-exp.
        const double u = b * lh, v = b * l1mh;
        const double m = std::max(u, v);
        s_norm += q.w * (m + std::log1p(std::exp(std::min(u, v) - m)));
    }
    return b * s_event + b * s_nonevent - s_norm;
}

RecalibrationResult recalibrate_pairs(std::span<const RecalPair> pairs, const RecalOptions& opts) {
    const Prepared p = prepare(pairs);
    double w_event = 0.0, w_nonevent = 0.0;
    for (std::size_t i = 0; i < p.y.size(); ++i) (p.y[i] == 1 ? w_event : w_nonevent) += p.w[i];
    if (!(w_event > 0.0) || !(w_nonevent > 0.0)) {
        throw DataError("recalibration needs at least one event row and one non-event row");
    }

    RecalibrationResult r;
    r.n_pairs = pairs.size();
    const double tol = opts.score_tolerance * (1.0 + p.weight_total);

    r.loglik_null = recal_loglik(0.0, 1.0, pairs);

    // b = 1: single intercept with z as an offset.
    const auto b1 = newton_maximize(
        [&](std::array<double, 2> x) { return logistic_local(p, x[0], 1.0, true, false); }, {0.0, 0.0}, 1,
        tol, opts, "b = 1");
    r.a_given_b1 = b1.x[0];
    r.loglik_b1 = b1.value;

    // a = 0: Newton in b on the closed-form reduced likelihood.
    const auto [zmin, zmax] = std::minmax_element(p.z.begin(), p.z.end());
    const bool all_zero = *zmin == 0.0 && *zmax == 0.0;
    if (all_zero) {
        r.b_given_a0 = kNaN;
        r.loglik_a0 = r.loglik_null;
    } else {
        const auto a0 = newton_maximize(
            [&](std::array<double, 2> x) {
                Local l = logistic_local(p, 0.0, x[0], false, true);
                l.value = reduced_loglik_a0(x[0], pairs);
                return l;
            },
            {1.0, 0.0}, 1, tol, opts, "a = 0");
        r.b_given_a0 = a0.x[0];
        r.loglik_a0 = a0.value;
    }

    const double spread = *zmax - *zmin;
    r.slope_identifiable = spread > 1e-12 * (1.0 + std::max(std::abs(*zmin), std::abs(*zmax)));
    if (r.slope_identifiable) {
        const auto full = newton_maximize(
            [&](std::array<double, 2> x) { return logistic_local(p, x[0], x[1], true, true); },
            {r.a_given_b1, 1.0}, 2, tol, opts, "full");
        r.a_hat = full.x[0];
        r.b_hat = full.x[1];
        r.loglik_full = full.value;
    } else {
        r.a_hat = r.a_given_b1;
        r.b_hat = kNaN;
        r.loglik_full = r.loglik_b1;
    }
    r.b_given_a = r.b_hat;

    r.lr_overall = std::max(0.0, 2.0 * (r.loglik_full - r.loglik_null));
    r.lr_intercept = std::max(0.0, 2.0 * (r.loglik_b1 - r.loglik_null));
    r.lr_slope = std::max(0.0, 2.0 * (r.loglik_full - r.loglik_b1));
    r.p_overall = stats::chi_square_sf(r.lr_overall, 2.0);
    r.p_intercept = stats::chi_square_sf(r.lr_intercept, 1.0);
    r.p_slope = r.slope_identifiable ? stats::chi_square_sf(r.lr_slope, 1.0) : kNaN;
    return r;
}

std::vector<RecalPair> recal_pairs(const FittedModel& model, const Dataset& validation,
                                   const CensoringSurvival& g_hat) {
    const auto rows = expand_long(validation, &g_hat);
    const auto scored = score_pairs(model, validation, rows);
    std::vector<RecalPair> pairs;
    pairs.reserve(scored.size());
    for (const auto& s : scored) {
        if (!(s.hazard > 0.0 && s.hazard < 1.0)) throw InvalidLogitError(s.subject_index, s.time, s.hazard);
        pairs.push_back({s.y, s.w, s.hazard});
    }
    return pairs;
}

RecalibrationResult recalibrate(const FittedModel& model, const Dataset& validation,
                                const CensoringSurvival& g_hat, const RecalOptions& opts) {
    if (validation.empty()) throw DataError("validation sample is empty");
    return recalibrate_pairs(recal_pairs(model, validation, g_hat), opts);
}

namespace {

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

std::string recalibration_to_json(const RecalibrationResult& r, std::string_view generator) {
    nlohmann::json j;
    if (!generator.empty()) j["generator"] = std::string(generator);
    j["a_hat"] = num(r.a_hat);
    j["b_hat"] = num(r.b_hat);
    j["a_given_b1"] = num(r.a_given_b1);
    j["b_given_a0"] = num(r.b_given_a0);
    j["slope_identifiable"] = r.slope_identifiable;
    j["n_pairs"] = r.n_pairs;
    j["loglik"] = {{"full", num(r.loglik_full)},
                   {"b1", num(r.loglik_b1)},
                   {"a0", num(r.loglik_a0)},
                   {"null", num(r.loglik_null)}};
    j["tests"] = {
        {"overall", {{"hypothesis", "a=0,b=1"}, {"df", 2}, {"lr", num(r.lr_overall)}, {"p", num(r.p_overall)}}},
        {"intercept", {{"hypothesis", "a=0|b=1"}, {"df", 1}, {"lr", num(r.lr_intercept)}, {"p", num(r.p_intercept)}}},
        {"slope", {{"hypothesis", "b=1|a"}, {"df", 1}, {"lr", num(r.lr_slope)}, {"p", num(r.p_slope)}}},
    };
    return j.dump(2) + "\n";
}

std::string recalibration_table(const RecalibrationResult& r) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    os << "recalibration model  logit(pi) = a + b * logit(hazard)   (" << r.n_pairs << " pairs)\n";
    os << "  a_hat (calibration-in-the-large)  " << r.a_hat << '\n';
    os << "  b_hat (refinement)                " << r.b_hat
       << (r.slope_identifiable ? "" : "   [not identifiable: constant predictions]") << '\n';
    os << "  a | b=1                           " << r.a_given_b1 << '\n';
    os << "  b | a=0                           " << r.b_given_a0 << '\n';
    os << "log-likelihoods  full " << r.loglik_full << "  b=1 " << r.loglik_b1 << "  a=0 " << r.loglik_a0
       << "  null " << r.loglik_null << '\n';
    os << "test                          df        LR   p-value\n";
    const auto line = [&](const char* name, int df, double lr, double p) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-28s %3d %9.4f %9.4f\n", name, df, lr, p);
        os << buf;
    };
    line("(i)   a=0, b=1 (overall)", 2, r.lr_overall, r.p_overall);
    line("(ii)  a=0 | b=1", 1, r.lr_intercept, r.p_intercept);
    line("(iii) b=1 | a", 1, r.lr_slope, r.p_slope);
    return os.str();
}

void write_recalibration_csv(const RecalibrationResult& r, const std::filesystem::path& path,
                             std::string_view header_comment) {
    auto out = csv::open_output(path, header_comment);
    out << "a_hat,b_hat,a_given_b1,b_given_a0,loglik_full,loglik_b1,loglik_a0,loglik_null,"
           "lr_overall,lr_intercept,lr_slope,p_overall,p_intercept,p_slope\n";
    const double v[] = {r.a_hat,      r.b_hat,       r.a_given_b1, r.b_given_a0, r.loglik_full,
                        r.loglik_b1,  r.loglik_a0,   r.loglik_null, r.lr_overall, r.lr_intercept,
                        r.lr_slope,   r.p_overall,   r.p_intercept, r.p_slope};
    for (std::size_t i = 0; i < std::size(v); ++i) out << (i ? "," : "") << csv::format_double(v[i]);
    out << '\n';
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace subcal
