#include "subcal/shm_glm.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "subcal/error.hpp"

namespace subcal {
namespace {

void check_rows(const std::vector<LongRecord>& rows, int k, std::size_t p) {
    for (const auto& r : rows) {
        if (r.time < 1 || r.time > k - 1) {
            throw DataError("long record at time " + std::to_string(r.time) + " outside 1.." +
                            std::to_string(k - 1));
        }
        if (r.covariates.size() != p) {
            throw DataError("long record has " + std::to_string(r.covariates.size()) +
                            " covariates, expected " + std::to_string(p));
        }
        if (!(r.w > 0.0)) throw DataError("long record weights must be positive");
    }
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

std::string join_times(const std::vector<int>& times) {
    std::ostringstream os;
    for (std::size_t i = 0; i < times.size(); ++i) os << (i ? "," : "") << times[i];
    return os.str();
}

// Solves (-H) delta = score; falls back to a diagonal shift when -H is not
// numerically positive definite.
Eigen::VectorXd newton_direction(const LikelihoodEval& e, Eigen::Index n) {
    const Eigen::Map<const Eigen::VectorXd> score(e.score.data(), n);
    Eigen::MatrixXd info = -Eigen::Map<const Eigen::MatrixXd>(e.hessian.data(), n, n);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 0.0).all()) {
        Eigen::VectorXd d = ldlt.solve(score);
        if (d.allFinite()) return d;
    }
    double shift = 1e-8 * std::max(1.0, info.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 30; ++attempt, shift *= 10.0) {
        Eigen::MatrixXd shifted = info;
        shifted.diagonal().array() += shift;
        Eigen::LLT<Eigen::MatrixXd> llt(shifted);
        if (llt.info() == Eigen::Success) {
            Eigen::VectorXd d = llt.solve(score);
            if (d.allFinite()) return d;
        }
    }
    return score;  // steepest ascent
}

}  // namespace

double FittedModel::linear_predictor(std::span<const double> x, int t) const {
    if (t < 1 || t > k - 1) {
        throw DataError("time " + std::to_string(t) + " outside 1.." + std::to_string(k - 1));
    }
    if (x.size() != coefficients.size()) {
        throw DataError("covariate vector has length " + std::to_string(x.size()) + ", model expects " +
                        std::to_string(coefficients.size()));
    }
    double eta = baseline[static_cast<std::size_t>(t - 1)];
    for (std::size_t j = 0; j < x.size(); ++j) eta += x[j] * coefficients[j];
    return eta;
}

LikelihoodEval evaluate_likelihood(const std::vector<LongRecord>& rows, int k, std::size_t p,
                                   Link link, std::span<const double> theta, bool with_hessian) {
    const std::size_t nb = static_cast<std::size_t>(k - 1);
    const std::size_t n = nb + p;
    if (theta.size() != n) throw DataError("parameter vector has the wrong length");

    LikelihoodEval e{0.0, std::vector<double>(n, 0.0), {}};
    if (with_hessian) e.hessian.assign(n * n, 0.0);
    // Column-major n x n, upper triangle accumulated then mirrored.
    auto H = [&](std::size_t r, std::size_t c) -> double& { return e.hessian[c * n + r]; };

    for (const auto& row : rows) {
        const std::size_t j = static_cast<std::size_t>(row.time - 1);
        double eta = theta[j];
        for (std::size_t l = 0; l < p; ++l) eta += row.covariates[l] * theta[nb + l];
        const auto d = link_fn::bernoulli_row(link, eta, row.y, row.w);
        e.loglik += d.loglik;
        e.score[j] += d.d1;
        for (std::size_t l = 0; l < p; ++l) e.score[nb + l] += d.d1 * row.covariates[l];
        if (!with_hessian) continue;
        H(j, j) += d.d2;
        for (std::size_t l = 0; l < p; ++l) {
            const double dx = d.d2 * row.covariates[l];
            H(j, nb + l) += dx;
            for (std::size_t m = l; m < p; ++m) H(nb + l, nb + m) += dx * row.covariates[m];
        }
    }
    if (with_hessian) {
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t r = c + 1; r < n; ++r) H(r, c) = H(c, r);
    }
    return e;
}

FittedModel fit(const std::vector<LongRecord>& rows, int k, std::size_t p, Link link,
                const FitOptions& opts) {
    if (k < 2) throw DataError("k must be at least 2");
    check_rows(rows, k, p);
    const std::size_t nb = static_cast<std::size_t>(k - 1);
    const std::size_t n = nb + p;

    std::vector<double> event_w(nb, 0.0), total_w(nb, 0.0);
    std::vector<std::size_t> count(nb, 0);
    for (const auto& r : rows) {
        const auto j = static_cast<std::size_t>(r.time - 1);
        ++count[j];
        total_w[j] += r.w;
        if (r.y == 1) event_w[j] += r.w;
    }
    for (std::size_t j = 0; j < nb; ++j) {
        if (count[j] == 0) throw DesignDeficiencyError(static_cast<int>(j + 1));
    }

    std::vector<double> theta(n, 0.0);
    for (std::size_t j = 0; j < nb; ++j) {
        const double rate = std::clamp(event_w[j] / total_w[j], 1e-4, 1.0 - 1e-4);
        theta[j] = link_fn::predictor(link, rate);
    }

    FittedModel model;
    model.link = link;
    model.k = k;

    auto current = evaluate_likelihood(rows, k, p, link, theta, true);
    model.loglik_trace.push_back(current.loglik);
    double rel_change = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        if (max_abs(current.score) < opts.score_tolerance && rel_change < opts.loglik_tolerance) {
            converged = true;
            break;
        }
        const Eigen::VectorXd dir = newton_direction(current, static_cast<Eigen::Index>(n));

        bool accepted = false;
        double step = 1.0;
        for (int h = 0; h <= opts.max_step_halvings; ++h, step *= 0.5) {
            std::vector<double> cand(theta);
            for (std::size_t j = 0; j < n; ++j) cand[j] += step * dir[static_cast<Eigen::Index>(j)];
            auto trial = evaluate_likelihood(rows, k, p, link, cand, true);
            // Near the optimum the gain drops below the resolution of the sum.
            const double slack = 1e-12 * (std::abs(current.loglik) + 1.0);
            if (std::isfinite(trial.loglik) && trial.loglik >= current.loglik - slack) {
                rel_change = std::abs(trial.loglik - current.loglik) / (std::abs(current.loglik) + 0.1);
                theta = std::move(cand);
                current = std::move(trial);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // No ascent left within floating point resolution.
            converged = max_abs(current.score) < 1e3 * opts.score_tolerance;
            break;
        }
        model.loglik_trace.push_back(current.loglik);
    }
    if (!converged && iter >= opts.max_iterations) {
        converged = max_abs(current.score) < opts.score_tolerance && rel_change < opts.loglik_tolerance;
    }

    model.baseline.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(nb));
    model.coefficients.assign(theta.begin() + static_cast<std::ptrdiff_t>(nb), theta.end());
    model.log_likelihood = current.loglik;
    model.iterations = iter;
    model.converged = converged;

    std::set<int> separated;
    for (std::size_t j = 0; j < nb; ++j) {
        if (event_w[j] == 0.0 || event_w[j] == total_w[j]) separated.insert(static_cast<int>(j + 1));
    }
    // A converged fit with a few extreme hazards is legitimate; without convergence they signal divergence.
    for (const auto& r : rows) {
        if (converged) break;
        const double h = link_fn::response(link, model.linear_predictor(r.covariates, r.time));
        if (h < opts.separation_hazard || h > 1.0 - opts.separation_hazard) separated.insert(r.time);
    }
    model.separated_times.assign(separated.begin(), separated.end());

    if (!model.separated_times.empty() && opts.separation == SeparationPolicy::Fail) {
        throw SeparationError("quasi-separation: fitted hazards at time(s) " +
                              join_times(model.separated_times) +
                              " tend to 0 or 1 and their coefficients are unbounded");
    }
    if (!converged && model.separated_times.empty()) {
        std::ostringstream os;
        os << "Newton-Raphson did not converge after " << iter << " iterations (max |score| = "
           << max_abs(current.score) << ")";
        throw ConvergenceError(os.str(), theta, iter);
    }

    const auto ni = static_cast<Eigen::Index>(n);
    const Eigen::MatrixXd info = -Eigen::Map<const Eigen::MatrixXd>(current.hessian.data(), ni, ni);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all()) {
        const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(ni, ni));
        std::vector<double> se(n);
        for (std::size_t j = 0; j < n; ++j) {
            se[j] = std::sqrt(std::max(0.0, cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j))));
        }
        model.standard_errors = std::move(se);
    }
    return model;
}

FittedModel fit_dataset(const Dataset& learning, Link link, const FitOptions& opts) {
    learning.validate();
    auto g = fit_reverse_km(learning);
    const auto rows = expand_long(learning, &g);
    auto model = fit(rows, learning.k, learning.p(), link, opts);
    model.covariate_names = learning.covariate_names;
    model.censoring = std::move(g);
    return model;
}

double predict_hazard(const FittedModel& model, std::span<const double> x, int t) {
    return link_fn::response(model.link, model.linear_predictor(x, t));
}

double cumulative_incidence(const FittedModel& model, std::span<const double> x, int t) {
    // Validate t once through the predictor; the product runs over s = 1..t.
    (void)model.linear_predictor(x, t);
    double log_surv = 0.0;
    for (int s = 1; s <= t; ++s) log_surv += link_fn::log_complement(model.link, model.linear_predictor(x, s));
    return -std::expm1(log_surv);
}

}  // namespace subcal
