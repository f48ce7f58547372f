#include "subcal/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "subcal/csv.hpp"
#include "subcal/error.hpp"

namespace subcal {
namespace {

constexpr std::size_t kDesignCovariates = 4;

std::vector<double> cumulative(const std::vector<double>& pmf) {
    std::vector<double> cdf(pmf.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) cdf[i] = acc += pmf[i];
    cdf.back() = 1.0;
    return cdf;
}

int draw_from_cdf(const std::vector<double>& cdf, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1)) + 1;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::vector<double> parse_vector(std::string_view value, std::string_view where) {
    std::vector<double> out;
    for (auto f : csv::split(value)) out.push_back(csv::parse_double(f, where));
    return out;
}

// log S0(a) with S0(a) = 1 - q + q exp(-a).
double log_baseline_survival(double q, double a) { return std::log1p(q * std::expm1(-a)); }

}  // namespace

void ScenarioConfig::validate() const {
    if (!(q > 0.0 && q < 1.0)) throw DataError("scenario: q must lie in (0,1)");
    if (!(censor_b > 0.0) || !std::isfinite(censor_b)) throw DataError("scenario: censor_b must be positive");
    if (k < 2) throw DataError("scenario: k must be at least 2");
    if (n_learn < 1 || n_valid < 1) throw DataError("scenario: sample sizes must be positive");
    if (gamma.size() != kDesignCovariates || beta.size() != kDesignCovariates) {
        throw DataError("scenario: gamma and beta must have 4 entries (x1,x2 normal; x3,x4 binary)");
    }
    if (n_replications < 1) throw DataError("scenario: n_replications must be positive");
    if (quantile_presample < 1000) throw DataError("scenario: quantile_presample must be at least 1000");
}

ScenarioConfig parse_scenario(std::string_view text) {
    ScenarioConfig c;
    std::size_t pos = 0, line_no = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = csv::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const auto where = "scenario line " + std::to_string(line_no);
        if (eq == std::string_view::npos) throw DataError(where + ": expected key = value");
        const auto key = csv::trim(line.substr(0, eq));
        const auto value = csv::trim(line.substr(eq + 1));
        if (key == "q") c.q = csv::parse_double(value, where);
        else if (key == "censor_b") c.censor_b = csv::parse_double(value, where);
        else if (key == "censoring") {
            if (value == "weak") c.censor_b = kCensorWeak;
            else if (value == "medium") c.censor_b = kCensorMedium;
            else if (value == "strong") c.censor_b = kCensorStrong;
            else throw DataError(where + ": censoring must be weak, medium or strong");
        } else if (key == "k") c.k = static_cast<int>(csv::parse_int(value, where));
        else if (key == "n_learn") c.n_learn = static_cast<int>(csv::parse_int(value, where));
        else if (key == "n_valid") c.n_valid = static_cast<int>(csv::parse_int(value, where));
        else if (key == "gamma") c.gamma = parse_vector(value, where);
        else if (key == "beta") c.beta = parse_vector(value, where);
        else if (key == "n_replications") c.n_replications = static_cast<int>(csv::parse_int(value, where));
        else if (key == "seed") c.seed = static_cast<std::uint64_t>(csv::parse_int(value, where));
        else if (key == "quantile_presample") c.quantile_presample = static_cast<int>(csv::parse_int(value, where));
        else if (key == "name") c.name = std::string(value);
        else throw DataError(where + ": unknown key '" + std::string(key) + "'");
    }
    c.validate();
    return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) { return parse_scenario(csv::read_file(path)); }

std::string scenario_to_text(const ScenarioConfig& c) {
    std::ostringstream os;
    const auto vec = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + csv::format_double(v[i]);
        return s;
    };
    if (!c.name.empty()) os << "name = " << c.name << '\n';
    os << "q = " << csv::format_double(c.q) << '\n'
       << "censor_b = " << csv::format_double(c.censor_b) << '\n'
       << "k = " << c.k << '\n'
       << "n_learn = " << c.n_learn << '\n'
       << "n_valid = " << c.n_valid << '\n'
       << "gamma = " << vec(c.gamma) << '\n'
       << "beta = " << vec(c.beta) << '\n'
       << "n_replications = " << c.n_replications << '\n'
       << "seed = " << c.seed << '\n'
       << "quantile_presample = " << c.quantile_presample << '\n';
    return os.str();
}

int CutPoints::discretize(double continuous_time) const {
    const auto it = std::upper_bound(boundaries.begin(), boundaries.end(), continuous_time);
    return static_cast<int>(it - boundaries.begin()) + 1;
}

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

double type1_probability(double q, double linear_predictor) {
    return -std::expm1(std::exp(linear_predictor) * std::log1p(-q));
}

double invert_type1_time(double q, double linear_predictor, double u) {
    const double eta = std::exp(linear_predictor);
    const double pi1 = type1_probability(q, linear_predictor);
    const double inner = std::pow(1.0 - u * pi1, 1.0 / eta) - (1.0 - q);
    return -std::log(inner / q);
}

std::vector<double> draw_covariates(Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    std::vector<double> x(kDesignCovariates);
    x[0] = normal(rng);
    x[1] = normal(rng);
    x[2] = coin(rng) ? 1.0 : 0.0;
    x[3] = coin(rng) ? 1.0 : 0.0;
    return x;
}

SubjectDraw draw_subject(const ScenarioConfig& config, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    SubjectDraw d;
    d.covariates = draw_covariates(rng);
    const double lp1 = dot(d.covariates, config.gamma);
    const double pi1 = type1_probability(config.q, lp1);
    if (unif(rng) < pi1) {
        d.event_type = 1;
        d.continuous_time = invert_type1_time(config.q, lp1, unif(rng));
    } else {
        d.event_type = 2;
        std::exponential_distribution<double> expo(std::exp(dot(d.covariates, config.beta)));
        d.continuous_time = expo(rng);
    }
    return d;
}

std::vector<double> censoring_pmf(double censor_b, int k) {
    if (!(censor_b > 0.0) || k < 1) throw DataError("censoring pmf needs censor_b > 0 and k >= 1");
    std::vector<double> pmf(static_cast<std::size_t>(k));
    double norm = 0.0;
    for (int s = 1; s <= k; ++s) norm += std::pow(censor_b, s);
    for (int t = 1; t <= k; ++t) pmf[static_cast<std::size_t>(t - 1)] = std::pow(censor_b, k - t + 1) / norm;
    return pmf;
}

int draw_censoring(const ScenarioConfig& config, Rng& rng) {
    return draw_from_cdf(cumulative(censoring_pmf(config.censor_b, config.k)), rng);
}

CutPoints estimate_cutpoints(const ScenarioConfig& config, Rng& rng) {
    config.validate();
    std::vector<double> times(static_cast<std::size_t>(config.quantile_presample));
    for (auto& t : times) t = draw_subject(config, rng).continuous_time;
    std::sort(times.begin(), times.end());

    CutPoints cp;
    const double n1 = static_cast<double>(times.size() - 1);
    for (int j = 1; j < config.k; ++j) {
        const double h = n1 * j / config.k;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = std::min(lo + 1, times.size() - 1);
        cp.boundaries.push_back(times[lo] + (h - static_cast<double>(lo)) * (times[hi] - times[lo]));
    }
    for (std::size_t j = 1; j < cp.boundaries.size(); ++j) {
        if (!(cp.boundaries[j] > cp.boundaries[j - 1])) {
            throw DataError("estimated cut points are not strictly increasing; enlarge the presample");
        }
    }
    return cp;
}

CutPoints estimate_cutpoints(const ScenarioConfig& config) {
    auto rng = make_stream(config.seed, kCutpointStream);
    return estimate_cutpoints(config, rng);
}

SimulatedData generate_dataset(const ScenarioConfig& config, const CutPoints& cutpoints, Rng& rng) {
    config.validate();
    if (cutpoints.boundaries.size() != static_cast<std::size_t>(config.k - 1)) {
        throw DataError("cut points do not match k - 1 boundaries");
    }
    const auto cdf = cumulative(censoring_pmf(config.censor_b, config.k));
    const std::vector<std::string> names{"x1", "x2", "x3", "x4"};

    const auto draw_sample = [&](int n) {
        Dataset d;
        d.k = config.k;
        d.covariate_names = names;
        d.subjects.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            auto s = draw_subject(config, rng);
            const int t_disc = cutpoints.discretize(s.continuous_time);
            const int c_disc = draw_from_cdf(cdf, rng);
            SubjectRecord r;
            r.observed_time = std::min(t_disc, c_disc);
            r.status = t_disc <= c_disc ? 1 : 0;
            r.event_type = r.status == 1 ? s.event_type : 0;
            r.covariates = std::move(s.covariates);
            d.subjects.push_back(std::move(r));
        }
        return d;
    };

    SimulatedData out;
    out.learning = draw_sample(config.n_learn);
    out.validation = draw_sample(config.n_valid);
    return out;
}

FittedModel oracle_model(const ScenarioConfig& config, const CutPoints& cutpoints) {
    config.validate();
    if (cutpoints.boundaries.size() != static_cast<std::size_t>(config.k - 1)) {
        throw DataError("cut points do not match k - 1 boundaries");
    }
    FittedModel m;
    m.link = Link::Cloglog;
    m.k = config.k;
    m.coefficients = config.gamma;
    m.covariate_names = {"x1", "x2", "x3", "x4"};
    double prev = 0.0;
    for (double a : cutpoints.boundaries) {
        const double log_ratio = log_baseline_survival(config.q, a) - log_baseline_survival(config.q, prev);
        m.baseline.push_back(std::log(-log_ratio));
        prev = a;
    }
    m.converged = true;
    return m;
}

}  // namespace subcal
