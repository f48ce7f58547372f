// Command-line front end: simulate, fit, predict, calibrate, recalibrate, bench.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "subcal/benchmark.hpp"
#include "subcal/calibration.hpp"
#include "subcal/censoring.hpp"
#include "subcal/csv.hpp"
#include "subcal/data_model.hpp"
#include "subcal/error.hpp"
#include "subcal/model_io.hpp"
#include "subcal/recalibration.hpp"
#include "subcal/shm_glm.hpp"
#include "subcal/simulation.hpp"

namespace fs = std::filesystem;
using namespace subcal;

namespace {

std::string g_invocation;

std::string invocation_line(int argc, char** argv) {
    std::ostringstream os;
    os << "subcal " << SUBCAL_VERSION << ":";
    for (int i = 0; i < argc; ++i) os << ' ' << argv[i];
    return os.str();
}

void check_covariates(const FittedModel& model, const Dataset& data, const std::string& path) {
    if (model.covariate_names != data.covariate_names) {
        std::string want, got;
        for (const auto& n : model.covariate_names) want += (want.empty() ? "" : ",") + n;
        for (const auto& n : data.covariate_names) got += (got.empty() ? "" : ",") + n;
        throw DataError("covariates of '" + path + "' (" + got + ") do not match the model (" + want + ")");
    }
}

// Censoring survival for validation weights: from --train when given,
// otherwise the learning-sample estimate stored in the model file.
CensoringSurvival learning_censoring(const FittedModel& model, const std::string& train_path) {
    if (!train_path.empty()) {
        auto train = read_short_csv(train_path, model.k);
        check_covariates(model, train, train_path);
        return fit_reverse_km(train);
    }
    if (!model.censoring) {
        throw DataError("model file carries no censoring survival estimate; pass --train with the learning sample");
    }
    return *model.censoring;
}

struct SimulateArgs {
    std::string scenario, out;
    std::optional<std::uint64_t> seed;
    int replication = 0;
};

int run_simulate(const SimulateArgs& a) {
    auto config = load_scenario(a.scenario);
    config.seed = *a.seed;
    const auto cut = estimate_cutpoints(config);
    auto rng = make_stream(config.seed, replication_stream(a.replication));
    const auto data = generate_dataset(config, cut, rng);
    auto oracle = oracle_model(config, cut);
    oracle.censoring = fit_reverse_km(data.learning);

    const fs::path dir(a.out);
    write_short_csv(data.learning, dir / "learn.csv", g_invocation);
    write_short_csv(data.validation, dir / "valid.csv", g_invocation);
    {
        auto out = csv::open_output(dir / "cutpoints.csv", g_invocation);
        out << "t,upper_boundary\n";
        for (std::size_t j = 0; j < cut.boundaries.size(); ++j) {
            out << j + 1 << ',' << csv::format_double(cut.boundaries[j]) << '\n';
        }
    }
    save_model(oracle, dir / "oracle.json", g_invocation);
    {
        auto out = csv::open_output(dir / "scenario.txt", g_invocation);
        out << scenario_to_text(config);
    }
    std::cout << "wrote " << data.learning.size() << " learning and " << data.validation.size()
              << " validation subjects to " << dir.string() << '\n';
    return 0;
}

struct FitArgs {
    std::string train, link = "cloglog", out, long_out, censoring_out;
    int k = 0;
    bool allow_separation = false;
    int max_iter = 100;
    double tol = 1e-8;
};

int run_fit(const FitArgs& a) {
    const auto train = read_short_csv(a.train, a.k);
    FitOptions opts;
    opts.max_iterations = a.max_iter;
    opts.score_tolerance = a.tol;
    opts.separation = a.allow_separation ? SeparationPolicy::Keep : SeparationPolicy::Fail;
    const auto model = fit_dataset(train, parse_link(a.link), opts);

    save_model(model, a.out, g_invocation);
    if (!a.long_out.empty()) write_long_csv(train, expand_long(train, &*model.censoring), a.long_out, g_invocation);
    if (!a.censoring_out.empty()) write_censoring_csv(*model.censoring, a.censoring_out, g_invocation);

    std::cout << "fitted " << to_string(model.link) << " model: k=" << model.k << " n=" << train.size()
              << " loglik=" << model.log_likelihood << " iterations=" << model.iterations
              << (model.converged ? "" : " (not converged)") << '\n';
    for (std::size_t j = 0; j < model.coefficients.size(); ++j) {
        std::cout << "  " << model.covariate_names[j] << "  " << model.coefficients[j];
        if (model.standard_errors) std::cout << "  (naive se " << (*model.standard_errors)[model.baseline.size() + j] << ")";
        std::cout << '\n';
    }
    if (!model.separated_times.empty()) {
        std::cout << "warning: baseline diverged at " << model.separated_times.size() << " time(s)\n";
    }
    return 0;
}

struct PredictArgs {
    std::string model, data, out;
};

int run_predict(const PredictArgs& a) {
    const auto model = load_model(a.model);
    const auto data = read_short_csv(a.data, model.k);
    check_covariates(model, data, a.data);
    auto out = csv::open_output(a.out, g_invocation);
    out << "subject,time,hazard,cif\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& x = data.subjects[i].covariates;
        for (int t = 1; t < model.k; ++t) {
            out << i << ',' << t << ',' << csv::format_double(predict_hazard(model, x, t)) << ','
                << csv::format_double(cumulative_incidence(model, x, t)) << '\n';
        }
    }
    if (!out) throw IoError("write failed for '" + a.out + "'");
    return 0;
}

struct CalibrateArgs {
    std::string model, valid, out, train;
    int groups = kDefaultGroups;
};

int run_calibrate(const CalibrateArgs& a) {
    const auto model = load_model(a.model);
    const auto valid = read_short_csv(a.valid, model.k);
    check_covariates(model, valid, a.valid);
    const auto g = learning_censoring(model, a.train);
    const auto points = calibration_points(model, valid, g, a.groups);
    emit_plot(points, a.out, g_invocation);
    std::cout << points.size() << " calibration groups; weighted mean |observed - predicted| = "
              << mean_abs_deviation(points) << ", max = " << max_abs_deviation(points) << '\n';
    return 0;
}

struct RecalibrateArgs {
    std::string model, valid, out, csv_out, train;
};

int run_recalibrate(const RecalibrateArgs& a) {
    const auto model = load_model(a.model);
    const auto valid = read_short_csv(a.valid, model.k);
    check_covariates(model, valid, a.valid);
    const auto g = learning_censoring(model, a.train);
    const auto r = recalibrate(model, valid, g);
    if (!a.out.empty()) {
        auto out = csv::open_output(a.out, {});
        out << recalibration_to_json(r, g_invocation);
    }
    if (!a.csv_out.empty()) write_recalibration_csv(r, a.csv_out, g_invocation);
    std::cout << recalibration_table(r);
    return 0;
}

struct BenchArgs {
    std::string scenario, out;
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    int threads = 1;
    int groups = kDefaultGroups;
};

int run_bench(const BenchArgs& a) {
    auto config = load_scenario(a.scenario);
    config.seed = *a.seed;
    if (a.reps) config.n_replications = *a.reps;
    config.validate();
    BenchOptions opts;
    opts.threads = a.threads;
    opts.n_groups = a.groups;
    const auto summary = run_scenario(config, opts);
    summarize(summary, a.out, g_invocation);
    std::cout << summary_table(summary);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    g_invocation = invocation_line(argc, argv);
    CLI::App app{"Discrete-time subdistribution hazard models: fitting and calibration assessment"};
    app.set_version_flag("--version", std::string(SUBCAL_VERSION));
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Draw one learning/validation pair from a simulation scenario");
    simulate->add_option("--scenario", sim.scenario, "Scenario file (key = value lines)")->required()->check(CLI::ExistingFile);
    simulate->add_option("--seed", sim.seed, "Random seed (required)")->required();
    simulate->add_option("--replication", sim.replication, "Replication index selecting the RNG stream")->capture_default_str();
    simulate->add_option("--out", sim.out, "Output directory")->required();

    FitArgs fa;
    auto* fitc = app.add_subcommand("fit", "Fit a discrete subdistribution hazard model to short-format CSV data");
    fitc->add_option("--train", fa.train, "Learning sample CSV (time,status,event,x1..xp)")->required()->check(CLI::ExistingFile);
    fitc->add_option("--link", fa.link, "Response function: cloglog (Gompertz) or logit")->capture_default_str();
    fitc->add_option("--k", fa.k, "Number of discrete time points (default: largest observed time)");
    fitc->add_option("--out", fa.out, "Model JSON output")->required();
    fitc->add_flag("--allow-separation", fa.allow_separation, "Keep diverging baseline estimates instead of failing");
    fitc->add_option("--max-iter", fa.max_iter, "Maximum Newton iterations")->capture_default_str();
    fitc->add_option("--tol", fa.tol, "Tolerance on the maximum absolute score")->capture_default_str();
    fitc->add_option("--long-out", fa.long_out, "Also write the long-format design CSV");
    fitc->add_option("--censoring-out", fa.censoring_out, "Also write the censoring survival CSV");

    PredictArgs pa;
    auto* predict = app.add_subcommand("predict", "Predict hazards and cumulative incidences");
    predict->add_option("--model", pa.model, "Model JSON")->required()->check(CLI::ExistingFile);
    predict->add_option("--data", pa.data, "Short-format CSV")->required()->check(CLI::ExistingFile);
    predict->add_option("--out", pa.out, "Output CSV (subject,time,hazard,cif)")->required();

    CalibrateArgs ca;
    auto* calibrate = app.add_subcommand("calibrate", "Calibration plot on a validation sample");
    calibrate->add_option("--model", ca.model, "Model JSON")->required()->check(CLI::ExistingFile);
    calibrate->add_option("--valid", ca.valid, "Validation sample CSV")->required()->check(CLI::ExistingFile);
    calibrate->add_option("--groups", ca.groups, "Number of percentile groups")->capture_default_str()->check(CLI::Range(2, 1000000));
    calibrate->add_option("--train", ca.train, "Learning sample for the censoring survival (default: stored in model)")->check(CLI::ExistingFile);
    calibrate->add_option("--out", ca.out, "Output directory for points.csv and plot.svg")->required();

    RecalibrateArgs ra;
    auto* recal = app.add_subcommand("recalibrate", "Logistic recalibration model and likelihood-ratio tests");
    recal->add_option("--model", ra.model, "Model JSON")->required()->check(CLI::ExistingFile);
    recal->add_option("--valid", ra.valid, "Validation sample CSV")->required()->check(CLI::ExistingFile);
    recal->add_option("--train", ra.train, "Learning sample for the censoring survival (default: stored in model)")->check(CLI::ExistingFile);
    recal->add_option("--out", ra.out, "JSON report output");
    recal->add_option("--csv", ra.csv_out, "CSV report output");

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "Run the replication study for one scenario");
    bench->add_option("--scenario", ba.scenario, "Scenario file (key = value lines)")->required()->check(CLI::ExistingFile);
    bench->add_option("--reps", ba.reps, "Number of replications (overrides the scenario file)")->check(CLI::PositiveNumber);
    bench->add_option("--seed", ba.seed, "Random seed (required)")->required();
    bench->add_option("--out", ba.out, "Output directory")->required();
    bench->add_option("--threads", ba.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    bench->add_option("--groups", ba.groups, "Calibration plot groups")->capture_default_str()->check(CLI::Range(2, 1000000));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) return run_simulate(sim);
        if (*fitc) return run_fit(fa);
        if (*predict) return run_predict(pa);
        if (*calibrate) return run_calibrate(ca);
        if (*recal) return run_recalibrate(ra);
        if (*bench) return run_bench(ba);
    } catch (const std::exception& e) {
        std::cerr << "subcal: error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
