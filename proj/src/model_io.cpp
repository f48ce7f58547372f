#include "subcal/model_io.hpp"

#include <json.hpp>

#include "subcal/csv.hpp"
#include "subcal/error.hpp"

namespace subcal {

using nlohmann::json;

std::string model_to_json(const FittedModel& model, std::string_view generator) {
    json j;
    j["format"] = "subcal-model";
    j["version"] = kModelFormatVersion;
    if (!generator.empty()) j["generator"] = std::string(generator);
    j["link"] = std::string(to_string(model.link));
    j["k"] = model.k;
    j["covariate_names"] = model.covariate_names;
    j["baseline"] = model.baseline;
    j["coefficients"] = model.coefficients;
    j["fit"] = {{"log_likelihood", model.log_likelihood},
                {"iterations", model.iterations},
                {"converged", model.converged},
                {"separated_times", model.separated_times}};
    if (model.standard_errors) {
        j["fit"]["standard_errors"] = *model.standard_errors;
        j["fit"]["standard_errors_note"] = "naive: inverse observed information, ignores estimation of G";
    }
    if (model.censoring) {
        j["censoring"] = {{"G_hat", model.censoring->values()},
                          {"n_risk", model.censoring->n_at_risk()},
                          {"n_censored", model.censoring->n_censor_events()}};
    }
    return j.dump(2) + "\n";
}

FittedModel model_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "subcal-model") throw DataError("not a subcal model file");
        const int version = j.at("version").get<int>();
        if (version != kModelFormatVersion) {
            throw DataError("unsupported model format version " + std::to_string(version));
        }
        FittedModel m;
        m.link = parse_link(j.at("link").get<std::string>());
        m.k = j.at("k").get<int>();
        m.covariate_names = j.at("covariate_names").get<std::vector<std::string>>();
        m.baseline = j.at("baseline").get<std::vector<double>>();
        m.coefficients = j.at("coefficients").get<std::vector<double>>();
        if (m.k < 2 || m.baseline.size() != static_cast<std::size_t>(m.k - 1)) {
            throw DataError("model baseline length does not match k - 1");
        }
        if (m.coefficients.size() != m.covariate_names.size()) {
            throw DataError("model coefficient count does not match covariate names");
        }
        if (j.contains("fit")) {
            const auto& f = j["fit"];
            m.log_likelihood = f.value("log_likelihood", 0.0);
            m.iterations = f.value("iterations", 0);
            m.converged = f.value("converged", false);
            m.separated_times = f.value("separated_times", std::vector<int>{});
            if (f.contains("standard_errors")) m.standard_errors = f["standard_errors"].get<std::vector<double>>();
        }
        if (j.contains("censoring")) {
            const auto& c = j["censoring"];
            m.censoring = CensoringSurvival(c.at("G_hat").get<std::vector<double>>(),
                                            c.value("n_risk", std::vector<long>{}),
                                            c.value("n_censored", std::vector<long>{}));
        }
        return m;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const FittedModel& model, const std::filesystem::path& path, std::string_view generator) {
    auto out = csv::open_output(path, {});
    out << model_to_json(model, generator);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

FittedModel load_model(const std::filesystem::path& path) {
    return model_from_json(csv::read_file(path));
}

}  // namespace subcal
