#include "subcal/data_model.hpp"

#include <algorithm>
#include <string>

#include "subcal/censoring.hpp"
#include "subcal/csv.hpp"
#include "subcal/error.hpp"

namespace subcal {

void Dataset::validate() const {
    if (k < 2) throw DataError("number of time points k must be at least 2, got " + std::to_string(k));
    for (std::size_t i = 0; i < subjects.size(); ++i) {
        const auto& s = subjects[i];
        const auto where = "subject " + std::to_string(i);
        if (s.observed_time < 1 || s.observed_time > k) {
            throw DataError(where + ": observed time " + std::to_string(s.observed_time) +
                            " outside 1.." + std::to_string(k));
        }
        if (s.status != 0 && s.status != 1) {
            throw DataError(where + ": status must be 0 or 1, got " + std::to_string(s.status));
        }
        if (s.status == 1 && s.event_type < 1) {
            throw DataError(where + ": event type must be >= 1 for an observed event");
        }
        if (s.covariates.size() != p()) {
            throw DataError(where + ": " + std::to_string(s.covariates.size()) +
                            " covariates, expected " + std::to_string(p()));
        }
    }
}

std::vector<LongRecord> expand_long(const Dataset& data, const CensoringSurvival* g_hat) {
    const int last_time = data.k - 1;
    std::vector<LongRecord> rows;
    rows.reserve(data.size() * static_cast<std::size_t>(std::min(last_time, 4)));

    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& s = data.subjects[i];
        const std::span<const double> x(s.covariates);
        const int at_risk_until = std::min(s.observed_time, last_time);
        for (int t = 1; t <= at_risk_until; ++t) {
            const int y = (s.is_type1_event() && t == s.observed_time) ? 1 : 0;
            rows.push_back({i, t, y, 1.0, x});
        }
        if (!s.is_competing_event() || s.observed_time >= last_time) continue;

        if (g_hat == nullptr) {
            throw DataError("subject " + std::to_string(i) +
                            " has a competing event; a censoring survival estimate is required");
        }
        const double denom = (*g_hat)(s.observed_time - 1);
        if (!(denom > 0.0)) throw DegenerateWeightError(i, s.observed_time);
        for (int t = s.observed_time + 1; t <= last_time; ++t) {
            const double w = (*g_hat)(t - 1) / denom;
            if (w > 0.0) rows.push_back({i, t, 0, w, x});
        }
    }
    return rows;
}

int max_observed_time(const Dataset& data) {
    int m = 0;
    for (const auto& s : data.subjects) m = std::max(m, s.observed_time);
    return m;
}

Dataset parse_short_csv(std::string_view text, int k, std::string_view source) {
    Dataset data;
    bool have_header = false;
    std::size_t n_fields = 0;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const auto line = csv::trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;

        const auto fields = csv::split(line);
        const auto where = std::string(source) + ":" + std::to_string(line_no);
        if (!have_header) {
            if (fields.size() < 3 || csv::trim(fields[0]) != "time" || csv::trim(fields[1]) != "status" ||
                csv::trim(fields[2]) != "event") {
                throw DataError(where + ": header must start with time,status,event");
            }
            for (std::size_t j = 3; j < fields.size(); ++j) {
                data.covariate_names.emplace_back(csv::trim(fields[j]));
            }
            n_fields = fields.size();
            have_header = true;
            continue;
        }
        if (fields.size() != n_fields) {
            throw DataError(where + ": expected " + std::to_string(n_fields) + " columns, got " +
                            std::to_string(fields.size()));
        }
        SubjectRecord s;
        s.observed_time = static_cast<int>(csv::parse_int(fields[0], where + " column 1 (time)"));
        s.status = static_cast<int>(csv::parse_int(fields[1], where + " column 2 (status)"));
        s.event_type = static_cast<int>(csv::parse_int(fields[2], where + " column 3 (event)"));
        s.covariates.reserve(n_fields - 3);
        for (std::size_t j = 3; j < n_fields; ++j) {
            s.covariates.push_back(csv::parse_double(
                fields[j], where + " column " + std::to_string(j + 1) + " (" + data.covariate_names[j - 3] + ")"));
        }
        if (s.observed_time < 1) {
            throw DataError(where + " column 1 (time): observed time must be >= 1");
        }
        if (s.status != 0 && s.status != 1) {
            throw DataError(where + " column 2 (status): status must be 0 or 1");
        }
        if (s.status == 0) s.event_type = 0;
        data.subjects.push_back(std::move(s));
    }
    if (!have_header) throw DataError(std::string(source) + ": missing header line");

    data.k = k > 0 ? k : std::max(2, max_observed_time(data));
    data.validate();
    return data;
}

Dataset read_short_csv(const std::filesystem::path& path, int k) {
    return parse_short_csv(csv::read_file(path), k, path.string());
}

void write_short_csv(const Dataset& data, const std::filesystem::path& path,
                     std::string_view header_comment) {
    auto out = csv::open_output(path, header_comment);
    out << "time,status,event";
    for (const auto& name : data.covariate_names) out << ',' << name;
    out << '\n';
    for (const auto& s : data.subjects) {
        out << s.observed_time << ',' << s.status << ',' << (s.status == 1 ? s.event_type : 0);
        for (double x : s.covariates) out << ',' << csv::format_double(x);
        out << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_long_csv(const Dataset& data, const std::vector<LongRecord>& rows,
                    const std::filesystem::path& path, std::string_view header_comment) {
    auto out = csv::open_output(path, header_comment);
    out << "subject,time,y,w";
    for (const auto& name : data.covariate_names) out << ',' << name;
    out << '\n';
    for (const auto& r : rows) {
        out << r.subject_index << ',' << r.time << ',' << r.y << ',' << csv::format_double(r.w);
        for (double x : r.covariates) out << ',' << csv::format_double(x);
        out << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace subcal
