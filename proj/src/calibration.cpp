#include "subcal/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "subcal/csv.hpp"
#include "subcal/error.hpp"

namespace subcal {
namespace {

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::vector<ScoredPair> score_pairs(const FittedModel& model, const Dataset& data,
                                    const std::vector<LongRecord>& rows) {
    if (data.k != model.k) {
        throw DataError("data has k = " + std::to_string(data.k) + " but the model was fitted with k = " +
                        std::to_string(model.k));
    }
    std::vector<ScoredPair> pairs;
    pairs.reserve(rows.size());
    for (const auto& r : rows) {
        pairs.push_back({r.subject_index, r.time, predict_hazard(model, r.covariates, r.time), r.y, r.w});
    }
    return pairs;
}

std::vector<CalibrationGroup> group_pairs(std::vector<ScoredPair> pairs, int n_groups) {
    if (n_groups < 2) throw GroupingError("number of groups must be at least 2");
    std::erase_if(pairs, [](const ScoredPair& p) { return !(p.w > 0.0); });
    if (pairs.empty()) throw GroupingError("no pairs with positive weight to group");
    if (static_cast<std::size_t>(n_groups) > pairs.size()) {
        throw GroupingError("cannot form " + std::to_string(n_groups) + " groups from " +
                            std::to_string(pairs.size()) + " pairs");
    }
    std::sort(pairs.begin(), pairs.end(), [](const ScoredPair& a, const ScoredPair& b) {
        if (a.hazard != b.hazard) return a.hazard < b.hazard;
        if (a.subject_index != b.subject_index) return a.subject_index < b.subject_index;
        return a.time < b.time;
    });

    const std::size_t n = pairs.size();
    const auto g_count = static_cast<std::size_t>(n_groups);
    std::vector<CalibrationGroup> groups;
    groups.reserve(g_count);
    for (std::size_t g = 0; g < g_count; ++g) {
        const std::size_t begin = g * n / g_count;
        const std::size_t end = (g + 1) * n / g_count;
        double sw = 0.0, swh = 0.0, swy = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            sw += pairs[i].w;
            swh += pairs[i].hazard * pairs[i].w;
            swy += pairs[i].y * pairs[i].w;
        }
        if (!(sw > 0.0)) throw GroupingError("group " + std::to_string(g + 1) + " has zero total weight");
        groups.push_back({static_cast<int>(g + 1), swh / sw, swy / sw, sw, end - begin});
    }
    return groups;
}

std::vector<CalibrationGroup> calibration_points(const FittedModel& model, const Dataset& validation,
                                                 const CensoringSurvival& g_hat, int n_groups) {
    if (validation.empty()) throw DataError("validation sample is empty");
    const auto rows = expand_long(validation, &g_hat);
    return group_pairs(score_pairs(model, validation, rows), n_groups);
}

double mean_abs_deviation(const std::vector<CalibrationGroup>& groups) {
    double num = 0.0, den = 0.0;
    for (const auto& g : groups) {
        num += g.weight_sum * std::abs(g.mean_observed - g.mean_predicted);
        den += g.weight_sum;
    }
    return den > 0.0 ? num / den : 0.0;
}

double max_abs_deviation(const std::vector<CalibrationGroup>& groups) {
    double m = 0.0;
    for (const auto& g : groups) m = std::max(m, std::abs(g.mean_observed - g.mean_predicted));
    return m;
}

void write_calibration_csv(const std::vector<CalibrationGroup>& groups, const std::filesystem::path& path,
                           std::string_view header_comment) {
    if (groups.empty()) throw GroupingError("no calibration points to write");
    auto out = csv::open_output(path, header_comment);
    out << "g,mean_predicted,mean_observed,weight_sum,pair_count\n";
    for (const auto& g : groups) {
        out << g.group_index << ',' << csv::format_double(g.mean_predicted) << ','
            << csv::format_double(g.mean_observed) << ',' << csv::format_double(g.weight_sum) << ','
            << g.pair_count << '\n';
    }
    out << "# max_abs_deviation=" << csv::format_double(max_abs_deviation(groups))
        << " weighted_mean_abs_deviation=" << csv::format_double(mean_abs_deviation(groups)) << '\n';
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string calibration_svg(const std::vector<CalibrationGroup>& groups, std::string_view title,
                            std::string_view header_comment) {
    if (groups.empty()) throw GroupingError("no calibration points to plot");
    constexpr double size = 420.0, margin = 60.0;
    double top = 0.0;
    for (const auto& g : groups) top = std::max({top, g.mean_predicted, g.mean_observed});
    top = top > 0.0 ? std::min(1.0, top * 1.05) : 1.0;
    const auto sx = [&](double v) { return margin + v / top * size; };
    const auto sy = [&](double v) { return margin + size - v / top * size; };

    std::ostringstream os;
    os.precision(6);
    const double total = size + 2 * margin;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << total << "\" height=\"" << total
       << "\" viewBox=\"0 0 " << total << ' ' << total << "\">\n";
    // Invocation lines contain "--", which XML comments forbid.
    if (!header_comment.empty()) os << "<metadata>" << xml_escape(header_comment) << "</metadata>\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << size << "\" height=\"" << size
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<line class=\"diagonal\" x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(top)
       << "\" y2=\"" << sy(top) << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = top * i / 4.0;
        os << "<text x=\"" << sx(v) << "\" y=\"" << margin + size + 18 << "\" font-size=\"11\" "
           << "text-anchor=\"middle\">" << v << "</text>\n";
        os << "<text x=\"" << margin - 6 << "\" y=\"" << sy(v) + 4 << "\" font-size=\"11\" "
           << "text-anchor=\"end\">" << v << "</text>\n";
    }
    os << "<text x=\"" << margin + size / 2 << "\" y=\"" << total - 15 << "\" font-size=\"13\" "
       << "text-anchor=\"middle\">mean predicted hazard</text>\n";
    os << "<text x=\"18\" y=\"" << margin + size / 2 << "\" font-size=\"13\" text-anchor=\"middle\" "
       << "transform=\"rotate(-90 18 " << margin + size / 2 << ")\">empirical hazard</text>\n";
    if (!title.empty()) {
        os << "<text x=\"" << total / 2 << "\" y=\"30\" font-size=\"14\" text-anchor=\"middle\">" << xml_escape(title)
           << "</text>\n";
    }
    for (const auto& g : groups) {
        os << "<circle class=\"point\" cx=\"" << sx(g.mean_predicted) << "\" cy=\"" << sy(g.mean_observed)
           << "\" r=\"4\" fill=\"black\"><title>g=" << g.group_index << "</title></circle>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void emit_plot(const std::vector<CalibrationGroup>& groups, const std::filesystem::path& dir,
               std::string_view header_comment) {
    if (groups.empty()) throw GroupingError("no calibration points to emit");
    write_calibration_csv(groups, dir / "points.csv", header_comment);
    auto out = csv::open_output(dir / "plot.svg", {});
    out << calibration_svg(groups, {}, header_comment);
    if (!out) throw IoError("write failed for '" + (dir / "plot.svg").string() + "'");
}

}  // namespace subcal
