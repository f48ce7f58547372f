#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "subcal/calibration.hpp"
#include "subcal/error.hpp"

using namespace subcal;
using Catch::Approx;

namespace {

std::vector<ScoredPair> random_pairs(std::mt19937_64& rng, std::size_t n, bool ties) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ScoredPair> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        double h = ties ? 0.05 * (1 + static_cast<int>(u(rng) * 5)) : 0.01 + 0.5 * u(rng);
        pairs.push_back({i / 3, static_cast<int>(1 + i % 3), h, u(rng) < h ? 1 : 0, 0.1 + 0.9 * u(rng)});
    }
    return pairs;
}

std::size_t count_substr(const std::string& s, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("group means on a hand example", "[calibration]") {
    std::vector<ScoredPair> pairs{
        {0, 1, 0.1, 0, 1.0}, {1, 1, 0.2, 1, 3.0}, {2, 1, 0.5, 1, 1.0}, {3, 1, 0.7, 0, 1.0},
    };
    const auto g = group_pairs(pairs, 2);
    REQUIRE(g.size() == 2);
    CHECK(g[0].mean_predicted == Approx((0.1 + 0.6) / 4.0));
    CHECK(g[0].mean_observed == Approx(0.75));
    CHECK(g[0].weight_sum == 4.0);
    CHECK(g[1].mean_predicted == Approx(0.6));
    CHECK(g[1].mean_observed == Approx(0.5));
    CHECK(max_abs_deviation(g) == Approx(0.575));
    CHECK(mean_abs_deviation(g) == Approx((4 * 0.575 + 2 * 0.1) / 6));
}

TEST_CASE("grouping invariants", "[calibration][property]") {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t n = 20 + rng() % 500;
        const int G = 2 + static_cast<int>(rng() % 19);
        const auto pairs = random_pairs(rng, n, rep % 2 == 0);
        const auto groups = group_pairs(pairs, G);
        REQUIRE(groups.size() == static_cast<std::size_t>(G));

        std::size_t lo = n, hi = 0, total = 0;
        double ws = 0, wy = 0, wh = 0;
        for (const auto& g : groups) {
            lo = std::min(lo, g.pair_count);
            hi = std::max(hi, g.pair_count);
            total += g.pair_count;
            wy += g.mean_observed * g.weight_sum;
            wh += g.mean_predicted * g.weight_sum;
            ws += g.weight_sum;
        }
        REQUIRE(hi - lo <= 1);
        REQUIRE(total == n);

        double ws2 = 0, wy2 = 0, wh2 = 0;
        for (const auto& p : pairs) {
            ws2 += p.w;
            wy2 += p.w * p.y;
            wh2 += p.w * p.hazard;
        }
        REQUIRE(wy / ws == Approx(wy2 / ws2).epsilon(1e-12));
        REQUIRE(wh / ws == Approx(wh2 / ws2).epsilon(1e-12));
        for (std::size_t g = 1; g < groups.size(); ++g)
            REQUIRE(groups[g].mean_predicted >= groups[g - 1].mean_predicted * (1 - 1e-14));

        auto shuffled = pairs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto again = group_pairs(shuffled, G);
        for (std::size_t g = 0; g < groups.size(); ++g) {
            REQUIRE(again[g].pair_count == groups[g].pair_count);
            REQUIRE(again[g].mean_predicted == Approx(groups[g].mean_predicted).epsilon(1e-13));
            REQUIRE(again[g].mean_observed == Approx(groups[g].mean_observed).epsilon(1e-13));
        }
    }
}

TEST_CASE("grouping errors", "[calibration]") {
    std::mt19937_64 rng(1);
    const auto pairs = random_pairs(rng, 10, false);
    CHECK_THROWS_AS(group_pairs(pairs, 11), GroupingError);
    CHECK_THROWS_AS(group_pairs(pairs, 1), GroupingError);
    CHECK_THROWS_AS(group_pairs({}, 20), GroupingError);
}

TEST_CASE("plot output for perfectly calibrated groups", "[calibration]") {
    std::vector<CalibrationGroup> groups;
    for (int g = 1; g <= 20; ++g) groups.push_back({g, 0.01 * g, 0.01 * g, 10.0, 10});
    CHECK(max_abs_deviation(groups) == Approx(0.0).margin(1e-15));

    const auto dir = std::filesystem::temp_directory_path() / "subcal_test_plot";
    emit_plot(groups, dir, "comment -- with dashes");
    std::ifstream csv(dir / "points.csv");
    std::size_t data_lines = 0;
    std::string footer;
    for (std::string line; std::getline(csv, line);) {
        if (line.empty()) continue;
        if (line[0] == '#') footer = line;
        else if (std::isdigit(static_cast<unsigned char>(line[0]))) ++data_lines;
    }
    CHECK(data_lines == 20);
    CHECK(footer.find("max_abs_deviation=0") != std::string::npos);

    std::ifstream svg_in(dir / "plot.svg");
    const std::string svg((std::istreambuf_iterator<char>(svg_in)), std::istreambuf_iterator<char>());
    CHECK(count_substr(svg, "class=\"point\"") == 20);
    CHECK(count_substr(svg, "class=\"diagonal\"") == 1);
    CHECK(svg.find("<!--") == std::string::npos);
    std::filesystem::remove_all(dir);
}
