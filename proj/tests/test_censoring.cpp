#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "subcal/censoring.hpp"
#include "subcal/error.hpp"

using namespace subcal;
using Catch::Approx;

namespace {

Dataset from_pairs(int k, const std::vector<std::pair<int, int>>& time_status) {
    Dataset d;
    d.k = k;
    for (auto [t, s] : time_status) d.subjects.push_back({t, s, s ? 1 : 0, {}});
    return d;
}

}  // namespace

TEST_CASE("reverse Kaplan-Meier on a small example", "[censoring]") {
    const auto g = fit_reverse_km(from_pairs(4, {{1, 1}, {2, 0}, {3, 1}, {3, 0}}));
    CHECK(g(0) == 1.0);
    CHECK(g(1) == Approx(1.0));
    CHECK(g(2) == Approx(2.0 / 3.0));
    CHECK(g(3) == Approx(1.0 / 3.0));
    CHECK(g.n_at_risk()[2] == 3);
    CHECK(g.n_censor_events()[3] == 1);
    // Extended as a constant.
    CHECK(g(10) == g(3));
    CHECK(g(-2) == 1.0);
}

TEST_CASE("single censored subject drives G to zero", "[censoring]") {
    const auto g = fit_reverse_km(from_pairs(3, {{2, 0}}));
    CHECK(g(1) == 1.0);
    CHECK(g(2) == 0.0);
}

TEST_CASE("all censored at distinct times gives the empirical survival", "[censoring][property]") {
    for (int n = 2; n <= 9; ++n) {
        std::vector<std::pair<int, int>> pairs;
        for (int t = 1; t <= n; ++t) pairs.emplace_back(t, 0);
        const auto g = fit_reverse_km(from_pairs(n + 1, pairs));
        for (int t = 0; t <= n; ++t) CHECK(g(t) == Approx(static_cast<double>(n - t) / n).margin(1e-14));
    }
}

TEST_CASE("reverse Kaplan-Meier is non-increasing and events at k never decrease it", "[censoring][property]") {
    std::mt19937_64 rng(314);
    for (int rep = 0; rep < 100; ++rep) {
        const int k = 2 + static_cast<int>(rng() % 12);
        std::uniform_int_distribution<int> time(1, k), status(0, 1);
        std::vector<std::pair<int, int>> pairs;
        for (int i = 0; i < 30; ++i) pairs.emplace_back(time(rng), status(rng));
        const auto g = fit_reverse_km(from_pairs(k, pairs));
        REQUIRE(g(0) == 1.0);
        for (int t = 1; t < k; ++t) {
            REQUIRE(g(t) <= g(t - 1));
            REQUIRE(g(t) >= 0.0);
        }
        pairs.emplace_back(k, 1);
        const auto g2 = fit_reverse_km(from_pairs(k, pairs));
        for (int t = 0; t < k; ++t) REQUIRE(g2(t) >= g(t) - 1e-15);
    }
}

TEST_CASE("censoring survival validates its input", "[censoring]") {
    CHECK_THROWS_AS(CensoringSurvival({0.9, 0.8}, {}, {}), DataError);
    CHECK_THROWS_AS(CensoringSurvival({1.0, 0.5, 0.7}, {}, {}), DataError);
}
