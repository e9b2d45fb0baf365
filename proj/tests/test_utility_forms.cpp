#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "elab/error.hpp"
#include "elab/utility_forms.hpp"

using namespace elab;

TEST_CASE("utility values") {
    CHECK(utility(LossSpec::reverse_s(1.0), 0.0) == 1.0);
    CHECK(utility(LossSpec::linear(2.0), 3.0) == -6.0);
    CHECK(utility(LossSpec::concave(2.0), 1.5) == doctest::Approx(-2.25).epsilon(1e-15));
    CHECK(utility(LossSpec::convex(0.5), 0.0) == 0.0);
    CHECK_THROWS_AS(utility(LossSpec::linear(), -0.1), DomainError);
}

TEST_CASE("parameter constraints") {
    CHECK_THROWS_AS(LossSpec::concave(1.0).validate(), ConfigError);
    CHECK_THROWS_AS(LossSpec::convex(1.5).validate(), ConfigError);
    CHECK_THROWS_AS((LossSpec{LossFamily::Linear, 1.0, 2.0, 1.0}).validate(), ConfigError);
    CHECK_THROWS_AS(LossSpec::reverse_s(0.0).validate(), ConfigError);
    CHECK_THROWS_AS(LossSpec::linear(-1.0).validate(), ConfigError);
    CHECK_THROWS_AS(LossSpec::linear(std::nan("")).validate(), ConfigError);
    CHECK(LossSpec::reverse_s(1.0).inflection() == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("utility is strictly decreasing for random parameters") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        LossSpec specs[] = {LossSpec::linear(0.1 + 3 * u(rng)), LossSpec::concave(1.01 + 3 * u(rng), 0.1 + 3 * u(rng)),
                            LossSpec::convex(0.05 + 0.9 * u(rng), 0.1 + 3 * u(rng)),
                            LossSpec::reverse_s(0.1 + 3 * u(rng), 0.1 + 3 * u(rng))};
        double d1 = 2 * u(rng), d2 = d1 + 0.01 + u(rng);
        for (const auto& s : specs) CHECK(utility(s, d1) > utility(s, d2));
    }
}

TEST_CASE("second difference sign follows the curvature of each family") {
    CHECK(second_difference_sign(LossSpec::linear(), 0.7, 1e-3) == CurvatureSign::Zero);
    CHECK(second_difference_sign(LossSpec::concave(2.0), 1.0, 1e-3) == CurvatureSign::Negative);
    // Gaussian second difference at 2 with omega 1: 2 * (2 * 4 - 1) * exp(-4) * h^2 > 0.
    CHECK(second_difference_sign(LossSpec::reverse_s(1.0), 2.0, 1e-3) == CurvatureSign::Positive);

    const double h = 1e-3;
    const LossSpec rs = LossSpec::reverse_s(1.0);
    for (double d = 0.01; d < 5.0; d *= 1.15) {
        if (d <= h) continue;
        CHECK(second_difference_sign(LossSpec::linear(1.3), d, h) == CurvatureSign::Zero);
        CHECK(second_difference_sign(LossSpec::concave(2.5), d, h) == CurvatureSign::Negative);
        CHECK(second_difference_sign(LossSpec::convex(0.5), d, h) == CurvatureSign::Positive);
        if (std::fabs(d - rs.inflection()) <= 2 * h) continue;
        // Far in the tail the second difference drops under the tolerance.
        if (std::fabs(utility(rs, d - h) - 2 * utility(rs, d) + utility(rs, d + h)) < 1e-8) continue;
        CHECK(second_difference_sign(rs, d, h) ==
              (d < rs.inflection() ? CurvatureSign::Negative : CurvatureSign::Positive));
    }
}

TEST_CASE("indifference") {
    CHECK(indifference(LossSpec::reverse_s(), 0.4, 0.4) == 0.0);
    CHECK(indifference(LossSpec::concave(3.0), 0.4, 0.4) == 0.0);
    CHECK(indifference(LossSpec::linear(), 1.0, 3.0) == -2.0);
    CHECK(indifference(LossSpec::reverse_s(1.0), 0.5, 1.0) ==
          doctest::Approx(-(std::exp(-0.25) - std::exp(-1.0))).epsilon(1e-14));
    CHECK(indifference(LossSpec::reverse_s(1.0), 0.5, 1.0) == doctest::Approx(-0.4109).epsilon(1e-4));
}

TEST_CASE("indifference trend in the shared distance, gap fixed") {
    const double g = 0.2;
    auto series = [&](const LossSpec& s) {
        std::vector<double> out;
        for (int i = 0; i <= 60; ++i) out.push_back(indifference(s, 0.025 * i, 0.025 * i + g));
        return out;
    };
    auto lin = series(LossSpec::linear(1.5));
    for (double v : lin) CHECK(v == doctest::Approx(-0.3).epsilon(1e-12));
    auto conc = series(LossSpec::concave(2.0));
    for (std::size_t i = 1; i < conc.size(); ++i) CHECK(conc[i] < conc[i - 1]);
    auto conv = series(LossSpec::convex(0.5));
    for (std::size_t i = 1; i < conv.size(); ++i) CHECK(conv[i] > conv[i - 1]);
    auto rs = series(LossSpec::reverse_s(0.5));
    auto trough = std::min_element(rs.begin(), rs.end()) - rs.begin();
    CHECK(trough > 0);
    CHECK(trough < static_cast<long>(rs.size()) - 1);
    for (long i = 1; i <= trough; ++i) CHECK(rs[i] < rs[i - 1]);
    for (long i = trough + 1; i < static_cast<long>(rs.size()); ++i) CHECK(rs[i] > rs[i - 1]);
}

TEST_CASE("issue-based utility") {
    CHECK(issue_based_utility(LossSpec::reverse_s(1.0, 2.0), Position{0.3, 0.4}, Position{0.3, 0.4}) == 4.0);
    CHECK(issue_based_utility(LossSpec::linear(), Position{1.0, 1.0}, Position{0.0, 0.0}) == -2.0);
    CHECK(issue_based_utility(LossSpec::concave(2.0), Position{1.0, 1.0}, Position{0.0, 0.5}) == -1.25);
    CHECK_THROWS_AS(issue_based_utility(LossSpec::linear(), Position{1.0}, Position{0.0, 0.5}), DomainError);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    for (int t = 0; t < 100; ++t) {
        Position v{n01(rng), n01(rng), n01(rng)}, c{n01(rng), n01(rng), n01(rng)};
        double d = distance(v, c);
        CHECK(issue_based_utility(LossSpec::concave(2.0, 1.7), v, c) == doctest::Approx(-1.7 * d * d).epsilon(1e-12));
    }
}

TEST_CASE("indifference curves") {
    const Position voter{1.0, 1.0};

    SUBCASE("spatial level sets are circles") {
        LossSpec s = LossSpec::reverse_s(0.8);
        auto pts = indifference_curve(UtilityKind::Spatial, s, voter, utility(s, 0.3), 64);
        REQUIRE(pts.size() == 64);
        for (const auto& p : pts) CHECK(distance(p, voter) == doctest::Approx(0.3).epsilon(1e-8));
        for (std::size_t i = 1; i < pts.size(); ++i) {
            double a0 = std::atan2(pts[i - 1][1] - 1.0, pts[i - 1][0] - 1.0);
            double a1 = std::atan2(pts[i][1] - 1.0, pts[i][0] - 1.0);
            if (a0 < 0) a0 += 2 * std::numbers::pi;
            if (a1 < 0) a1 += 2 * std::numbers::pi;
            CHECK(a1 > a0);
        }
    }
    SUBCASE("issue-based linear level set is a diamond") {
        auto pts = indifference_curve(UtilityKind::IssueBased, LossSpec::linear(), voter, -1.0, 48);
        REQUIRE(pts.size() == 48);
        for (const auto& p : pts) CHECK(std::fabs(1 - p[0]) + std::fabs(1 - p[1]) == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("issue-based quadratic level set is a circle") {
        auto pts = indifference_curve(UtilityKind::IssueBased, LossSpec::concave(2.0), voter, -0.25, 32);
        REQUIRE(pts.size() == 32);
        for (const auto& p : pts)
            CHECK((p[0] - 1) * (p[0] - 1) + (p[1] - 1) * (p[1] - 1) == doctest::Approx(0.25).epsilon(1e-6));
    }
    SUBCASE("unreachable level") {
        CHECK(indifference_curve(UtilityKind::Spatial, LossSpec::reverse_s(), voter, 2.0, 16).empty());
        CHECK(indifference_curve(UtilityKind::Spatial, LossSpec::reverse_s(), voter, -0.5, 16).empty());
    }
}
