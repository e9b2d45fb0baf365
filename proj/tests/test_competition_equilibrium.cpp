#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "elab/competition.hpp"
#include "elab/error.hpp"

using namespace elab;

namespace {

ChoiceModel stakes(double cost) {
    ChoiceModel m;
    m.cost = cost;
    return m;
}

// Frozen bimodal fixture with no pure equilibrium.
struct CycleFixture {
    std::vector<VoterDensity::Bump> bumps{{0.25, 0.08, 1.0}, {0.75, 0.08, 1.0}};
    VoterDensity density = VoterDensity::mixture(0.0, 1.0, 201, bumps);
    LossSpec loss = LossSpec::reverse_s(0.05);
    ChoiceModel model = stakes(0.1);
};

bool contains(const std::vector<std::pair<double, double>>& v, double a, double b) {
    return std::find(v.begin(), v.end(), std::pair{a, b}) != v.end();
}

}  // namespace

TEST_CASE("voter density") {
    auto u = VoterDensity::uniform(0.0, 1.0, 4);
    CHECK(u.grid() == std::vector<double>{0.125, 0.375, 0.625, 0.875});
    CHECK(u.weights()[0] == 0.25);
    CHECK(u.median() == 0.375);
    VoterDensity d({0.0, 1.0, 2.0}, {1.0, 1.0, 2.0});
    CHECK(d.weights()[2] == 0.5);
    CHECK(d.median() == 1.0);
    CHECK_THROWS(VoterDensity({0.0, 0.0}, {1.0, 1.0}));
    CHECK_THROWS(VoterDensity({0.0, 1.0}, {1.0, -1.0}));
    CHECK_THROWS(VoterDensity({0.0, 1.0}, {0.0, 0.0}));
}

TEST_CASE("contest shares") {
    auto uni = VoterDensity::uniform(0.0, 1.0, 1000);
    auto c = contest(uni, 0.4, 0.8, LossSpec::concave(2.0), stakes(0.0));
    CHECK(c.share1 == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(c.share2 == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(c.winner == Winner::Cand1);
    CHECK(c.share1 + c.share2 + c.abstain_share == doctest::Approx(1.0).epsilon(1e-12));

    auto same = contest(uni, 0.3, 0.3, LossSpec::reverse_s(0.1), stakes(0.01));
    CHECK(same.winner == Winner::Tie);
    CHECK(same.share1 == same.share2);

    auto mirror = contest(uni, 0.2, 0.8, LossSpec::reverse_s(0.1), stakes(0.01));
    CHECK(mirror.winner == Winner::Tie);

    CHECK_THROWS_AS(contest(uni, -0.5, 0.5, LossSpec::linear(), stakes(0.0)), DomainError);
}

TEST_CASE("contest is antisymmetric and reflection invariant") {
    std::vector<VoterDensity::Bump> bumps{{0.3, 0.1, 2.0}, {0.8, 0.05, 1.0}};
    auto d = VoterDensity::mixture(0.0, 1.0, 101, bumps);
    std::vector<double> rgrid, rweights;
    for (std::size_t i = d.size(); i-- > 0;) {
        rgrid.push_back(1.0 - d.grid()[i]);
        rweights.push_back(d.weights()[i]);
    }
    VoterDensity reflected(rgrid, rweights);
    ChoiceModel prob;
    prob.mode = DecisionMode::Probabilistic;
    prob.cost = 0.02;
    prob.noise_scale = 0.1;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        double a = u(rng), b = u(rng);
        for (const auto& model : {stakes(0.01), prob}) {
            auto x = contest(d, a, b, LossSpec::reverse_s(0.05), model);
            auto y = contest(d, b, a, LossSpec::reverse_s(0.05), model);
            CHECK(x.share1 == doctest::Approx(y.share2).epsilon(1e-12));
            CHECK(x.share2 == doctest::Approx(y.share1).epsilon(1e-12));
            CHECK((x.winner == Winner::Tie) == (y.winner == Winner::Tie));
            CHECK((x.winner == Winner::Cand1) == (y.winner == Winner::Cand2));
            auto r = contest(reflected, 1.0 - a, 1.0 - b, LossSpec::reverse_s(0.05), model);
            CHECK(r.share1 == doctest::Approx(x.share1).epsilon(1e-9));
            CHECK(r.share2 == doctest::Approx(x.share2).epsilon(1e-9));
        }
    }
}

TEST_CASE("concave loss converges on the median") {
    std::vector<VoterDensity::Bump> bumps{{0.5, 0.15, 1.0}};
    auto d = VoterDensity::mixture(0.0, 1.0, 201, bumps);
    auto grid = default_platform_grid(d, 101);
    PlatformGame game(d, grid, LossSpec::concave(2.0), stakes(0.0), 2);
    CHECK(game.median() == doctest::Approx(0.5).epsilon(1e-12));
    auto cw = condorcet_winner(game);
    REQUIRE(cw);
    CHECK(*cw == game.median());

    auto dyn = best_response_dynamics(game, {0.1, 0.9});
    REQUIRE(std::holds_alternative<Converged>(dyn));
    const auto& conv = std::get<Converged>(dyn);
    CHECK(conv.p1 == game.median());
    CHECK(conv.p2 == game.median());
    auto eq = pure_equilibria(game);
    CHECK(contains(eq, game.median(), game.median()));
    CHECK(contains(eq, conv.p1, conv.p2));

    auto again = best_response_dynamics(game, {game.median(), game.median()});
    REQUIRE(std::holds_alternative<Converged>(again));
    CHECK(std::get<Converged>(again).iterations == 0);

    CHECK_THROWS_AS(game.index_of(0.123), DomainError);
}

TEST_CASE("single platform is its own Condorcet winner") {
    auto d = VoterDensity::uniform(0.0, 1.0, 11);
    std::vector<double> one{0.3};
    auto cw = condorcet_winner(d, one, LossSpec::reverse_s(0.1), stakes(0.05));
    REQUIRE(cw);
    CHECK(*cw == 0.3);
}

TEST_CASE("bimodal ReverseS fixture has a majority cycle and no equilibrium") {
    CycleFixture f;
    PlatformGame game(f.density, default_platform_grid(f.density), f.loss, f.model, 2);
    CHECK_FALSE(condorcet_winner(game).has_value());
    CHECK(pure_equilibria(game).empty());
    auto dyn = best_response_dynamics(game, {0.5, 0.5});
    REQUIRE(std::holds_alternative<Cycle>(dyn));
    const auto& cycle = std::get<Cycle>(dyn);
    REQUIRE(cycle.witness.has_value());
    const auto& w = *cycle.witness;
    auto i = game.index_of(w.x_left), j = game.index_of(w.x_left_prime), k = game.index_of(w.x_right);
    CHECK(game.outcome(i, k).winner == Winner::Tie);
    CHECK(game.beats(j, i));
    CHECK(game.beats(k, j));
    for (double p : {w.x_left, w.x_left_prime, w.x_right})
        CHECK(std::find(cycle.platforms.begin(), cycle.platforms.end(), p) != cycle.platforms.end());
}

TEST_CASE("divergent symmetric pair is an equilibrium under a tie") {
    std::vector<VoterDensity::Bump> bumps{{0.3, 0.03, 1.0}, {0.7, 0.03, 1.0}};
    auto d = VoterDensity::mixture(0.0, 1.0, 201, bumps);
    PlatformGame game(d, default_platform_grid(d, 51), LossSpec::reverse_s(0.01), stakes(0.1));
    auto i = game.index_of(0.3), k = game.index_of(0.7);
    CHECK(game.outcome(i, k).winner == Winner::Tie);
    CHECK(contains(pure_equilibria(game), 0.3, 0.7));
}

TEST_CASE("converged dynamics land on pure equilibria") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 5; ++t) {
        std::vector<VoterDensity::Bump> bumps{{0.2 + 0.6 * u(rng), 0.05 + 0.2 * u(rng), 1.0},
                                              {0.2 + 0.6 * u(rng), 0.05 + 0.2 * u(rng), u(rng) + 0.2}};
        auto d = VoterDensity::mixture(0.0, 1.0, 101, bumps);
        PlatformGame game(d, default_platform_grid(d, 41), LossSpec::reverse_s(0.02 + 0.2 * u(rng)), stakes(0.02));
        auto grid = game.platforms();
        auto dyn = best_response_dynamics(game, {grid[3], grid[30]});
        if (auto* c = std::get_if<Converged>(&dyn)) CHECK(contains(pure_equilibria(game), c->p1, c->p2));
    }
}
