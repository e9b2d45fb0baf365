#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "elab/cvr.hpp"
#include "elab/electorate.hpp"
#include "elab/error.hpp"

using namespace elab;

namespace {

std::vector<Stance> stances(std::initializer_list<int> bits) {
    std::vector<Stance> out;
    for (int b : bits) out.push_back(b ? Stance::Rep : Stance::Dem);
    return out;
}

ElectorateSpec small_spec(std::size_t n = 2000) {
    ElectorateSpec s;
    s.seed = 99;
    s.n_voters = n;
    s.ideal_distribution = UniformIdeal{-0.2, 1.2};
    s.n_measures = 6;
    s.measure_spread = 0.0;
    return s;
}

ChoiceModel deterministic(double cost) {
    ChoiceModel m;
    m.cost = cost;
    return m;
}

RaceSpec race(std::string id, double p1, double p2, Party a = Party::D, Party b = Party::R) {
    RaceSpec r;
    r.race_id = std::move(id);
    r.cand1_party = a;
    r.cand2_party = b;
    r.cand1_pos = Position{p1};
    r.cand2_pos = Position{p2};
    return r;
}

}  // namespace

TEST_CASE("electorate spec validation") {
    auto s = small_spec();
    s.n_voters = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = small_spec();
    s.ideal_distribution = NormalIdeal{0.0, 0.0};
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.ideal_distribution = BimodalIdeal{0, 1, 1, 1, 1.0};
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.ideal_distribution = HistogramIdeal{{0.0, 1.0}, {0.0}};
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = small_spec();
    s.rep_position = s.dem_position;
    CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("electorate generation is seeded and thread independent") {
    auto s = small_spec(5000);
    s.ideal_distribution = BimodalIdeal{0.2, 0.05, 0.8, 0.1, 0.3};
    auto a = generate_electorate(s, 1);
    auto b = generate_electorate(s, 4);
    REQUIRE(a.size() == 5000);
    std::size_t first = 0;
    for (std::size_t v = 0; v < a.size(); ++v) {
        CHECK(a.ideal(v)[0] == b.ideal(v)[0]);
        first += a.ideal(v)[0] < 0.5;
    }
    // Roughly the first component's weight lands below the midpoint.
    CHECK(first == doctest::Approx(1500).epsilon(0.1));

    s.ideal_distribution = HistogramIdeal{{0.0, 1.0, 3.0}, {0.0, 2.0}};
    auto h = generate_electorate(s, 2);
    for (std::size_t v = 0; v < h.size(); ++v) {
        CHECK(h.ideal(v)[0] >= 1.0);
        CHECK(h.ideal(v)[0] < 3.0);
    }
}

TEST_CASE("measure responses at the party positions and the midpoint") {
    auto s = small_spec();
    auto geometry = build_measures(s);
    ResponseModel model{LossSpec::concave(2.0), deterministic(0.0)};
    StreamRng rng(1);
    auto at = [&](double x) {
        std::vector<double> ideal{x};
        return measure_responses(ideal, geometry, model, rng);
    };
    for (Stance d : at(0.0)) CHECK(d == Stance::Dem);
    for (Stance d : at(1.0)) CHECK(d == Stance::Rep);
    for (Stance d : at(0.5)) CHECK(d == Stance::Dem);
}

TEST_CASE("voter group and subgroup") {
    CHECK(voter_group(stances({0, 0, 0, 0, 0, 0, 0, 0, 0, 0})) == 0);
    CHECK(voter_group(stances({0, 0, 0, 0, 0, 1, 1, 1, 1, 1})) == 5);
    CHECK(voter_group(stances({1, 1, 1, 1, 1, 0, 0, 0, 0, 0})) == 5);
    CHECK(voter_group(stances({1, 1, 1, 1, 1, 1, 1, 1, 1})) == 9);
    CHECK(subgroup_id(stances({0, 0, 0, 0, 0, 0, 0, 0, 0, 0})) == 0);
    CHECK(subgroup_id(stances({0, 0, 0, 0, 0, 1, 1, 1, 1, 1})) == 31);
    CHECK(subgroup_id(stances({1, 0, 0})) == 4);

    std::vector<Stance> with_gap = stances({1, 0, 1});
    with_gap[1] = Stance::Missing;
    CHECK_THROWS_AS(voter_group(with_gap), DataError);
    CHECK_THROWS_AS(subgroup_id(with_gap), DataError);

    std::set<std::uint32_t> group5;
    for (std::uint32_t bits = 0; bits < 1024; ++bits) {
        std::vector<Stance> m(10);
        for (int q = 0; q < 10; ++q) m[q] = (bits >> (9 - q)) & 1 ? Stance::Rep : Stance::Dem;
        CHECK(subgroup_id(m) == bits);
        if (voter_group(m) == 5) group5.insert(subgroup_id(m));
    }
    CHECK(group5.size() == 252);
}

TEST_CASE("election simulation") {
    auto s = small_spec();
    auto voters = generate_electorate(s);

    SUBCASE("identical candidates with a positive cost: everyone abstains") {
        std::vector<RaceSpec> races{race("same", 0.4, 0.4)};
        auto t = simulate_election({s, voters, races, LossSpec::reverse_s(), deterministic(0.01), {}, 5});
        for (const auto& r : t.records) CHECK(r.choices[0] == Vote::A);
    }
    SUBCASE("a voter at the Democratic position votes D") {
        Electorate one(1, {0.0});
        auto single = s;
        single.n_voters = 1;
        std::vector<RaceSpec> races{race("dr", 0.0, 1.0)};
        auto t = simulate_election({single, one, races, LossSpec::linear(), deterministic(0.01), {}, 5});
        CHECK(t.records[0].choices[0] == Vote::D);
        for (Stance d : t.records[0].measures) CHECK(d == Stance::Dem);
    }
    SUBCASE("same-party races record the second candidate as O") {
        Electorate one(1, {1.0});
        auto single = s;
        single.n_voters = 1;
        std::vector<RaceSpec> races{race("dd", 0.0, 1.0, Party::D, Party::D)};
        auto t = simulate_election({single, one, races, LossSpec::linear(), deterministic(0.01), {}, 5});
        CHECK(t.records[0].choices[0] == Vote::O);
    }
    SUBCASE("deterministic across runs and thread counts") {
        std::vector<RaceSpec> races{race("a", 0.3, 0.7), race("b", 0.1, 0.9), race("c", 0.0, 0.1, Party::D, Party::D)};
        ChoiceModel m;
        m.mode = DecisionMode::Probabilistic;
        m.cost = 0.05;
        m.noise_scale = 0.1;
        auto t1 = simulate_election({s, voters, races, LossSpec::reverse_s(0.1), m, {}, 5}, 1);
        auto t2 = simulate_election({s, voters, races, LossSpec::reverse_s(0.1), m, {}, 5}, 3);
        auto t3 = simulate_election({s, voters, races, LossSpec::reverse_s(0.1), m, {}, 6}, 1);
        CHECK(t1 == t2);
        CHECK_FALSE(t1 == t3);
        std::size_t counted = 0;
        std::vector<std::size_t> hist(s.n_measures + 1);
        for (const auto& r : t1.records) ++hist[voter_group(r.measures)];
        for (auto h : hist) counted += h;
        CHECK(counted == s.n_voters);
    }
    SUBCASE("support for D falls with the group rank") {
        std::vector<RaceSpec> races{race("dr", 0.25, 0.75)};
        auto t = simulate_election({s, voters, races, LossSpec::concave(2.0), deterministic(0.01), {}, 5});
        std::vector<double> n(s.n_measures + 1), d(s.n_measures + 1);
        for (const auto& r : t.records) {
            int k = voter_group(r.measures);
            n[k] += 1;
            d[k] += r.choices[0] == Vote::D;
        }
        double prev = 1.0;
        for (std::size_t k = 0; k < n.size(); ++k) {
            if (n[k] == 0) continue;
            CHECK(d[k] / n[k] <= prev);
            prev = d[k] / n[k];
        }
    }
    SUBCASE("mirroring the voters swaps D and R") {
        std::vector<double> mirrored;
        for (std::size_t v = 0; v < voters.size(); ++v) mirrored.push_back(1.0 - voters.ideal(v)[0]);
        Electorate mirror(1, mirrored);
        auto swapped = s;
        std::swap(swapped.dem_position, swapped.rep_position);
        std::vector<RaceSpec> races{race("dr", 0.2, 0.7)};
        auto a = simulate_election({s, voters, races, LossSpec::linear(), deterministic(0.02), {}, 5});
        std::vector<RaceSpec> mraces{race("dr", 0.8, 0.3, Party::R, Party::D)};
        auto b = simulate_election({swapped, mirror, mraces, LossSpec::linear(), deterministic(0.02), {}, 5});
        for (std::size_t v = 0; v < a.records.size(); ++v) {
            Vote x = a.records[v].choices[0], y = b.records[v].choices[0];
            CHECK((x == Vote::A ? y == Vote::A : (x == Vote::D) == (y == Vote::R)));
            CHECK(voter_group(a.records[v].measures) == voter_group(b.records[v].measures));
        }
    }
}

TEST_CASE("CVR round trip and parse errors") {
    const std::string text =
        "voter_id,m1,m2,m3,P,H1\n"
        "0,0,1,NA,D,A\n"
        "1,1,1,1,R,O\n"
        "7,0,0,0,NA,D\n";
    std::istringstream in(text);
    auto t = read_cvr(in);
    CHECK(t.n_measures == 3);
    CHECK(t.race_ids == std::vector<std::string>{"P", "H1"});
    REQUIRE(t.records.size() == 3);
    CHECK(t.records[0].measures[2] == Stance::Missing);
    CHECK(t.records[2].choices[0] == Vote::Missing);
    std::ostringstream out;
    write_cvr(out, t);
    CHECK(out.str() == text);

    std::istringstream empty("voter_id,m1,R1\n");
    auto e = read_cvr(empty);
    CHECK(e.records.empty());
    CHECK(e.n_measures == 1);

    std::string twelve = "voter_id";
    for (int q = 1; q <= 12; ++q) twelve += ",m" + std::to_string(q);
    twelve += ",P\n0,0,0,0,0,0,0,0,0,0,0,1,1,D\n";
    std::istringstream ca(twelve);
    CHECK(read_cvr(ca).n_measures == 12);

    auto line_of = [](const std::string& body) {
        std::istringstream bad(body);
        try {
            read_cvr(bad);
        } catch (const DataError& err) {
            return err.line();
        }
        return std::size_t{0};
    };
    CHECK(line_of("voter_id,m1,P\n0,1,D\n1,2,D\n") == 3);
    CHECK(line_of("voter_id,m1,P\n0,1,D\n1,1\n") == 3);
    CHECK(line_of("voter_id,m1,P\n0,1,X\n") == 2);
    CHECK(line_of("voter_id,m1,P\nx,1,D\n") == 2);
    CHECK(line_of("id,m1,P\n") == 1);
    CHECK(line_of("voter_id,m1,P,P\n") == 1);
}

TEST_CASE("CVR round trip of a simulated table") {
    auto s = small_spec(300);
    s.missing_rate = 0.05;
    auto voters = generate_electorate(s);
    std::vector<RaceSpec> races{race("a", 0.3, 0.7), race("b", 0.4, 0.45, Party::R, Party::R)};
    ChoiceModel m;
    m.mode = DecisionMode::Probabilistic;
    m.cost = 0.02;
    m.noise_scale = 0.2;
    auto t = simulate_election({s, voters, races, LossSpec::reverse_s(0.2), m, {}, 8});
    std::ostringstream first;
    write_cvr(first, t);
    std::istringstream in(first.str());
    auto back = read_cvr(in);
    CHECK(back == t);
    std::ostringstream second;
    write_cvr(second, back);
    CHECK(second.str() == first.str());
}
