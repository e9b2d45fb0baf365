#include "elab/electorate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "elab/error.hpp"
#include "parallel.hpp"

namespace elab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void validate_distribution(const IdealDistribution& dist) {
    std::visit(overloaded{
                   [](const UniformIdeal& u) {
                       if (!(u.lo < u.hi)) throw ConfigError("Uniform requires lo < hi", "electorate.ideal_distribution");
                   },
                   [](const NormalIdeal& n) {
                       if (!(n.sd > 0.0) || !std::isfinite(n.mean)) {
                           throw ConfigError("Normal requires sd > 0", "electorate.ideal_distribution.sd");
                       }
                   },
                   [](const BimodalIdeal& b) {
                       if (!(b.sd1 > 0.0) || !(b.sd2 > 0.0)) {
                           throw ConfigError("BimodalMixture requires positive sds", "electorate.ideal_distribution");
                       }
                       if (!(b.weight > 0.0 && b.weight < 1.0)) {
                           throw ConfigError("mixture weight must lie in (0,1)", "electorate.ideal_distribution.weight");
                       }
                   },
                   [](const HistogramIdeal& h) {
                       if (h.weights.empty() || h.edges.size() != h.weights.size() + 1) {
                           throw ConfigError("Histogram needs weights.size()+1 edges", "electorate.ideal_distribution");
                       }
                       for (std::size_t i = 0; i + 1 < h.edges.size(); ++i) {
                           if (!(h.edges[i] < h.edges[i + 1])) {
                               throw ConfigError("Histogram edges must increase", "electorate.ideal_distribution.edges");
                           }
                       }
                       double total = 0.0;
                       for (double w : h.weights) {
                           if (!(w >= 0.0)) {
                               throw ConfigError("Histogram weights must be >= 0", "electorate.ideal_distribution.weights");
                           }
                           total += w;
                       }
                       if (!(total > 0.0)) {
                           throw ConfigError("Histogram weights must have positive sum",
                                             "electorate.ideal_distribution.weights");
                       }
                   },
               },
               dist);
}

double draw_coordinate(const IdealDistribution& dist, StreamRng& rng) {
    return std::visit(overloaded{
                          [&](const UniformIdeal& u) { return u.lo + (u.hi - u.lo) * rng.uniform(); },
                          [&](const NormalIdeal& n) { return std::normal_distribution<double>(n.mean, n.sd)(rng); },
                          [&](const BimodalIdeal& b) {
                              if (rng.uniform() < b.weight) {
                                  return std::normal_distribution<double>(b.mean1, b.sd1)(rng);
                              }
                              return std::normal_distribution<double>(b.mean2, b.sd2)(rng);
                          },
                          [&](const HistogramIdeal& h) {
                              const double total = std::accumulate(h.weights.begin(), h.weights.end(), 0.0);
                              double target = rng.uniform() * total;
                              std::size_t bin = 0;
                              for (; bin + 1 < h.weights.size(); ++bin) {
                                  if (target < h.weights[bin]) break;
                                  target -= h.weights[bin];
                              }
                              while (h.weights[bin] == 0.0 && bin > 0) --bin;
                              return h.edges[bin] + (h.edges[bin + 1] - h.edges[bin]) * rng.uniform();
                          },
                      },
                      dist);
}

Vote vote_for(Choice choice, const RaceSpec& race) {
    switch (choice) {
        case Choice::VoteC1:
            return race.cand1_party == Party::D ? Vote::D : Vote::R;
        case Choice::VoteC2:
            // Same-party races record the second candidate as O.
            if (race.same_party()) return Vote::O;
            return race.cand2_party == Party::D ? Vote::D : Vote::R;
        case Choice::Abstain:
            return Vote::A;
    }
    return Vote::Missing;
}

}  // namespace

void ElectorateSpec::validate() const {
    if (n_voters == 0) throw ConfigError("n_voters must be >= 1", "electorate.n_voters");
    if (dimension == 0) throw ConfigError("dimension must be >= 1", "electorate.dimension");
    if (n_measures == 0) throw ConfigError("n_measures must be >= 1", "electorate.n_measures");
    if (n_measures > 31) throw ConfigError("n_measures must be <= 31", "electorate.n_measures");
    if (dem_position.dimension() != dimension) {
        throw ConfigError("dem_position has wrong dimension", "electorate.dem_position");
    }
    if (rep_position.dimension() != dimension) {
        throw ConfigError("rep_position has wrong dimension", "electorate.rep_position");
    }
    if (dem_position == rep_position) throw ConfigError("party positions must differ", "electorate.rep_position");
    if (!(measure_spread >= 0.0)) throw ConfigError("measure_spread must be >= 0", "electorate.measure_spread");
    if (!(missing_rate >= 0.0 && missing_rate < 1.0)) {
        throw ConfigError("missing_rate must lie in [0,1)", "electorate.missing_rate");
    }
    validate_distribution(ideal_distribution);
}

std::string_view to_string(Party party) { return party == Party::D ? "D" : "R"; }

std::string_view to_string(RaceType type) {
    switch (type) {
        case RaceType::Presidential: return "Presidential";
        case RaceType::USHouse: return "USHouse";
        case RaceType::StateSenate: return "StateSenate";
        case RaceType::StateHouse: return "StateHouse";
    }
    return "?";
}

Party parse_party(std::string_view name) {
    if (name == "D") return Party::D;
    if (name == "R") return Party::R;
    throw ConfigError("party must be D or R, got '" + std::string(name) + "'");
}

RaceType parse_race_type(std::string_view name) {
    if (name == "Presidential") return RaceType::Presidential;
    if (name == "USHouse") return RaceType::USHouse;
    if (name == "StateSenate") return RaceType::StateSenate;
    if (name == "StateHouse") return RaceType::StateHouse;
    throw ConfigError("unknown race type '" + std::string(name) + "'");
}

void CvrTable::validate() const {
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.measures.size() != n_measures) {
            throw DataError("record " + std::to_string(r.voter_id) + " has " + std::to_string(r.measures.size()) +
                            " measures, expected " + std::to_string(n_measures));
        }
        if (r.choices.size() != race_ids.size()) {
            throw DataError("record " + std::to_string(r.voter_id) + " has choices for undeclared races");
        }
    }
}

Electorate::Electorate(std::size_t dimension, std::vector<double> ideals)
    : dimension_(dimension), ideals_(std::move(ideals)) {
    if (dimension_ == 0) throw DomainError("electorate dimension must be >= 1");
    if (ideals_.size() % dimension_ != 0) throw DomainError("ideal point storage not a multiple of dimension");
}

Electorate generate_electorate(const ElectorateSpec& spec, unsigned threads) {
    spec.validate();
    std::vector<double> ideals(spec.n_voters * spec.dimension);
    detail::parallel_for(spec.n_voters, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t v = begin; v < end; ++v) {
            StreamRng rng(spec.seed, StreamTag::Electorate, v);
            for (std::size_t k = 0; k < spec.dimension; ++k) {
                ideals[v * spec.dimension + k] = draw_coordinate(spec.ideal_distribution, rng);
            }
        }
    });
    return Electorate(spec.dimension, std::move(ideals));
}

MeasureGeometry build_measures(const ElectorateSpec& spec) {
    spec.validate();
    const double span = distance(spec.dem_position, spec.rep_position);
    MeasureGeometry geometry;
    StreamRng rng(spec.seed, StreamTag::Measures);
    for (std::size_t q = 0; q < spec.n_measures; ++q) {
        std::vector<double> dem(spec.dimension), rep(spec.dimension);
        for (std::size_t k = 0; k < spec.dimension; ++k) {
            double offset = 0.0;
            if (spec.measure_spread > 0.0) {
                offset = std::normal_distribution<double>(0.0, spec.measure_spread * span)(rng);
            }
            dem[k] = spec.dem_position[k] + offset;
            rep[k] = spec.rep_position[k] + offset;
        }
        geometry.dem.emplace_back(std::move(dem));
        geometry.rep.emplace_back(std::move(rep));
    }
    return geometry;
}

std::vector<Stance> measure_responses(std::span<const double> ideal, const MeasureGeometry& geometry,
                                      const ResponseModel& model, StreamRng& rng) {
    std::vector<Stance> out(geometry.size());
    for (std::size_t q = 0; q < geometry.size(); ++q) {
        const double u_dem = utility(model.loss, distance(ideal, geometry.dem[q].coords()));
        const double u_rep = utility(model.loss, distance(ideal, geometry.rep[q].coords()));
        bool rep;
        if (model.choice.mode == DecisionMode::Deterministic) {
            rep = u_rep > u_dem;
        } else {
            const double p_rep = noise_cdf(model.choice.noise, model.choice.noise_scale, u_rep - u_dem);
            rep = rng.uniform() < p_rep;
        }
        out[q] = rep ? Stance::Rep : Stance::Dem;
    }
    return out;
}

int voter_group(std::span<const Stance> measures) {
    int k = 0;
    for (Stance s : measures) {
        if (s == Stance::Missing) throw DataError("voter group undefined: missing measure response");
        k += s == Stance::Rep ? 1 : 0;
    }
    return k;
}

std::uint32_t subgroup_id(std::span<const Stance> measures) {
    if (measures.size() > 32) throw DomainError("subgroup_id supports at most 32 measures");
    std::uint32_t id = 0;
    for (Stance s : measures) {
        if (s == Stance::Missing) throw DataError("subgroup undefined: missing measure response");
        id = (id << 1) | (s == Stance::Rep ? 1u : 0u);
    }
    return id;
}

CvrTable simulate_election(const ElectionInputs& in, unsigned threads) {
    in.spec.validate();
    in.loss.validate();
    in.choice.validate();
    const ResponseModel responses = in.responses.value_or(ResponseModel{in.loss, in.choice});
    responses.loss.validate();
    responses.choice.validate();
    if (in.electorate.dimension() != in.spec.dimension) {
        throw ConfigError("electorate dimension differs from spec", "electorate.dimension");
    }
    for (const auto& race : in.races) {
        if (race.cand1_pos.dimension() != in.spec.dimension || race.cand2_pos.dimension() != in.spec.dimension) {
            throw ConfigError("race '" + race.race_id + "' candidate positions do not match the policy space", "races");
        }
    }

    const MeasureGeometry geometry = build_measures(in.spec);
    const std::size_t n = in.electorate.size();

    CvrTable table;
    table.n_measures = in.spec.n_measures;
    for (const auto& race : in.races) table.race_ids.push_back(race.race_id);
    table.records.resize(n);

    detail::parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t v = begin; v < end; ++v) {
            const auto ideal = in.electorate.ideal(v);
            BallotRecord& rec = table.records[v];
            rec.voter_id = v;

            StreamRng response_rng(in.seed, StreamTag::Responses, v);
            rec.measures = measure_responses(ideal, geometry, responses, response_rng);
            if (in.spec.missing_rate > 0.0) {
                StreamRng missing_rng(in.seed, StreamTag::Missing, v);
                for (auto& m : rec.measures) {
                    if (missing_rng.uniform() < in.spec.missing_rate) m = Stance::Missing;
                }
            }

            rec.choices.resize(in.races.size());
            for (std::size_t j = 0; j < in.races.size(); ++j) {
                const RaceSpec& race = in.races[j];
                const double u1 = utility(in.loss, distance(ideal, race.cand1_pos.coords()));
                const double u2 = utility(in.loss, distance(ideal, race.cand2_pos.coords()));
                Choice choice;
                if (in.choice.mode == DecisionMode::Deterministic) {
                    choice = decide_deterministic(in.choice, u1, u2);
                } else {
                    const ChoiceDistribution p = decide_probabilistic(in.choice, u1, u2);
                    StreamRng vote_rng(in.seed, StreamTag::Votes, v, j + 1);
                    const double draw = vote_rng.uniform();
                    if (draw < p.p_c1) choice = Choice::VoteC1;
                    else if (draw < p.p_c1 + p.p_c2) choice = Choice::VoteC2;
                    else choice = Choice::Abstain;
                }
                rec.choices[j] = vote_for(choice, race);
            }
        }
    });
    return table;
}

}  // namespace elab
