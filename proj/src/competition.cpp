#include "elab/competition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <tuple>

#include "elab/error.hpp"
#include "parallel.hpp"

namespace elab {

VoterDensity::VoterDensity(std::vector<double> grid, std::vector<double> weights)
    : grid_(std::move(grid)), weights_(std::move(weights)) {
    if (grid_.empty()) throw DomainError("voter density needs at least one grid point");
    if (grid_.size() != weights_.size()) throw DomainError("voter density: grid and weights differ in length");
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        if (!std::isfinite(grid_[i])) throw DomainError("voter density: non-finite grid point");
        if (i > 0 && !(grid_[i] > grid_[i - 1])) throw DomainError("voter density: grid must be strictly increasing");
        if (!std::isfinite(weights_[i]) || weights_[i] < 0.0) {
            throw DomainError("voter density: weights must be finite and nonnegative");
        }
    }
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    if (!(total > 0.0)) throw DomainError("voter density: weights sum to zero");
    for (auto& w : weights_) w /= total;
}

VoterDensity VoterDensity::uniform(double lo, double hi, std::size_t n) {
    if (n == 0 || !(hi > lo)) throw DomainError("uniform density needs n > 0 and lo < hi");
    std::vector<double> grid(n);
    const double width = (hi - lo) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) grid[i] = lo + (static_cast<double>(i) + 0.5) * width;
    return VoterDensity(std::move(grid), std::vector<double>(n, 1.0));
}

VoterDensity VoterDensity::mixture(double lo, double hi, std::size_t n, std::span<const Bump> bumps) {
    if (n < 2 || !(hi > lo)) throw DomainError("mixture density needs n >= 2 and lo < hi");
    if (bumps.empty()) throw DomainError("mixture density needs at least one bump");
    std::vector<double> grid(n), weights(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    grid.back() = hi;
    for (const auto& b : bumps) {
        if (!(b.sd > 0.0) || b.weight < 0.0) throw DomainError("mixture bump needs sd > 0 and weight >= 0");
        for (std::size_t i = 0; i < n; ++i) {
            const double z = (grid[i] - b.mean) / b.sd;
            weights[i] += b.weight * std::exp(-0.5 * z * z) / b.sd;
        }
    }
    return VoterDensity(std::move(grid), std::move(weights));
}

double VoterDensity::median() const {
    double cum = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        cum += weights_[i];
        if (cum >= 0.5 - 1e-12) return grid_[i];
    }
    return grid_.back();
}

std::string_view to_string(Winner winner) {
    switch (winner) {
        case Winner::Cand1: return "Cand1";
        case Winner::Cand2: return "Cand2";
        case Winner::Tie: return "Tie";
    }
    return "?";
}

namespace {

ContestOutcome tally(std::span<const double> weights, std::span<const double> u1, std::span<const double> u2,
                     const ChoiceModel& model) {
    ContestOutcome out;
    for (std::size_t v = 0; v < weights.size(); ++v) {
        const double w = weights[v];
        if (model.mode == DecisionMode::Deterministic) {
            switch (decide_deterministic(model, u1[v], u2[v])) {
                case Choice::VoteC1: out.share1 += w; break;
                case Choice::VoteC2: out.share2 += w; break;
                case Choice::Abstain: out.abstain_share += w; break;
            }
        } else {
            const auto d = decide_probabilistic(model, u1[v], u2[v]);
            out.share1 += w * d.p_c1;
            out.share2 += w * d.p_c2;
            out.abstain_share += w * d.p_abstain;
        }
    }
    const double margin = out.share1 - out.share2;
    out.winner = margin > kTieTolerance ? Winner::Cand1 : margin < -kTieTolerance ? Winner::Cand2 : Winner::Tie;
    return out;
}

std::vector<double> utilities(const VoterDensity& density, double platform, const LossSpec& loss) {
    std::vector<double> u(density.size());
    for (std::size_t v = 0; v < u.size(); ++v) u[v] = utility(loss, std::fabs(density.grid()[v] - platform));
    return u;
}

void check_platform(const VoterDensity& density, double p) {
    if (!(p >= density.lo() && p <= density.hi())) {
        throw DomainError("platform " + std::to_string(p) + " outside the density span");
    }
}

}  // namespace

ContestOutcome contest(const VoterDensity& density, double p1, double p2, const LossSpec& loss,
                       const ChoiceModel& model) {
    loss.validate();
    model.validate();
    check_platform(density, p1);
    check_platform(density, p2);
    const auto u1 = utilities(density, p1, loss);
    const auto u2 = utilities(density, p2, loss);
    return tally(density.weights(), u1, u2, model);
}

std::vector<double> default_platform_grid(const VoterDensity& density, std::size_t n) {
    if (n == 0) throw DomainError("platform grid needs at least one point");
    if (n == 1) return {density.median()};
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = density.lo() + (density.hi() - density.lo()) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    grid.back() = density.hi();
    return grid;
}

PlatformGame::PlatformGame(const VoterDensity& density, std::vector<double> platforms, const LossSpec& loss,
                           const ChoiceModel& model, unsigned threads)
    : platforms_(std::move(platforms)), median_(density.median()) {
    loss.validate();
    model.validate();
    if (platforms_.empty()) throw DomainError("platform grid is empty");
    for (std::size_t i = 0; i < platforms_.size(); ++i) {
        check_platform(density, platforms_[i]);
        if (i > 0 && !(platforms_[i] > platforms_[i - 1])) {
            throw DomainError("platform grid must be strictly increasing");
        }
    }
    const std::size_t g = platforms_.size();
    std::vector<std::vector<double>> u(g);
    for (std::size_t i = 0; i < g; ++i) u[i] = utilities(density, platforms_[i], loss);

    table_.resize(g * g);
    detail::parallel_for(g, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t j = 0; j < g; ++j) table_[i * g + j] = tally(density.weights(), u[i], u[j], model);
        }
    });
}

std::size_t PlatformGame::index_of(double x) const {
    const auto it = std::lower_bound(platforms_.begin(), platforms_.end(), x);
    if (it == platforms_.end() || *it != x) {
        throw DomainError("platform " + std::to_string(x) + " is not on the platform grid");
    }
    return static_cast<std::size_t>(it - platforms_.begin());
}

std::optional<double> condorcet_winner(const PlatformGame& game) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < game.size(); ++i) {
        bool beaten = false;
        for (std::size_t j = 0; j < game.size() && !beaten; ++j) beaten = game.beats(j, i);
        if (beaten) continue;
        const double d = std::fabs(game.platforms()[i] - game.median());
        if (!best || d < std::fabs(game.platforms()[*best] - game.median())) best = i;
    }
    if (!best) return std::nullopt;
    return game.platforms()[*best];
}

std::optional<double> condorcet_winner(const VoterDensity& density, std::span<const double> platforms,
                                       const LossSpec& loss, const ChoiceModel& model) {
    return condorcet_winner(PlatformGame(density, {platforms.begin(), platforms.end()}, loss, model));
}

namespace {

// Margin of the candidate that moves (1 or 2) when it stands at `mine`.
double own_margin(const PlatformGame& game, int mover, std::size_t mine, std::size_t other) {
    return mover == 1 ? game.outcome(mine, other).margin() : -game.outcome(other, mine).margin();
}

std::size_t best_response(const PlatformGame& game, int mover, std::size_t current, std::size_t other) {
    constexpr double kSame = 1e-12;
    double best = -2.0;
    for (std::size_t i = 0; i < game.size(); ++i) best = std::max(best, own_margin(game, mover, i, other));
    if (own_margin(game, mover, current, other) >= best - kSame) return current;
    for (std::size_t i = 0; i < game.size(); ++i) {
        if (own_margin(game, mover, i, other) >= best - kSame) return i;
    }
    return current;
}

}  // namespace

DynamicsResult best_response_dynamics(const PlatformGame& game, std::pair<double, double> start,
                                      std::size_t max_iters) {
    std::size_t a = game.index_of(start.first);
    std::size_t b = game.index_of(start.second);
    const auto& x = game.platforms();

    std::map<std::tuple<std::size_t, std::size_t, int>, std::size_t> seen;
    std::vector<std::pair<std::size_t, std::size_t>> history;
    int mover = 1;
    int still = 0;  // consecutive turns without a move
    std::size_t moves = 0;
    for (std::size_t step = 0; step < 2 * max_iters + 2; ++step) {
        const auto key = std::make_tuple(a, b, mover);
        if (const auto it = seen.find(key); it != seen.end()) {
            Cycle c;
            std::set<std::size_t> idx;
            for (std::size_t s = it->second; s < history.size(); ++s) {
                c.states.emplace_back(x[history[s].first], x[history[s].second]);
                idx.insert(history[s].first);
                idx.insert(history[s].second);
            }
            for (auto i : idx) c.platforms.push_back(x[i]);
            c.witness = find_cycle_witness(game, c.platforms);
            return c;
        }
        seen.emplace(key, history.size());
        history.emplace_back(a, b);

        const std::size_t next = mover == 1 ? best_response(game, 1, a, b) : best_response(game, 2, b, a);
        const std::size_t& current = mover == 1 ? a : b;
        if (next == current) {
            if (++still == 2) return Converged{x[a], x[b], moves};
        } else {
            if (moves == max_iters) return IterationCap{x[a], x[b]};
            (mover == 1 ? a : b) = next;
            ++moves;
            still = 0;
        }
        mover = 3 - mover;
    }
    return IterationCap{x[a], x[b]};
}

DynamicsResult best_response_dynamics(const VoterDensity& density, std::span<const double> platforms,
                                      const LossSpec& loss, const ChoiceModel& model,
                                      std::pair<double, double> start, std::size_t max_iters) {
    return best_response_dynamics(PlatformGame(density, {platforms.begin(), platforms.end()}, loss, model), start,
                                  max_iters);
}

namespace {

int ordinal(Winner w, int who) {
    if (w == Winner::Tie) return 0;
    return (w == Winner::Cand1) == (who == 1) ? 1 : -1;
}

}  // namespace

std::vector<std::pair<double, double>> pure_equilibria(const PlatformGame& game) {
    const std::size_t g = game.size();
    // Best ordinal outcome available to each candidate against each opponent platform.
    std::vector<int> best1(g, -1), best2(g, -1);
    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = 0; j < g; ++j) {
            const Winner w = game.outcome(i, j).winner;
            best1[j] = std::max(best1[j], ordinal(w, 1));
            best2[i] = std::max(best2[i], ordinal(w, 2));
        }
    }
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = 0; j < g; ++j) {
            const Winner w = game.outcome(i, j).winner;
            if (ordinal(w, 1) == best1[j] && ordinal(w, 2) == best2[i]) {
                out.emplace_back(game.platforms()[i], game.platforms()[j]);
            }
        }
    }
    return out;
}

std::vector<std::pair<double, double>> pure_equilibria(const VoterDensity& density, std::span<const double> platforms,
                                                       const LossSpec& loss, const ChoiceModel& model) {
    return pure_equilibria(PlatformGame(density, {platforms.begin(), platforms.end()}, loss, model));
}

std::optional<CycleWitness> find_cycle_witness(const PlatformGame& game, std::span<const double> among) {
    std::vector<std::size_t> idx;
    if (among.empty()) {
        idx.resize(game.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
    } else {
        for (double p : among) idx.push_back(game.index_of(p));
    }
    const auto& x = game.platforms();
    for (auto l : idx) {
        for (auto r : idx) {
            if (l == r || game.outcome(l, r).winner != Winner::Tie) continue;
            for (auto lp : idx) {
                if (lp != l && lp != r && game.beats(lp, l) && game.beats(r, lp)) return CycleWitness{x[l], x[lp], x[r]};
            }
        }
    }
    return std::nullopt;
}

}  // namespace elab
