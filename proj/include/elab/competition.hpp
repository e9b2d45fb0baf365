#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "elab/choice_model.hpp"
#include "elab/utility_forms.hpp"

namespace elab {

inline constexpr double kTieTolerance = 1e-10;

/// Discrete voter density on a strictly increasing 1-d grid. Weights are
/// normalized on construction.
class VoterDensity {
public:
    VoterDensity(std::vector<double> grid, std::vector<double> weights);

    /// n cell centres of [lo, hi] with equal weight.
    static VoterDensity uniform(double lo, double hi, std::size_t n);

    struct Bump {
        double mean;
        double sd;
        double weight;
    };
    /// Mixture of normal bumps evaluated at n evenly spaced points of [lo, hi].
    static VoterDensity mixture(double lo, double hi, std::size_t n, std::span<const Bump> bumps);

    const std::vector<double>& grid() const noexcept { return grid_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return grid_.size(); }
    double lo() const noexcept { return grid_.front(); }
    double hi() const noexcept { return grid_.back(); }

    /// Smallest grid point with cumulative weight >= 1/2.
    double median() const;

private:
    std::vector<double> grid_;
    std::vector<double> weights_;
};

enum class Winner { Cand1, Cand2, Tie };

std::string_view to_string(Winner winner);

struct ContestOutcome {
    double share1 = 0.0;
    double share2 = 0.0;
    double abstain_share = 0.0;
    Winner winner = Winner::Tie;

    double margin() const noexcept { return share1 - share2; }
};

/// Vote shares when candidate 1 stands at p1 and candidate 2 at p2, from
/// evaluating the choice rule at every grid voter.
ContestOutcome contest(const VoterDensity& density, double p1, double p2, const LossSpec& loss,
                       const ChoiceModel& model);

/// n evenly spaced platforms over the density span (201 by default).
std::vector<double> default_platform_grid(const VoterDensity& density, std::size_t n = 201);

/// All pairwise contests over a platform grid, computed once.
class PlatformGame {
public:
    PlatformGame(const VoterDensity& density, std::vector<double> platforms, const LossSpec& loss,
                 const ChoiceModel& model, unsigned threads = 1);

    std::size_t size() const noexcept { return platforms_.size(); }
    const std::vector<double>& platforms() const noexcept { return platforms_; }
    double median() const noexcept { return median_; }

    /// Outcome with candidate 1 at platforms()[i] and candidate 2 at platforms()[j].
    const ContestOutcome& outcome(std::size_t i, std::size_t j) const { return table_[i * size() + j]; }

    /// Does platform i beat platform j head to head?
    bool beats(std::size_t i, std::size_t j) const { return outcome(i, j).winner == Winner::Cand1; }

    /// Index of a platform; throws DomainError when x is not on the grid.
    std::size_t index_of(double x) const;

private:
    std::vector<double> platforms_;
    std::vector<ContestOutcome> table_;
    double median_;
};

/// The unbeaten platform nearest the density median, if any.
std::optional<double> condorcet_winner(const PlatformGame& game);
std::optional<double> condorcet_winner(const VoterDensity& density, std::span<const double> platforms,
                                       const LossSpec& loss, const ChoiceModel& model);

struct Converged {
    double p1;
    double p2;
    std::size_t iterations;  ///< platform changes made before the fixed point
};

/// Three platforms with x_left tying x_right, x_left_prime beating x_left and
/// x_right beating x_left_prime.
struct CycleWitness {
    double x_left;
    double x_left_prime;
    double x_right;
};

struct Cycle {
    std::vector<std::pair<double, double>> states;  ///< (p1, p2) around the cycle
    std::vector<double> platforms;                  ///< distinct platforms in the cycle, ascending
    std::optional<CycleWitness> witness;            ///< found among `platforms`
};

struct IterationCap {
    double p1;
    double p2;
};

using DynamicsResult = std::variant<Converged, Cycle, IterationCap>;

/// Alternating exact best responses, candidate 1 first. A candidate keeps its
/// platform when it is among the margin maximizers, otherwise takes the
/// lowest-index maximizer.
DynamicsResult best_response_dynamics(const PlatformGame& game, std::pair<double, double> start,
                                      std::size_t max_iters = 1000);
DynamicsResult best_response_dynamics(const VoterDensity& density, std::span<const double> platforms,
                                      const LossSpec& loss, const ChoiceModel& model,
                                      std::pair<double, double> start, std::size_t max_iters = 1000);

/// Pairs where neither candidate has a unilateral deviation that improves its
/// win/tie/lose outcome.
std::vector<std::pair<double, double>> pure_equilibria(const PlatformGame& game);
std::vector<std::pair<double, double>> pure_equilibria(const VoterDensity& density, std::span<const double> platforms,
                                                       const LossSpec& loss, const ChoiceModel& model);

/// Searches the given platforms (all of the game's platforms when empty) for
/// a tie-then-overturn triple.
std::optional<CycleWitness> find_cycle_witness(const PlatformGame& game, std::span<const double> among = {});

}  // namespace elab
