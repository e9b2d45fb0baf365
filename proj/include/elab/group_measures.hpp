#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "elab/electorate.hpp"

namespace elab {

/// Counts for one (Voter Group, race) cell. Records with a missing choice in
/// the race are not counted; 'O' votes count toward n_total only.
struct GroupStats {
    int group = 0;
    std::size_t race = 0;  ///< column index in the tabulated CvrTable
    std::string race_id;
    std::uint64_t n_total = 0;
    std::uint64_t n_dem = 0;
    std::uint64_t n_rep = 0;
    std::uint64_t n_abstain = 0;
    std::uint64_t n_other = 0;
};

/// Dense (group, race) table of counts.
class Tabulation {
public:
    Tabulation(std::size_t n_measures, std::vector<std::string> race_ids);

    std::size_t n_measures() const noexcept { return n_measures_; }
    std::size_t n_groups() const noexcept { return n_measures_ + 1; }
    const std::vector<std::string>& race_ids() const noexcept { return race_ids_; }

    /// Cell for (k, race); nullptr when the group has no counted voters there.
    const GroupStats* find(int group, std::size_t race) const;
    GroupStats& cell(int group, std::size_t race);

    /// Nonempty cells ordered by race column, then group.
    std::vector<GroupStats> nonempty() const;

    /// Voters skipped because a measure response was missing.
    std::uint64_t skipped_voters = 0;

private:
    std::size_t n_measures_;
    std::vector<std::string> race_ids_;
    std::vector<GroupStats> cells_;  // race-major
};

/// Counts every record into its (Voter Group, race) cells. Records with a
/// missing measure response have no group and are skipped.
Tabulation tabulate(const CvrTable& table, unsigned threads = 1);

/// N(A) / N. Throws AnalysisError when the cell is empty.
double abstention_rate(const GroupStats& stats);

/// |N(D)/N - N(R)/N|.
double predictability(const GroupStats& stats);

double dem_share(const GroupStats& stats);
double rep_share(const GroupStats& stats);

/// Unweighted mean over the defined values. Throws AnalysisError when none
/// is defined.
double across_race_average(std::span<const std::optional<double>> values);

/// Pr_{k=0}(D) * Pr_{k=n}(R).
double polarization(const GroupStats& group0, const GroupStats& group_n);

/// Polarization per race column; nullopt where an extreme group is empty.
std::vector<std::optional<double>> race_polarization(const Tabulation& tab, std::span<const std::size_t> races);

enum class GroupMeasure { Abstention, Predictability, DemShare };

/// Per-group across-race averages of `measure` over `races` (nullopt where
/// the group is empty in every race). Indexed by k = 0 .. n.
std::vector<std::optional<double>> group_averages(const Tabulation& tab, std::span<const std::size_t> races,
                                                  GroupMeasure measure);

/// The group(s) with the lowest across-race average predictability over the
/// given two-party races. Returns the two lowest when they lie within
/// `tolerance` of each other.
std::vector<int> moderate_groups(const Tabulation& tab, std::span<const std::size_t> races, double tolerance = 0.02);

enum class FlipOutcome { DemShare, AbstentionRate };

/// Effect of flipping measure `measure` (0-based) from the Republican to the
/// Democratic side, per group k = 0 .. n-1: the mean over subgroup pairs
/// (sg-, sg+) with sg- in k of outcome(sg-) - outcome(sg+). A subgroup's
/// outcome is its across-race average over `races`. nullopt where no pair
/// in k has both sides populated. Throws AnalysisError if no pair anywhere.
std::vector<std::optional<double>> flip_effect(const CvrTable& table, std::size_t measure, FlipOutcome outcome,
                                               std::span<const std::size_t> races);

struct Correlation {
    double r = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

/// Pearson correlation with a two-sided t-test p-value.
Correlation indifference_correlation(std::span<const double> x, std::span<const double> y);

/// Spearman rank correlation (average ranks for ties).
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace elab
