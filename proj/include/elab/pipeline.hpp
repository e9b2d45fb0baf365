#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "elab/config.hpp"
#include "elab/cvr.hpp"
#include "elab/group_measures.hpp"
#include "elab/regression.hpp"

namespace elab {

/// Simulates the configured election in memory.
CvrTable simulate(const ExperimentConfig& config, unsigned threads = 1);

/// Race columns split by contest type. Races named in the config use their
/// parties; others count as two-party when both D and R votes appear.
struct RaceSplit {
    std::vector<std::size_t> same_party;
    std::vector<std::size_t> two_party;
};

RaceSplit split_races(const ExperimentConfig& config, const CvrTable& table);

struct Case1Result {
    std::vector<std::optional<double>> abstention_by_group;  ///< k = 0 .. n
    double spearman = 0.0;  ///< rank correlation of group abstention with k
};

/// Abstention by Voter Group over same-party races.
Case1Result analyze_case1(const Tabulation& tab, std::span<const std::size_t> races);

struct Case2Result {
    std::vector<std::size_t> races;  ///< two-party races with defined polarization
    std::vector<double> pol;
    std::vector<int> moderates;
    std::vector<double> moderate_abstention;  ///< per race, moderate groups pooled
    std::vector<double> moderate_predictability;
    std::vector<std::optional<double>> group_abstention;  ///< across-race averages, k = 0 .. n
    std::vector<std::optional<double>> group_predictability;
    Correlation coupling;  ///< group abstention vs group predictability
    std::vector<std::string> excluded;  ///< races dropped for an empty extreme group
};

/// Polarization, moderates and their per-race indifference measures over
/// two-party races. Throws AnalysisError when no race has a defined
/// polarization.
Case2Result analyze_case2(const Tabulation& tab, std::span<const std::size_t> races, double moderate_tolerance);

struct NamedRegression {
    std::string model;
    RegressionResult result;
};

/// Piecewise and quadratic polarization fits on the moderate groups, plus a
/// voter fixed-effects quadratic on individual abstention.
std::vector<NamedRegression> fit_case2(const CvrTable& table, const Case2Result& case2,
                                       std::optional<double> threshold);

/// Formats a double with round-trip precision.
std::string format_number(double x);

/// Runs the command line. Returns the process exit code: 0 success,
/// 1 configuration error, 2 data error, 3 analysis precondition failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace elab
