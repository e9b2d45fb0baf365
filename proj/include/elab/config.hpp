#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "elab/choice_model.hpp"
#include "elab/competition.hpp"
#include "elab/electorate.hpp"
#include "elab/regression.hpp"
#include "elab/utility_forms.hpp"

namespace elab {

struct AnalysisFlags {
    bool case1 = true;
    bool case2 = true;
    bool equilibrium = false;
    bool classify = false;
    double moderate_tolerance = 0.02;
    /// Piecewise breakpoint; the mean polarization when absent.
    std::optional<double> threshold;
};

struct EquilibriumConfig {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t voters = 201;  ///< density grid points
    std::vector<VoterDensity::Bump> bumps{{0.5, 0.15, 1.0}};
    std::size_t platforms = 201;
    /// Starting platforms of the dynamics; the density median for both when absent.
    std::optional<std::pair<double, double>> start;
    std::size_t max_iters = 1000;

    VoterDensity density() const;
};

struct ClassifyConfig {
    Dimensionality dim = Dimensionality::Uni;
    /// CSV with header `proxy,indifference`; when absent, moderate-group
    /// abstention against race polarization from the CVR is used.
    std::optional<std::filesystem::path> points_path;
};

struct ExperimentConfig {
    /// Required by every subcommand that draws random numbers.
    std::optional<std::uint64_t> seed;
    bool has_electorate = false;
    ElectorateSpec electorate;
    std::vector<RaceSpec> races;
    LossSpec loss;
    ChoiceModel choice;
    std::optional<ResponseModel> responses;
    AnalysisFlags analysis;
    EquilibriumConfig equilibrium;
    ClassifyConfig classify;
    std::filesystem::path output_dir = "out";
    std::optional<std::filesystem::path> cvr_path;

    /// Path of the CVR file read by analyses and written by `simulate`.
    std::filesystem::path cvr_file() const { return cvr_path ? *cvr_path : output_dir / "cvr.csv"; }
};

/// Parses a JSON document (text) with `KEY=VALUE` dotted overrides applied
/// first. Values parse as JSON, falling back to a plain string. Throws
/// ConfigError naming the offending key. Relative paths resolve against
/// `base_dir`.
ExperimentConfig parse_config(const std::string& json_text, const std::vector<std::string>& overrides = {},
                              const std::filesystem::path& base_dir = {});

/// Reads and parses a config file; an empty path means an empty document.
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace elab
