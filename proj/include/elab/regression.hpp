#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "elab/utility_forms.hpp"

namespace elab {

enum class FixedEffects { None, Voter, Race };

std::string_view to_string(FixedEffects fe);

struct RegressionResult {
    std::vector<std::string> names;
    std::vector<double> coefficients;
    std::vector<double> standard_errors;
    double r_squared = 0.0;
    std::size_t n_obs = 0;
    FixedEffects fe_absorbed = FixedEffects::None;

    /// Coefficient / standard error by term name; throws DomainError if absent.
    double coef(std::string_view name) const;
    double se(std::string_view name) const;
};

/// Design matrix with named columns. Include an "const" column of ones for
/// an intercept.
struct Design {
    std::vector<std::string> names;
    Eigen::MatrixXd x;
};

struct OlsOptions {
    /// Degrees of freedom already consumed outside the design (absorbed fixed effects).
    std::size_t absorbed_dof = 0;
    /// Relative pivot tolerance of the rank-revealing QR.
    double rank_tolerance = 1e-10;
    /// R^2 is computed around the mean when true, around zero otherwise.
    bool centered_r2 = true;
};

/// Least squares via column-pivoted Householder QR with classical
/// (homoskedastic) standard errors. Throws AnalysisError naming the
/// collinear columns on rank deficiency, or when n_obs <= n_params.
RegressionResult ols(std::span<const double> y, const Design& design, const OlsOptions& options = {});

/// Two independent fits of y on (const, pol): races with pol <= threshold
/// ("low") and pol > threshold ("high").
std::pair<RegressionResult, RegressionResult> piecewise_polarization(std::span<const double> y,
                                                                     std::span<const double> pol, double threshold);

/// Unweighted mean, the default piecewise threshold.
double mean_threshold(std::span<const double> pol);

/// y on (pol, pol^2), with an intercept when fe == None, or after
/// within-unit demeaning when fe == Voter (then `units` gives each
/// observation's unit id and every unit needs >= 2 observations).
RegressionResult quadratic_polarization(std::span<const double> y, std::span<const double> pol, FixedEffects fe,
                                        std::span<const std::uint64_t> units = {});

enum class TrendLabel { Constant, Decreasing, Increasing, UShaped };
enum class CaseSetting { Case1, Case2 };
enum class Dimensionality { Uni, Multi };

std::string_view to_string(TrendLabel label);
std::string_view to_string(CaseSetting setting);
std::string_view to_string(Dimensionality dim);

/// Predicted trend of voter indifference as distance to both candidates grows.
/// Multi-dimensional power families need `beta`.
TrendLabel predict_trend(LossFamily family, CaseSetting setting, Dimensionality dim,
                         std::optional<double> beta = std::nullopt);

/// One enumerated row of the prediction table.
struct TrendRow {
    LossFamily family;
    std::optional<double> beta;
    CaseSetting setting;
    Dimensionality dim;
    TrendLabel label;
};

/// The full prediction grid over families, both settings and both dimensionalities.
std::vector<TrendRow> trend_table();

struct FormPoint {
    double proxy;         ///< distance to both candidates (or a monotone proxy)
    double indifference;  ///< an indifference measure; larger = more indifferent
};

/// A loss family consistent with an observed trend, with a note on the
/// parameter range or branch that produces it.
struct FamilyMatch {
    LossFamily family;
    std::string note;
};

struct Classification {
    TrendLabel label;
    std::vector<FamilyMatch> families;
    RegressionResult low;
    RegressionResult high;
    RegressionResult quadratic;

    bool contains(LossFamily family) const;
};

struct ClassifyOptions {
    Dimensionality dim = Dimensionality::Uni;
    double se_multiple = 2.0;    ///< slopes within this many SEs of zero are flat
    double quad_se_multiple = 1.0;  ///< a U needs the squared term this many SEs above zero
    /// A U needs both half slopes this many SEs from zero. Stricter than
    /// se_multiple: the halves share the median point, and two 2-SE tests
    /// passing together on pure noise is not rare enough.
    double u_se_multiple = 2.5;
};

/// Labels the trend of indifference in the proxy and lists the families
/// consistent with it.
Classification classify_form(std::span<const FormPoint> points, const ClassifyOptions& options = {});

/// Families whose predicted trend (including a ReverseS curve observed on
/// one side of its inflection) matches `label`.
std::vector<FamilyMatch> consistent_families(TrendLabel label, Dimensionality dim);

}  // namespace elab
