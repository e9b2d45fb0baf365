#pragma once

#include <string_view>
#include <vector>

#include "elab/policy_space.hpp"

namespace elab {

enum class LossFamily { Linear, Concave, Convex, ReverseS };

/// A loss-function family with its parameters.
///
/// Power families use u(d) = -alpha * d^beta (Linear: beta == 1, Concave:
/// beta > 1, Convex: 0 < beta < 1). ReverseS uses the Gaussian
/// u(d) = alpha * exp(-d^2 / omega): concave below the inflection
/// t = sqrt(omega / 2), convex above it. `beta` is ignored by ReverseS and
/// `omega` by the power families.
struct LossSpec {
    LossFamily family = LossFamily::ReverseS;
    double alpha = 1.0;
    double beta = 1.0;
    double omega = 1.0;

    static LossSpec linear(double alpha = 1.0) { return {LossFamily::Linear, alpha, 1.0, 1.0}; }
    static LossSpec concave(double beta = 2.0, double alpha = 1.0) { return {LossFamily::Concave, alpha, beta, 1.0}; }
    static LossSpec convex(double beta = 0.5, double alpha = 1.0) { return {LossFamily::Convex, alpha, beta, 1.0}; }
    static LossSpec reverse_s(double omega = 1.0, double alpha = 1.0) {
        return {LossFamily::ReverseS, alpha, 1.0, omega};
    }

    /// Throws ConfigError when the parameters violate the family's constraints.
    void validate() const;

    /// Inflection distance of the ReverseS family.
    double inflection() const;
};

std::string_view to_string(LossFamily family);
LossFamily parse_loss_family(std::string_view name);

/// Utility of a candidate at distance `delta` (delta >= 0).
double utility(const LossSpec& spec, double delta);

enum class CurvatureSign { Negative, Zero, Positive };

std::string_view to_string(CurvatureSign sign);

/// Sign of the central second difference u(d-h) - 2u(d) + u(d+h), with
/// |value| <= eps classified as Zero. `eps` defaults to 1e-9 * alpha.
CurvatureSign second_difference_sign(const LossSpec& spec, double delta, double h, double eps = -1.0);

/// Indifference between two candidates: -|u(d1) - u(d2)|. Always <= 0.
double indifference(const LossSpec& spec, double delta1, double delta2);

/// Additive per-issue utility: sum over dimensions of u(|voter_k - candidate_k|).
double issue_based_utility(const LossSpec& spec, const Position& voter, const Position& candidate);

enum class UtilityKind { Spatial, IssueBased };

struct CurveOptions {
    double level_tolerance = 1e-6;   ///< relative to max(1, |level|)
    double radius_tolerance = 1e-10;  ///< radial bisection stopping width
};

/// Samples the level set {p : U(voter, p) = level} of a 2-d utility.
///
/// Points are placed on `samples` equally spaced rays around the voter (so
/// they come out ordered by angle) and located by radial bisection. Returns
/// an empty vector when the level is not reached along every ray.
std::vector<Position> indifference_curve(UtilityKind kind, const LossSpec& spec, const Position& voter, double level,
                                         std::size_t samples, const CurveOptions& options = {});

}  // namespace elab
