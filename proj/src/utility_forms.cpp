#include "elab/utility_forms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "elab/error.hpp"

namespace elab {

void LossSpec::validate() const {
    if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(omega)) {
        throw ConfigError("loss parameters must be finite", "loss");
    }
    if (!(alpha > 0.0)) throw ConfigError("alpha must be positive", "loss.alpha");
    switch (family) {
        case LossFamily::Linear:
            if (beta != 1.0) throw ConfigError("Linear requires beta == 1", "loss.beta");
            break;
        case LossFamily::Concave:
            if (!(beta > 1.0)) throw ConfigError("Concave requires beta > 1", "loss.beta");
            break;
        case LossFamily::Convex:
            if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("Convex requires 0 < beta < 1", "loss.beta");
            break;
        case LossFamily::ReverseS:
            if (!(omega > 0.0)) throw ConfigError("ReverseS requires omega > 0", "loss.omega");
            break;
    }
}

double LossSpec::inflection() const { return std::sqrt(omega / 2.0); }

std::string_view to_string(LossFamily family) {
    switch (family) {
        case LossFamily::Linear: return "Linear";
        case LossFamily::Concave: return "Concave";
        case LossFamily::Convex: return "Convex";
        case LossFamily::ReverseS: return "ReverseS";
    }
    return "?";
}

LossFamily parse_loss_family(std::string_view name) {
    if (name == "Linear") return LossFamily::Linear;
    if (name == "Concave") return LossFamily::Concave;
    if (name == "Convex") return LossFamily::Convex;
    if (name == "ReverseS") return LossFamily::ReverseS;
    throw ConfigError("unknown loss family '" + std::string(name) + "'", "loss.family");
}

std::string_view to_string(CurvatureSign sign) {
    switch (sign) {
        case CurvatureSign::Negative: return "Negative";
        case CurvatureSign::Zero: return "Zero";
        case CurvatureSign::Positive: return "Positive";
    }
    return "?";
}

double utility(const LossSpec& spec, double delta) {
    if (!(delta >= 0.0)) throw DomainError("utility requires a nonnegative distance");
    switch (spec.family) {
        case LossFamily::Linear:
            return -spec.alpha * delta;
        case LossFamily::Concave:
            if (spec.beta == 2.0) return -spec.alpha * delta * delta;
            return -spec.alpha * std::pow(delta, spec.beta);
        case LossFamily::Convex:
            return -spec.alpha * std::pow(delta, spec.beta);
        case LossFamily::ReverseS:
            return spec.alpha * std::exp(-delta * delta / spec.omega);
    }
    return 0.0;
}

CurvatureSign second_difference_sign(const LossSpec& spec, double delta, double h, double eps) {
    if (!(h > 0.0) || !(delta > h)) throw DomainError("second_difference_sign requires delta > h > 0");
    if (eps < 0.0) eps = 1e-9 * spec.alpha;
    const double d2 = utility(spec, delta - h) - 2.0 * utility(spec, delta) + utility(spec, delta + h);
    if (d2 > eps) return CurvatureSign::Positive;
    if (d2 < -eps) return CurvatureSign::Negative;
    return CurvatureSign::Zero;
}

double indifference(const LossSpec& spec, double delta1, double delta2) {
    return -std::fabs(utility(spec, delta1) - utility(spec, delta2));
}

double issue_based_utility(const LossSpec& spec, const Position& voter, const Position& candidate) {
    if (voter.dimension() != candidate.dimension()) throw DomainError("incompatible positions: dimension mismatch");
    double total = 0.0;
    for (std::size_t k = 0; k < voter.dimension(); ++k) total += utility(spec, std::fabs(voter[k] - candidate[k]));
    return total;
}

std::vector<Position> indifference_curve(UtilityKind kind, const LossSpec& spec, const Position& voter, double level,
                                         std::size_t samples, const CurveOptions& options) {
    if (voter.dimension() != 2) throw DomainError("indifference_curve requires a 2-dimensional space");
    if (samples == 0) throw DomainError("indifference_curve requires samples >= 1");

    // Utility along a ray is nonincreasing in the radius for both kinds.
    auto along = [&](double cs, double sn, double r) {
        if (kind == UtilityKind::Spatial) return utility(spec, r);
        return utility(spec, r * std::fabs(cs)) + utility(spec, r * std::fabs(sn));
    };
    const double tol = options.level_tolerance * std::max(1.0, std::fabs(level));

    std::vector<Position> points;
    points.reserve(samples);
    for (std::size_t s = 0; s < samples; ++s) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(s) / static_cast<double>(samples);
        const double cs = std::cos(theta);
        const double sn = std::sin(theta);

        if (along(cs, sn, 0.0) < level - tol) return {};
        double lo = 0.0;
        double hi = 1.0;
        int expansions = 0;
        while (along(cs, sn, hi) > level) {
            lo = hi;
            hi *= 2.0;
            if (++expansions > 200) return {};
        }
        while (hi - lo > options.radius_tolerance * std::max(1.0, hi)) {
            const double mid = 0.5 * (lo + hi);
            if (along(cs, sn, mid) > level) lo = mid;
            else hi = mid;
        }
        const double r = 0.5 * (lo + hi);
        if (std::fabs(along(cs, sn, r) - level) > tol) return {};
        points.emplace_back(std::vector<double>{voter[0] + r * cs, voter[1] + r * sn});
    }
    return points;
}

}  // namespace elab
