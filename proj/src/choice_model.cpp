#include "elab/choice_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "elab/error.hpp"

namespace elab {

void ChoiceModel::validate() const {
    if (!std::isfinite(cost) || cost < 0.0) throw ConfigError("cost must be finite and >= 0", "choice.cost");
    if (mode == DecisionMode::Probabilistic && !(noise_scale > 0.0 && std::isfinite(noise_scale))) {
        throw ConfigError("noise scale must be > 0", "choice.scale");
    }
    if (abstention == AbstentionKind::Alienation) {
        if (!std::isfinite(alienation.threshold)) {
            throw ConfigError("alienation threshold must be finite", "choice.alienation_threshold");
        }
        if (!(alienation.slope > 0.0 && std::isfinite(alienation.slope))) {
            throw ConfigError("alienation slope must be > 0", "choice.alienation_slope");
        }
    }
    if (abstention == AbstentionKind::ExpressiveConstant && !std::isfinite(expressive_a)) {
        throw ConfigError("expressive payoff must be finite", "choice.expressive_a");
    }
}

std::string_view to_string(DecisionMode mode) {
    return mode == DecisionMode::Deterministic ? "Deterministic" : "Probabilistic";
}

std::string_view to_string(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::UniformLinear: return "UniformLinear";
        case NoiseKind::Normal: return "Normal";
        case NoiseKind::Logistic: return "Logistic";
    }
    return "?";
}

std::string_view to_string(AbstentionKind kind) {
    switch (kind) {
        case AbstentionKind::Stakes: return "Stakes";
        case AbstentionKind::Alienation: return "Alienation";
        case AbstentionKind::ExpressiveConstant: return "ExpressiveConstant";
    }
    return "?";
}

std::string_view to_string(Choice choice) {
    switch (choice) {
        case Choice::VoteC1: return "VoteC1";
        case Choice::VoteC2: return "VoteC2";
        case Choice::Abstain: return "Abstain";
    }
    return "?";
}

DecisionMode parse_decision_mode(std::string_view name) {
    if (name == "Deterministic") return DecisionMode::Deterministic;
    if (name == "Probabilistic") return DecisionMode::Probabilistic;
    throw ConfigError("unknown decision mode '" + std::string(name) + "'", "choice.mode");
}

NoiseKind parse_noise_kind(std::string_view name) {
    if (name == "UniformLinear") return NoiseKind::UniformLinear;
    if (name == "Normal") return NoiseKind::Normal;
    if (name == "Logistic") return NoiseKind::Logistic;
    throw ConfigError("unknown noise kind '" + std::string(name) + "'", "choice.noise");
}

AbstentionKind parse_abstention_kind(std::string_view name) {
    if (name == "Stakes") return AbstentionKind::Stakes;
    if (name == "Alienation") return AbstentionKind::Alienation;
    if (name == "ExpressiveConstant") return AbstentionKind::ExpressiveConstant;
    throw ConfigError("unknown abstention formulation '" + std::string(name) + "'", "choice.abstention");
}

double noise_cdf(NoiseKind kind, double scale, double x) {
    switch (kind) {
        case NoiseKind::UniformLinear:
            return std::clamp((x + scale) / (2.0 * scale), 0.0, 1.0);
        case NoiseKind::Normal:
            return 0.5 * std::erfc(-x / (scale * std::numbers::sqrt2));
        case NoiseKind::Logistic:
            return 1.0 / (1.0 + std::exp(-x / scale));
    }
    return 0.5;
}

Choice decide_deterministic(const ChoiceModel& model, double u1, double u2) {
    switch (model.abstention) {
        case AbstentionKind::Stakes: {
            const double threshold = 2.0 * model.cost;
            if (u1 - u2 > threshold) return Choice::VoteC1;
            if (u2 - u1 > threshold) return Choice::VoteC2;
            return Choice::Abstain;
        }
        case AbstentionKind::Alienation:
            if (std::max(u1, u2) <= model.alienation.threshold) return Choice::Abstain;
            return u1 >= u2 ? Choice::VoteC1 : Choice::VoteC2;
        case AbstentionKind::ExpressiveConstant: {
            const double v1 = u1 - model.cost;
            const double v2 = u2 - model.cost;
            if (model.expressive_a >= std::max(v1, v2)) return Choice::Abstain;
            return v1 >= v2 ? Choice::VoteC1 : Choice::VoteC2;
        }
    }
    return Choice::Abstain;
}

namespace {

// P(c1) = 1 - Phi(u2 - u1 + 2c) written as Phi(u1 - u2 - 2c), so that
// swapping the candidates swaps the two probabilities bit for bit.
ChoiceDistribution stakes_distribution(const ChoiceModel& model, double u1, double u2) {
    const double two_c = 2.0 * model.cost;
    ChoiceDistribution d;
    d.p_c1 = noise_cdf(model.noise, model.noise_scale, (u1 - u2) - two_c);
    d.p_c2 = noise_cdf(model.noise, model.noise_scale, (u2 - u1) - two_c);
    d.p_abstain = std::max(0.0, 1.0 - (d.p_c1 + d.p_c2));
    return d;
}

}  // namespace

ChoiceDistribution decide_probabilistic(const ChoiceModel& model, double u1, double u2) {
    switch (model.abstention) {
        case AbstentionKind::Stakes:
            return stakes_distribution(model, u1, u2);
        case AbstentionKind::Alienation: {
            const double z = (std::max(u1, u2) - model.alienation.threshold) / model.alienation.slope;
            const double p_abstain = 1.0 / (1.0 + std::exp(z));
            const ChoiceDistribution stakes = stakes_distribution(model, u1, u2);
            const double voting = stakes.p_c1 + stakes.p_c2;
            ChoiceDistribution d;
            d.p_abstain = p_abstain;
            if (voting > 0.0) {
                d.p_c1 = (1.0 - p_abstain) * (stakes.p_c1 / voting);
                d.p_c2 = (1.0 - p_abstain) * (stakes.p_c2 / voting);
            } else {
                d.p_c1 = d.p_c2 = 0.5 * (1.0 - p_abstain);
            }
            return d;
        }
        case AbstentionKind::ExpressiveConstant: {
            // Independent extreme-value shocks on the three payoffs: multinomial logit.
            const double s = model.noise_scale;
            const double v1 = u1 - model.cost;
            const double v2 = u2 - model.cost;
            const double top = std::max({v1, v2, model.expressive_a});
            const double e1 = std::exp((v1 - top) / s);
            const double e2 = std::exp((v2 - top) / s);
            const double ea = std::exp((model.expressive_a - top) / s);
            const double z = (e1 + e2) + ea;
            return {e1 / z, e2 / z, ea / z};
        }
    }
    return {};
}

double abstention_payoff(double u1, double u2, AbstentionVariant variant) {
    return variant == AbstentionVariant::Lottery ? 0.5 * (u1 + u2) : std::min(u1, u2);
}

}  // namespace elab
