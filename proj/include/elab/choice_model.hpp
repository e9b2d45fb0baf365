#pragma once

#include <string_view>

namespace elab {

enum class DecisionMode { Deterministic, Probabilistic };

/// Distribution of the composite shock eps1 - eps2, parameterized directly.
enum class NoiseKind { UniformLinear, Normal, Logistic };

enum class AbstentionKind { Stakes, Alienation, ExpressiveConstant };

/// Logistic link mapping the preferred candidate's utility to abstention.
struct AlienationLink {
    double threshold = 0.0;
    double slope = 1.0;
};

/// Vote/abstain decision rule.
///
/// `cost` is the per-vote cost c; the Stakes rule compares net utility
/// against 2c (the pivotal-payoff threshold). A rule stated with threshold c
/// is obtained by passing cost = c / 2.
struct ChoiceModel {
    DecisionMode mode = DecisionMode::Deterministic;
    double cost = 0.0;
    NoiseKind noise = NoiseKind::Normal;
    double noise_scale = 1.0;
    AbstentionKind abstention = AbstentionKind::Stakes;
    AlienationLink alienation{};
    double expressive_a = 0.0;

    void validate() const;
};

enum class Choice { VoteC1, VoteC2, Abstain };

struct ChoiceDistribution {
    double p_c1 = 0.0;
    double p_c2 = 0.0;
    double p_abstain = 0.0;
};

enum class AbstentionVariant { Lottery, Pessimistic };

std::string_view to_string(DecisionMode mode);
std::string_view to_string(NoiseKind kind);
std::string_view to_string(AbstentionKind kind);
std::string_view to_string(Choice choice);
DecisionMode parse_decision_mode(std::string_view name);
NoiseKind parse_noise_kind(std::string_view name);
AbstentionKind parse_abstention_kind(std::string_view name);

/// CDF of the composite shock with scale `scale` evaluated at `x`.
double noise_cdf(NoiseKind kind, double scale, double x);

/// Deterministic rule. Ties resolve to Abstain over a vote, and to VoteC1
/// over VoteC2.
Choice decide_deterministic(const ChoiceModel& model, double u1, double u2);

/// Choice probabilities. Exactly symmetric under swapping (u1, u2).
ChoiceDistribution decide_probabilistic(const ChoiceModel& model, double u1, double u2);

/// Payoff of abstaining: the equal-chance lottery or the worse candidate.
double abstention_payoff(double u1, double u2, AbstentionVariant variant);

}  // namespace elab
