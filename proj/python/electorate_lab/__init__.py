"""Spatial voting models: utility forms, choice rules, classification and platform competition."""

from ._elab import (
    AbstentionKind,
    AnalysisError,
    CaseSetting,
    Choice,
    ChoiceModel,
    ConfigError,
    DataError,
    DecisionMode,
    Dimensionality,
    DomainError,
    LossFamily,
    LossSpec,
    NoiseKind,
    TrendLabel,
    VoterDensity,
    best_response_dynamics,
    classify_form,
    condorcet_winner,
    contest,
    decide_deterministic,
    decide_probabilistic,
    default_platform_grid,
    distance,
    indifference,
    ols,
    predict_trend,
    pure_equilibria,
    run_cli,
    utility,
)

__version__ = "0.1.0"
