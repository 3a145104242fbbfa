"""Greedy word-substitution search over prompt task descriptions."""

from ._lexprompt import (
    BadMaskCount,
    CompletionOracle,
    ConfigError,
    EmptyDescription,
    FillMaskProvider,
    LexpromptError,
    MissingPlaceholder,
    OptimizationParams,
    OracleFailure,
    PromptTemplate,
    Ratio,
    ResponseCache,
    RuleOracle,
    RunAborted,
    StaticFillMaskProvider,
    TaskDescription,
    TaskPool,
    TranscriptOracle,
    Verbalizer,
    evaluate,
    influence,
    optimize,
    replay_trace,
)

__all__ = [
    "BadMaskCount",
    "CompletionOracle",
    "ConfigError",
    "EmptyDescription",
    "FillMaskProvider",
    "LexpromptError",
    "MissingPlaceholder",
    "OptimizationParams",
    "OracleFailure",
    "PromptTemplate",
    "Ratio",
    "ResponseCache",
    "RuleOracle",
    "RunAborted",
    "StaticFillMaskProvider",
    "TaskDescription",
    "TaskPool",
    "TranscriptOracle",
    "Verbalizer",
    "evaluate",
    "influence",
    "optimize",
    "replay_trace",
]
