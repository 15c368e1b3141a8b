"""Spatio-temporal matrix recovery with latent factor analysis."""

from ._core import (
    CoordinateSet,
    DivergenceError,
    EntrySet,
    Error,
    EvalRecord,
    FactorModel,
    ObservedMatrix,
    ParameterError,
    SynthSpec,
    TrainConfig,
    TrainResult,
    generate,
    rmse,
    smoke_dataset,
    split_by_sampling_rate,
    sweep_sampling,
    train,
)

__all__ = [
    "CoordinateSet",
    "DivergenceError",
    "EntrySet",
    "Error",
    "EvalRecord",
    "FactorModel",
    "ObservedMatrix",
    "ParameterError",
    "SynthSpec",
    "TrainConfig",
    "TrainResult",
    "generate",
    "rmse",
    "smoke_dataset",
    "split_by_sampling_rate",
    "sweep_sampling",
    "train",
]
