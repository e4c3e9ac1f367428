"""q-deformed Drinfeld-Sokolov reduction for matrices of complex size."""

from .errors import (
    ConfigError,
    ConsistencyError,
    CutoffExceeded,
    DegreeMismatch,
    EmptyWindow,
    NonGenericParameter,
    QdsError,
    ShapeError,
    TruncationError,
    ZeroLambda,
)
from .laurent import DEFAULT_LAMBDA, DEFAULT_Q, LaurentSeries

__all__ = [
    "ConfigError",
    "ConsistencyError",
    "CutoffExceeded",
    "DegreeMismatch",
    "EmptyWindow",
    "NonGenericParameter",
    "QdsError",
    "ShapeError",
    "TruncationError",
    "ZeroLambda",
    "DEFAULT_LAMBDA",
    "DEFAULT_Q",
    "LaurentSeries",
]
