"""Two-fold singularities of piecewise-smooth systems and their regularizations."""

import json

from ._core import (
    DegenerateError,
    EvalError,
    InputError,
    NumericalError,
    ParseError,
    System,
    canonical_coefficients,
    critical_manifold,
    example_system,
    folded_points,
    load_system,
    run_cli,
    simulate,
)
from . import _core

__all__ = [
    "DegenerateError",
    "EvalError",
    "InputError",
    "NumericalError",
    "ParseError",
    "System",
    "canonical_coefficients",
    "classify",
    "critical_manifold",
    "example_system",
    "fit",
    "folded_points",
    "load_system",
    "run_cli",
    "simulate",
]


def classify(a1, a2, b1, b2, alpha, sigmoid="tanh"):
    """Two-fold flavour and folded-point reports, same document as `pwsfold classify`."""
    return json.loads(_core.classify_json(a1, a2, b1, b2, alpha, sigmoid))


def fit(a1, a2, b1, b2, alpha, sigmoid="tanh"):
    """Fitted canonical coefficients next to the closed form, same document as `pwsfold fit`."""
    return json.loads(_core.fit_json(a1, a2, b1, b2, alpha, sigmoid))
