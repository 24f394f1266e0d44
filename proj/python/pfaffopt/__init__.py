"""Optimization with holonomic and Pfaff constraints.

Problems are JSON files (or the equivalent dicts); every run returns the same
report the command-line tool prints.
"""

from pathlib import Path

from ._core import (
    Error,
    Expression,
    InputError,
    SingularPathError,
    SolverError,
    dual,
    frobenius,
    solve,
    sweep,
    to_csv,
    validate,
)
from ._core import verify as _verify

_BUNDLED_CORPUS = Path(__file__).with_name("corpus")


def verify(corpus=None, seed=42, properties=True):
    """Run the regression corpus; defaults to the corpus shipped with the package."""
    if corpus is None and _BUNDLED_CORPUS.is_dir():
        corpus = _BUNDLED_CORPUS
    return _verify(None if corpus is None else str(corpus), seed, properties)


__all__ = [
    "Error",
    "Expression",
    "InputError",
    "SingularPathError",
    "SolverError",
    "dual",
    "frobenius",
    "solve",
    "sweep",
    "to_csv",
    "validate",
    "verify",
]
