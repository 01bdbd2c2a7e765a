"""Limit-state functions. Failure is always the event ``Y < 0``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import expression
from .distributions import RandomVector, make_distribution
from .errors import DimensionMismatch, EvalError, UnknownProblem


@dataclass(frozen=True)
class LimitState:
    """A deterministic map from physical inputs to the response ``Y``.

    ``batch`` takes an array of shape ``(k, n)`` and returns ``k`` responses.
    ``undefined_is_failure`` marks models whose domain ends inside the failure
    region; MCS then counts undefined samples as failures instead of raising.
    ``domain`` optionally returns the mask of rows where ``batch`` is defined.
    """

    batch: Callable[[np.ndarray], np.ndarray]
    input_names: tuple[str, ...]
    source: str = ""
    undefined_is_failure: bool = False
    domain: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @property
    def n(self) -> int:
        return len(self.input_names)

    def evaluate(self, x_vec) -> float:
        x = np.asarray(x_vec, dtype=float)
        if x.shape != (self.n,):
            raise DimensionMismatch(f"expected {self.n} inputs, got shape {x.shape}")
        return float(self.batch(x[None, :])[0])

    def evaluate_batch(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n:
            raise DimensionMismatch(f"expected {self.n} inputs, got {X.shape[1]}")
        return np.asarray(self.batch(X), dtype=float).reshape(X.shape[0])


def parse_expression(text: str, input_names) -> LimitState:
    names = tuple(input_names)
    tree = expression.parse(text, names)

    def batch(X):
        env = {name: X[:, i] for i, name in enumerate(names)}
        return np.broadcast_to(expression.evaluate(tree, env), (X.shape[0],)).astype(float)

    return LimitState(batch, names, source=text)


def evaluate(ls: LimitState, x_vec) -> float:
    return ls.evaluate(x_vec)


EXAMPLE1_EXPRESSION = "0.5*(x+4)^0.5 - 0.58"


def _example1(X):
    shifted = X[:, 0] + 4.0
    if np.any(shifted < 0):
        raise EvalError("sqrt of a negative number", int(np.flatnonzero(shifted < 0)[0]))
    return 0.5 * np.sqrt(shifted) - 0.58


def _speed_reducer(X):
    # inputs in MPa, mm, mm, N, N*m; evaluated in Pa
    s_y = X[:, 0] * 1e6
    d = X[:, 1] * 1e-3
    l = X[:, 2] * 1e-3
    p = X[:, 3]
    t = X[:, 4]
    return s_y - 16.0 / (math.pi * d**3) * np.sqrt(4.0 * p**2 * l**2 + 3.0 * t**2)


def _example1_problem():
    rv = RandomVector((make_distribution("normal", 0.0, 1.0),), ("x",))
    # x < -4 lies beyond the failure onset at x = -2.6544
    return rv, LimitState(_example1, ("x",), source=EXAMPLE1_EXPRESSION, undefined_is_failure=True,
                          domain=lambda X: X[:, 0] >= -4.0)


def _speed_reducer_problem():
    names = ("S_y", "d", "l", "P", "T")
    rv = RandomVector(
        (
            make_distribution("lognormal", 250.0, 30.0),
            make_distribution("normal", 40.0, 0.0001),
            make_distribution("normal", 400.0, 0.0001),
            make_distribution("normal", 1780.0, 363.0),
            make_distribution("normal", 430.0, 40.0),
        ),
        names,
    )
    return rv, LimitState(_speed_reducer, names, source="S_y - 16/(pi d^3) sqrt(4 P^2 l^2 + 3 T^2) [SI]")


# bracket stand-in: tip deflection of a linear-elastic part scales as F/E;
# the constant puts the mean deflection at 1 mm, the allowable is 1.36 mm
BRACKET_DEFLECTION_AT_MEAN = 260.0 / 504000.0  # mm GPa m / N
BRACKET_ALLOWABLE = 1.36  # mm


def _bracket_standin(X):
    return BRACKET_ALLOWABLE - BRACKET_DEFLECTION_AT_MEAN * (-X[:, 1]) / X[:, 0]


def _bracket_standin_problem():
    names = ("E", "F")
    rv = RandomVector((make_distribution("lognormal", 260.0, 26.0), make_distribution("normal", -504000.0, 16500.0)),
                      names)
    return rv, LimitState(_bracket_standin, names, source="1.36 - (260/504000) * (-F) / E")


BUILTINS = {
    "example1": _example1_problem,
    "speed_reducer": _speed_reducer_problem,
    "bracket_standin": _bracket_standin_problem,
}


def builtin_problem(name: str) -> tuple[RandomVector, LimitState]:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise UnknownProblem(f"unknown built-in problem {name!r}; choose from {sorted(BUILTINS)}") from None
