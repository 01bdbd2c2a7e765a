"""Seeded Monte Carlo reference estimators.

Samples are drawn in fixed chunks of ``CHUNK`` rows. Chunk ``j`` of a run with
seed ``s`` uses a Philox counter-based generator keyed on ``(s, j)``, so the
stream for a given sample index never depends on how chunks are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._threads import ordered_map
from .distributions import RandomVector
from .errors import EvalError
from .limit_state import LimitState

CHUNK = 1 << 16
MIN_SAMPLES = 10_000


@dataclass(frozen=True)
class McsResult:
    pf_hat: float
    n_samples: int
    n_failures: int
    standard_error: float
    seed: int

    def to_dict(self) -> dict:
        return {
            "pf_hat": self.pf_hat,
            "n_samples": self.n_samples,
            "n_failures": self.n_failures,
            "standard_error": self.standard_error,
            "seed": self.seed,
        }


def chunk_generator(seed: int, chunk: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[int(seed) & (2**64 - 1), (int(stream) << 40) | int(chunk)]))


def _chunks(n):
    return [(j, j * CHUNK, min(CHUNK, n - j * CHUNK)) for j in range(math.ceil(n / CHUNK))]


def _result(n_fail, n, seed):
    p = n_fail / n
    return McsResult(p, n, n_fail, math.sqrt(p * (1.0 - p) / n), seed)


def _check_n(n):
    n = int(n)
    if n < MIN_SAMPLES:
        raise ValueError(f"MCS needs at least {MIN_SAMPLES} samples, got {n}")
    return n


def _count_failures(ls: LimitState, x: np.ndarray, offset: int) -> int:
    try:
        return int(np.count_nonzero(ls.evaluate_batch(x) < 0.0))
    except EvalError as exc:
        if not ls.undefined_is_failure:
            raise EvalError(str(exc).split(" (sample")[0], None if exc.index is None else offset + exc.index) from exc
    # undefined samples count as failures
    if ls.domain is not None:
        ok = np.asarray(ls.domain(x), dtype=bool)
        return int(np.count_nonzero(~ok)) + int(np.count_nonzero(ls.evaluate_batch(x[ok]) < 0.0))
    fails = 0
    for row in x:
        try:
            fails += ls.evaluate(row) < 0.0
        except EvalError:
            fails += 1
    return fails


def mcs_pf(ls: LimitState, rv: RandomVector, n: int, seed: int, threads: Optional[int] = None) -> McsResult:
    """Aleatory-only estimate of ``P[g(X) < 0]``."""
    n = _check_n(n)

    def run(chunk):
        j, offset, size = chunk
        u = chunk_generator(seed, j).standard_normal((size, rv.n))
        return _count_failures(ls, rv.from_standard_normal(u), offset)

    return _result(sum(ordered_map(run, _chunks(n), threads)), n, seed)


def mcs_pf_epistemic(gp, rv: RandomVector, y: float, n: int, seed: int, threads: Optional[int] = None) -> McsResult:
    """Estimate of ``P[mu(X) + U_Y*sigma(X) < y]`` with ``U_Y ~ N(0, 1)`` independent of ``X``."""
    n = _check_n(n)

    def run(chunk):
        j, _, size = chunk
        u = chunk_generator(seed, j).standard_normal((size, rv.n + 1))
        mu, sigma = gp.predict(rv.from_standard_normal(u[:, :-1]))
        return int(np.count_nonzero(mu + u[:, -1] * sigma < y))

    return _result(sum(ordered_map(run, _chunks(n), threads)), n, seed)


@dataclass(frozen=True)
class ConditionalSamples:
    mean: float
    std: float
    cov: float
    u_y: np.ndarray
    w: np.ndarray
    inner_n: int


def mcs_conditional_pf_samples(gp, rv: RandomVector, y: float, u_y_draws: int, inner_n: int, seed: int,
                               threads: Optional[int] = None) -> ConditionalSamples:
    """Brute-force moments of ``W(U_Y)``: each drawn ``u_y`` gets its own inner MCS over ``X``."""
    if u_y_draws < 100:
        raise ValueError("at least 100 epistemic draws are required")
    inner_n = _check_n(inner_n)
    u_y = chunk_generator(seed, 0, stream=1).standard_normal(u_y_draws)

    def run(i):
        fails = 0
        for j, _, size in _chunks(inner_n):
            u = chunk_generator(seed, j, stream=2 + i).standard_normal((size, rv.n))
            mu, sigma = gp.predict(rv.from_standard_normal(u))
            fails += int(np.count_nonzero(mu + u_y[i] * sigma < y))
        return fails / inner_n

    w = np.array(ordered_map(run, range(u_y_draws), threads))
    mean = float(w.mean())
    std = float(w.std(ddof=1))
    return ConditionalSamples(mean, std, std / mean if mean > 0 else math.inf, u_y, w, inner_n)
