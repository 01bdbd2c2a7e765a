"""Gauss-Hermite quadrature reliability method.

Each quadrature node fixes the epistemic variable ``u_y``; the conditional
failure probability ``w(u_y)`` comes from FORM/SORM in the original input
space, and the nodes are combined with the Gauss-Hermite weights into the
mean, standard deviation and coefficient of variation of ``w(U_Y)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from ._threads import ordered_map
from .distributions import RandomVector, norm_cdf
from .errors import CurvatureSingularity, Dimension1, NodeFailure, NoSignChange, OrderOutOfRange
from .form_sorm import MppOptions, MppResult, find_mpp, sorm_breitung, sorm_curvatures, sorm_tvedt
from .surrogate_space import conditional_limit_state

METHODS = ("form", "sorm_breitung", "sorm_tvedt")
MIN_CONVERGED_FRACTION = 0.9


@dataclass(frozen=True)
class QuadratureRule:
    order: int
    nodes: np.ndarray
    weights: np.ndarray


def _normalized_hermite(m, v):
    """``He_m(v)/sqrt(m!)`` and ``He_{m-1}(v)/sqrt((m-1)!)`` by the three-term recurrence."""
    prev = np.zeros_like(v)
    cur = np.ones_like(v)
    for k in range(m):
        prev, cur = cur, (v * cur - math.sqrt(k) * prev) / math.sqrt(k + 1)
    return cur, prev


def gauss_hermite_rule(m: int) -> QuadratureRule:
    """Nodes and weights for integrals against the standard normal density.

    Nodes are the eigenvalues of the Jacobi matrix of the probabilists'
    Hermite recurrence, polished by one Newton step; weights use
    ``1 / (m * h_{m-1}(v)^2)`` with ``h`` the normalized polynomials, which
    keeps the tiny tail weights accurate.
    """
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= 64:
        raise OrderOutOfRange(f"quadrature order must be an integer in [1, 64], got {m!r}")
    m = int(m)
    if m == 1:
        return QuadratureRule(1, np.zeros(1), np.ones(1))
    off = np.sqrt(np.arange(1, m, dtype=float))
    v = eigh_tridiagonal(np.zeros(m), off, eigvals_only=True)
    h_m, h_prev = _normalized_hermite(m, v)
    v = v - h_m / (math.sqrt(m) * h_prev)
    v = 0.5 * (v - v[::-1])
    _, h_prev = _normalized_hermite(m, v)
    w = 1.0 / (m * h_prev**2)
    w = 0.5 * (w + w[::-1])
    w = w / w.sum()
    if m % 2:
        v[m // 2] = 0.0
    for arr in (v, w):
        arr.setflags(write=False)
    return QuadratureRule(m, v, w)


@dataclass(frozen=True)
class NodeResult:
    u_y: float
    weight: float
    w: float
    beta: float
    converged: bool
    status: str = "ok"
    mpp: Optional[MppResult] = field(default=None, repr=False, compare=False)
    kappas: Optional[np.ndarray] = field(default=None, repr=False, compare=False)


def conditional_pf(gp, rv: RandomVector, y: float, u_y: float, method: str = "form",
                   opts: Optional[MppOptions] = None, weight: float = math.nan) -> NodeResult:
    """Failure probability of ``mu + u_y*sigma < y`` over the inputs, for fixed ``u_y``."""
    if method not in METHODS:
        raise ValueError(f"unknown conditional method {method!r}")
    if method != "form" and rv.n == 1:
        raise Dimension1("SORM is undefined for a one-dimensional problem")
    opts = opts or MppOptions()
    g, vg = conditional_limit_state(gp, rv, y, u_y)
    try:
        mpp = find_mpp(g, rv.n, opts, value_and_grad=vg)
    except NoSignChange as exc:
        # no crossing out to the bracketing radius: report the bound
        w = norm_cdf(-exc.radius) if exc.origin_safe else norm_cdf(exc.radius)
        beta = exc.radius if exc.origin_safe else -exc.radius
        return NodeResult(u_y, weight, w, beta, True, "no_sign_change")
    if not mpp.converged:
        return NodeResult(u_y, weight, norm_cdf(-mpp.beta), mpp.beta, False, "not_converged", mpp)
    if method == "form":
        return NodeResult(u_y, weight, norm_cdf(-mpp.beta), mpp.beta, True, "ok", mpp)
    kappas = sorm_curvatures(g, mpp, value_and_grad=vg).kappas
    formula = sorm_breitung if method == "sorm_breitung" else sorm_tvedt
    try:
        w = formula(mpp.beta, kappas)
        status = "ok"
    except CurvatureSingularity:
        w = norm_cdf(-mpp.beta)
        status = "form_fallback"
    return NodeResult(u_y, weight, w, mpp.beta, True, status, mpp, kappas)


@dataclass(frozen=True)
class GhqrmReport:
    method: str
    order: int
    pf_mean: float
    pf_std: float
    cov: float
    nodes: tuple[NodeResult, ...]

    @property
    def n_converged(self) -> int:
        return sum(node.converged for node in self.nodes)


def aggregate(nodes: Sequence[NodeResult]) -> tuple[float, float, float]:
    """Weighted mean, std and cov of ``w`` over the converged nodes.

    Weights of unconverged nodes are dropped and the rest renormalized. Both
    moments are accumulated about the first node's value, which is the same
    sum algebraically but exact when every ``w`` coincides.
    """
    used = [node for node in nodes if node.converged]
    c = np.array([node.weight for node in used])
    w = np.array([node.w for node in used])
    if len(used) < len(nodes):
        c = c / c.sum()
    d = w - w[0]
    shift = float(np.sum(c * d))
    mean = float(w[0]) + shift
    var = float(np.sum(c * d * d)) - shift**2
    std = math.sqrt(max(var, 0.0))
    if mean == 0.0:
        warnings.warn("mean conditional failure probability is zero; cov reported as inf", RuntimeWarning)
        cov = math.inf
    else:
        cov = std / mean
    return float(mean), std, cov


def ghqrm_pf(gp, rv: RandomVector, y: float = 0.0, m: int = 10, method: str = "form",
             opts: Optional[MppOptions] = None, threads: Optional[int] = None) -> GhqrmReport:
    rule = gauss_hermite_rule(m)
    if method != "form" and rv.n == 1:
        raise Dimension1("SORM is undefined for a one-dimensional problem")

    def run(i):
        return conditional_pf(gp, rv, y, float(rule.nodes[i]), method, opts, float(rule.weights[i]))

    nodes = tuple(ordered_map(run, range(rule.order), threads))
    converged = sum(node.converged for node in nodes)
    if converged < MIN_CONVERGED_FRACTION * len(nodes):
        raise NodeFailure(f"only {converged} of {len(nodes)} quadrature nodes converged", nodes)
    mean, std, cov = aggregate(nodes)
    return GhqrmReport(method, rule.order, mean, std, cov, nodes)


@dataclass(frozen=True)
class SweepResult:
    orders: tuple[int, ...]
    pf: tuple[float, ...]
    rel_change: tuple[float, ...]  # vs the next order; nan for the last
    converged_order: Optional[int]


def convergence_sweep(gp, rv: RandomVector, y: float, m_list: Sequence[int], method: str = "form",
                      opts: Optional[MppOptions] = None, tol: float = 5e-3,
                      threads: Optional[int] = None) -> SweepResult:
    """``pf(m)`` per order; ``converged_order`` is the first m within ``tol`` of its successor."""
    m_list = [int(m) for m in m_list]
    if any(b <= a for a, b in zip(m_list, m_list[1:])):
        raise ValueError("orders must be strictly ascending")
    pf = [ghqrm_pf(gp, rv, y, m, method, opts, threads).pf_mean for m in m_list]
    rel = []
    for a, b in zip(pf, pf[1:]):
        rel.append(abs(b - a) / abs(b) if b != 0 else (0.0 if a == 0 else math.inf))
    rel.append(math.nan)
    converged = next((m for m, r in zip(m_list, rel) if r < tol), None)
    return SweepResult(tuple(m_list), tuple(pf), tuple(rel), converged)
