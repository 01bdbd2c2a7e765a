"""Augmented-space baseline: FORM/SORM over ``(u_x, u_y)`` on the boundary
``mu + u_y*sigma = y`` with ``u_y`` clamped to ``[-cap, cap]``."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .distributions import RandomVector
from .errors import UnsupportedDimension
from .form_sorm import MppOptions, MppResult, find_mpp, form_pf, sorm_breitung, sorm_curvatures, sorm_tvedt
from .surrogate_space import response_in_u


def cap_uy(u_y: float, cap: float = 4.0) -> float:
    return float(min(max(u_y, -cap), cap))


@dataclass(frozen=True)
class AugmentedBoundary:
    gp: object
    rv: RandomVector
    y: float = 0.0
    cap: float = 4.0

    @property
    def dimension(self) -> int:
        return self.rv.n + 1

    def value(self, u) -> float:
        u = np.asarray(u, dtype=float)
        mu, sigma = self.gp.predict(self.rv.from_standard_normal(u[:-1]))
        return mu + cap_uy(u[-1], self.cap) * sigma - self.y

    def value_and_grad(self, u):
        u = np.asarray(u, dtype=float)
        mu, sigma, dmu, dsigma = response_in_u(self.gp, self.rv, u[:-1])
        u_y = cap_uy(u[-1], self.cap)
        grad = np.empty(u.size)
        grad[:-1] = dmu + u_y * dsigma
        grad[-1] = sigma if abs(u[-1]) < self.cap else 0.0
        return mu + u_y * sigma - self.y, grad


def direct_form_augmented(bnd: AugmentedBoundary, opts: Optional[MppOptions] = None) -> tuple[float, MppResult]:
    mpp = find_mpp(bnd.value, bnd.dimension, opts, value_and_grad=bnd.value_and_grad)
    return form_pf(mpp), mpp


def direct_sorm_augmented(bnd: AugmentedBoundary, variant: str = "breitung",
                          opts: Optional[MppOptions] = None) -> tuple[float, MppResult, np.ndarray]:
    mpp = find_mpp(bnd.value, bnd.dimension, opts, value_and_grad=bnd.value_and_grad)
    curv = sorm_curvatures(bnd.value, mpp, value_and_grad=bnd.value_and_grad, kink=(bnd.dimension - 1, bnd.cap))
    formula = {"breitung": sorm_breitung, "tvedt": sorm_tvedt}[variant]
    return formula(mpp.beta, curv.kappas), mpp, curv.kappas


@dataclass(frozen=True)
class GridSpec:
    lower: float = -5.0
    upper: float = 5.0
    points: int = 101


def sample_boundary_surface(bnd: AugmentedBoundary, grid: GridSpec = GridSpec()) -> list[tuple]:
    """Rows ``(u_x1[, u_x2], uy_raw, uy_capped)`` of ``u_y = (y - mu)/sigma`` on a grid."""
    n = bnd.rv.n
    if n > 2:
        raise UnsupportedDimension(f"boundary sampling supports 1 or 2 inputs, got {n}")
    axis = np.linspace(grid.lower, grid.upper, grid.points)
    if n == 1:
        U = axis[:, None]
    else:
        a, b = np.meshgrid(axis, axis, indexing="ij")
        U = np.column_stack([a.ravel(), b.ravel()])
    mu, sigma = bnd.gp.predict(bnd.rv.from_standard_normal(U))
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = np.where(sigma > 0, (bnd.y - mu) / sigma, np.copysign(np.inf, bnd.y - mu))
    capped = np.clip(raw, -bnd.cap, bnd.cap)
    return [tuple(U[i]) + (float(raw[i]), float(capped[i])) for i in range(U.shape[0])]


def boundary_csv(rows: Sequence[tuple], n: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"u_x{i + 1}" for i in range(n)] + ["uy_raw", "uy_capped"])
    for row in rows:
        w.writerow([f"{v:.12g}" if math.isfinite(v) else ("inf" if v > 0 else "-inf") for v in row])
    return buf.getvalue()
