"""MPP search in standard normal space with first- and second-order probabilities.

``g`` is always a function of the standard normal vector ``u`` with failure
where ``g(u) < 0``. The reliability index carries the sign of ``g(0)``, so an
origin inside the failure domain gives ``beta < 0`` and ``pf > 0.5``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .distributions import norm_cdf, norm_pdf
from .errors import (
    CurvatureSingularity,
    DegenerateGradient,
    Dimension1,
    MaxIterations,
    NoSignChange,
    NotConverged,
)


@dataclass(frozen=True)
class MppOptions:
    tol_g: float = 1e-6
    tol_u: float = 1e-6
    max_iters: int = 100
    fd_step: float = 1e-6
    radius: float = 10.0
    max_halvings: int = 40
    strict: bool = False  # raise MaxIterations instead of returning an unconverged result


@dataclass(frozen=True)
class MppResult:
    u_star: np.ndarray
    beta: float
    alpha: np.ndarray
    grad_norm: float
    iterations: int
    converged: bool
    g_value: float = math.nan
    g_origin: float = math.nan
    grad: np.ndarray = field(default=None, repr=False)
    n_evals: int = 0


@dataclass(frozen=True)
class SormCurvatures:
    kappas: np.ndarray


def central_gradient(g: Callable, u: np.ndarray, step: float = 1e-6) -> np.ndarray:
    grad = np.empty_like(u)
    for i in range(u.size):
        h = step * max(1.0, abs(u[i]))
        e = np.zeros_like(u)
        e[i] = h
        grad[i] = (g(u + e) - g(u - e)) / (2.0 * h)
    return grad


class _Counted:
    """Evaluation counter around ``g`` and an optional analytic ``(value, grad)`` oracle."""

    def __init__(self, g, value_and_grad, step):
        self.g, self.vg, self.step, self.count = g, value_and_grad, step, 0

    def value(self, u):
        self.count += 1
        return float(self.g(u))

    def value_grad(self, u):
        if self.vg is not None:
            self.count += 1
            val, grad = self.vg(u)
            return float(val), np.asarray(grad, dtype=float)
        val = self.value(u)
        grad = central_gradient(self.g, u, self.step)
        self.count += 2 * u.size
        return val, grad


def _bracket(f: _Counted, g0: float, direction: np.ndarray, radius: float, steps: int = 40) -> bool:
    """Walk the steepest-descent path from the origin looking for a sign change.

    The direction is refreshed from the gradient at every step, so a path that
    runs into a flat (e.g. clamped) coordinate bends instead of stalling.
    """
    sgn = 1.0 if g0 > 0 else -1.0
    h = radius / steps
    u = np.zeros_like(direction)
    d = direction
    for _ in range(steps):
        u = u + h * d
        if np.linalg.norm(u) > radius * (1 + 1e-12):
            break
        val, grad = f.value_grad(u)
        if np.sign(val) != np.sign(g0):
            return True
        gn = float(np.linalg.norm(grad))
        if gn > 1e-14:
            d = -sgn * grad / gn
    return False


def find_mpp(g: Callable, m: int, opts: Optional[MppOptions] = None,
             value_and_grad: Optional[Callable] = None) -> MppResult:
    """Improved HL-RF iteration with an Armijo line search on ``0.5|u|^2 + c|g|``.

    ``value_and_grad``, when given, returns ``(g(u), grad g(u))`` analytically;
    otherwise gradients come from central differences.
    """
    opts = opts or MppOptions()
    f = _Counted(g, value_and_grad, opts.fd_step)
    u = np.zeros(m)
    g0, grad = f.value_grad(u)
    if g0 == 0.0:
        gn = float(np.linalg.norm(grad))
        alpha = -grad / gn if gn > 0 else np.zeros(m)
        return MppResult(u, 0.0, alpha, gn, 0, True, 0.0, 0.0, grad, f.count)

    sgn = 1.0 if g0 > 0 else -1.0
    gn = float(np.linalg.norm(grad))
    if gn > 1e-14:
        direction = -sgn * grad / gn
    else:
        direction = np.ones(m) / math.sqrt(m)
    if not _bracket(f, g0, direction, opts.radius):
        raise NoSignChange(
            f"limit state keeps the sign of g(0)={g0:.6g} out to radius {opts.radius}",
            origin_safe=g0 > 0, radius=opts.radius,
        )
    if gn <= 1e-14:
        # flat at the origin: restart slightly off it along the bracketing ray
        u = 1e-3 * direction
    gu, grad = f.value_grad(u)
    tol_g = opts.tol_g * (1.0 + abs(g0))

    def merit(v, gv, c):
        return 0.5 * float(v @ v) + c * abs(gv)

    iterations = 0
    converged = False
    while True:
        gn = float(np.linalg.norm(grad))
        if gn <= 1e-300:
            raise DegenerateGradient("vanishing gradient during the MPP search")
        alpha = -grad / gn
        off_axis = float(np.linalg.norm(u - (alpha @ u) * alpha))
        if abs(gu) <= tol_g and off_axis <= opts.tol_u:
            converged = True
            break
        if iterations >= opts.max_iters:
            break
        target = ((grad @ u - gu) / (gn * gn)) * grad
        d = target - u
        c = 2.0 * max(np.linalg.norm(u), np.linalg.norm(target)) / gn + 1e-12
        m0 = merit(u, gu, c)
        lam = 1.0
        for _ in range(opts.max_halvings):
            trial = u + lam * d
            g_trial = f.value(trial)
            if np.isfinite(g_trial) and merit(trial, g_trial, c) <= m0 - 1e-4 * lam * float(d @ d):
                break
            lam *= 0.5
        if lam < 2.0**-6 and np.linalg.norm(d) <= 1e-3 * max(1.0, float(np.linalg.norm(u))):
            # backtracking collapsed on a small step: the merit change is below
            # evaluation noise, and plain HL-RF is locally convergent here
            lam = 1.0
        u = u + lam * d
        gu, grad = f.value_grad(u)
        iterations += 1

    gn = float(np.linalg.norm(grad))
    alpha = -grad / gn
    beta = sgn * float(np.linalg.norm(u))
    result = MppResult(u, beta, alpha, gn, iterations, converged, gu, g0, grad, f.count)
    if not converged and opts.strict:
        raise MaxIterations(f"MPP search did not converge in {opts.max_iters} iterations", result)
    return result


def form_pf(mpp: MppResult) -> float:
    if not mpp.converged:
        raise NotConverged("FORM needs a converged MPP")
    return norm_cdf(-mpp.beta)


def _tangent_basis(alpha: np.ndarray) -> np.ndarray:
    m = alpha.size
    q, _ = np.linalg.qr(np.column_stack([alpha, np.eye(m)]))
    return q[:, 1:m]


def _side(u_c, step_c, cap):
    """Stencil sign along a coordinate so the step does not cross ``|u_c| = cap``."""
    inside = abs(u_c) < cap
    plus_inside = abs(u_c + step_c) < cap
    minus_inside = abs(u_c - step_c) < cap
    if plus_inside == inside and minus_inside == inside:
        return 0
    if plus_inside == inside:
        return 1
    return -1


def sorm_curvatures(g: Callable, mpp: MppResult, step: Optional[float] = None,
                    value_and_grad: Optional[Callable] = None, kink: Optional[tuple[int, float]] = None
                    ) -> SormCurvatures:
    """Principal curvatures at the MPP from a finite-difference tangent-space Hessian.

    The Hessian is differenced from analytic gradients when ``value_and_grad``
    is supplied, from values of ``g`` otherwise. ``kink=(index, cap)`` names a
    coordinate clamped at ``+-cap`` inside ``g``; stencils that would straddle
    the clamp are made one-sided.
    """
    u = np.asarray(mpp.u_star, dtype=float)
    m = u.size
    if m == 1:
        raise Dimension1("SORM is undefined for a one-dimensional problem")
    if not mpp.converged:
        raise NotConverged("SORM needs a converged MPP")
    if mpp.grad_norm <= 1e-12:
        raise DegenerateGradient("gradient norm at the MPP is too small for curvature extraction")
    h = step if step is not None else 1e-4 * max(1.0, float(np.linalg.norm(u)))
    basis = _tangent_basis(np.asarray(mpp.alpha, dtype=float))

    def sides(t):
        if kink is None:
            return 0
        idx, cap = kink
        return _side(u[idx], h * t[idx], cap)

    k = m - 1
    H = np.empty((k, k))
    if value_and_grad is not None:
        grad_u = np.asarray(value_and_grad(u)[1], dtype=float)
        for j in range(k):
            t = basis[:, j]
            s = sides(t)
            if s == 0:
                dg = (value_and_grad(u + h * t)[1] - value_and_grad(u - h * t)[1]) / (2 * h)
            else:
                dg = s * (np.asarray(value_and_grad(u + s * h * t)[1]) - grad_u) / h
            H[:, j] = basis.T @ dg
        H = 0.5 * (H + H.T)
    else:
        g_u = g(u)
        for i in range(k):
            ti = basis[:, i]
            s = sides(ti)
            if s == 0:
                H[i, i] = (g(u + h * ti) - 2 * g_u + g(u - h * ti)) / h**2
            else:
                H[i, i] = (g(u + 2 * s * h * ti) - 2 * g(u + s * h * ti) + g_u) / h**2
            for j in range(i):
                tj = basis[:, j]
                sp, sm = sides(ti + tj), sides(ti - tj)
                if sp == 0 and sm == 0:
                    val = (g(u + h * (ti + tj)) - g(u + h * (ti - tj))
                           - g(u - h * (ti - tj)) + g(u - h * (ti + tj))) / (4 * h**2)
                else:
                    si = sides(ti) or 1
                    sj = sides(tj) or 1
                    val = si * sj * (g(u + h * (si * ti + sj * tj)) - g(u + h * si * ti)
                                     - g(u + h * sj * tj) + g_u) / h**2
                H[i, j] = H[j, i] = val
    kappas = np.linalg.eigvalsh(H / mpp.grad_norm)
    return SormCurvatures(np.asarray(kappas))


def _check_factors(beta, kappas, shift=0.0):
    factors = 1.0 + (beta + shift) * kappas
    bad = np.flatnonzero(factors <= 0.0)
    if bad.size:
        i = int(bad[0])
        raise CurvatureSingularity(
            f"1 + (beta{'+%g' % shift if shift else ''})*kappa = {factors[i]:.6g} <= 0 for curvature {i}", i)
    return factors


def _breitung_safe_side(beta, kappas):
    factors = _check_factors(beta, kappas)
    return norm_cdf(-beta) * float(np.prod(factors ** -0.5))


def _tvedt_safe_side(beta, kappas):
    f0 = _check_factors(beta, kappas)
    f1 = _check_factors(beta, kappas, 1.0)
    p0 = float(np.prod(f0 ** -0.5))
    p1 = float(np.prod(f1 ** -0.5))
    pc = np.prod(1.0 / np.sqrt(1.0 + (beta + 1j) * kappas.astype(complex))).real
    phi_b = norm_cdf(-beta)
    a = beta * phi_b - norm_pdf(beta)
    return phi_b * p0 + a * (p0 - p1) + (beta + 1.0) * a * (p0 - pc)


def _second_order(formula, beta, kappas):
    kappas = np.atleast_1d(np.asarray(kappas, dtype=float))
    if beta >= 0:
        return formula(beta, kappas)
    # origin in the failure domain: expand the safe set instead, seen from -g
    return 1.0 - formula(-beta, -kappas)


def sorm_breitung(beta: float, kappas) -> float:
    """``Phi(-beta) * prod(1 + beta*kappa)^(-1/2)``."""
    return _second_order(_breitung_safe_side, float(beta), kappas)


def sorm_tvedt(beta: float, kappas) -> float:
    """Tvedt's three-term expansion; the first term is Breitung's estimate."""
    return _second_order(_tvedt_safe_side, float(beta), kappas)
