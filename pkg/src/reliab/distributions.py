"""Independent marginals and the map between physical and standard normal space."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from .errors import DimensionMismatch, DomainError, NonPositiveLognormalMean, NonPositiveStd

_LOG_TAIL = 6.0


def norm_cdf(u):
    """Standard normal CDF; deep lower tails go through ``log_ndtr``."""
    u = np.asarray(u, dtype=float)
    out = np.where(u < -_LOG_TAIL, np.exp(special.log_ndtr(np.minimum(u, 0.0))), special.ndtr(u))
    return out if out.ndim else float(out)


def norm_sf(u):
    return norm_cdf(-np.asarray(u, dtype=float))


def norm_pdf(u):
    u = np.asarray(u, dtype=float)
    out = np.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)
    return out if out.ndim else float(out)


def norm_ppf(p):
    out = special.ndtri(np.asarray(p, dtype=float))
    return out if np.ndim(out) else float(out)


class Kind(str, enum.Enum):
    NORMAL = "normal"
    LOGNORMAL = "lognormal"


@dataclass(frozen=True)
class Distribution:
    """A normal or lognormal marginal given by the mean and std of the variable itself."""

    kind: Kind
    mean: float
    std: float
    mu_ln: float = field(default=math.nan, repr=False)
    sigma_ln: float = field(default=math.nan, repr=False)

    def from_standard_normal(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind is Kind.NORMAL:
            x = self.mean + self.std * u
        else:
            x = np.exp(self.mu_ln + self.sigma_ln * u)
        return x if x.ndim else float(x)

    def to_standard_normal(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind is Kind.NORMAL:
            u = (x - self.mean) / self.std
        else:
            if np.any(x <= 0.0):
                raise DomainError(f"lognormal variable needs x > 0, got {x.min()!r}")
            u = (np.log(x) - self.mu_ln) / self.sigma_ln
        return u if u.ndim else float(u)

    def dx_du(self, u):
        """Jacobian of the transform, used to chain surrogate gradients into U-space."""
        if self.kind is Kind.NORMAL:
            return np.full_like(np.asarray(u, dtype=float), self.std)
        return self.sigma_ln * np.exp(self.mu_ln + self.sigma_ln * np.asarray(u, dtype=float))


def make_distribution(kind, mean: float, std: float) -> Distribution:
    kind = Kind(kind.lower() if isinstance(kind, str) else kind)
    mean, std = float(mean), float(std)
    if not std > 0.0:
        raise NonPositiveStd(f"std must be positive, got {std}")
    if kind is Kind.NORMAL:
        return Distribution(kind, mean, std)
    if not mean > 0.0:
        raise NonPositiveLognormalMean(f"lognormal mean must be positive, got {mean}")
    sigma_ln = math.sqrt(math.log1p((std / mean) ** 2))
    mu_ln = math.log(mean) - 0.5 * sigma_ln**2
    return Distribution(kind, mean, std, mu_ln, sigma_ln)


def from_standard_normal(dist: Distribution, u):
    return dist.from_standard_normal(u)


def to_standard_normal(dist: Distribution, x):
    return dist.to_standard_normal(x)


@dataclass(frozen=True)
class RandomVector:
    marginals: tuple[Distribution, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "marginals", tuple(self.marginals))
        names = tuple(self.names) or tuple(f"x{i + 1}" for i in range(len(self.marginals)))
        if len(names) != len(self.marginals):
            raise DimensionMismatch("one name per marginal is required")
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return len(self.marginals)

    def _check(self, arr):
        if arr.shape[-1] != self.n:
            raise DimensionMismatch(f"expected {self.n} components, got {arr.shape[-1]}")

    def from_standard_normal(self, u):
        """Componentwise transform; accepts shape (n,) or (k, n)."""
        u = np.asarray(u, dtype=float)
        self._check(u)
        x = np.empty_like(u)
        for i, dist in enumerate(self.marginals):
            x[..., i] = dist.from_standard_normal(u[..., i])
        return x

    def to_standard_normal(self, x):
        x = np.asarray(x, dtype=float)
        self._check(x)
        u = np.empty_like(x)
        for i, dist in enumerate(self.marginals):
            u[..., i] = dist.to_standard_normal(x[..., i])
        return u

    def jacobian_diag(self, u):
        u = np.asarray(u, dtype=float)
        self._check(u)
        out = np.empty_like(u)
        for i, dist in enumerate(self.marginals):
            out[..., i] = dist.dx_du(u[..., i])
        return out

    def means(self) -> np.ndarray:
        return np.array([d.mean for d in self.marginals])

    def stds(self) -> np.ndarray:
        return np.array([d.std for d in self.marginals])


def transform_vector(rv: RandomVector, u_vec: Sequence[float]) -> np.ndarray:
    return rv.from_standard_normal(u_vec)


def random_vector(specs) -> RandomVector:
    """Build from ``[{"name", "kind", "mean", "std"}, ...]`` config entries."""
    marginals, names = [], []
    for spec in specs:
        marginals.append(make_distribution(spec["kind"], spec["mean"], spec["std"]))
        names.append(spec["name"])
    return RandomVector(tuple(marginals), tuple(names))
