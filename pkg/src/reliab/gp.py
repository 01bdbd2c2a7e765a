"""Gaussian-process regression surrogate.

Squared-exponential kernel with one length scale per input, fitted by
maximizing the log marginal likelihood. Inputs and outputs are standardized
before training; every public method takes and returns physical units.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import linalg, optimize
from scipy.spatial.distance import pdist

from .errors import DimensionMismatch, DuplicateTrainingPoints, IllConditioned

FORMAT_VERSION = 1
_PREDICT_CHUNK = 16384


class GpPoint(NamedTuple):
    mu: float
    sigma: float
    dmu: np.ndarray
    dsigma: np.ndarray
    flat_variance: bool


@dataclass(frozen=True)
class FitConfig:
    n_starts: int = 8
    seed_span: tuple[float, float] = (0.05, 5.0)
    max_iter: int = 500
    fatol: float = 1e-8
    xatol: float = 1e-6
    nugget: float = 1e-10
    max_nugget: float = 1e-4
    # length-scale bounds as multiples of the standardized per-dimension range
    lengthscale_bounds: tuple[float, float] = (0.01, 10.0)
    signal_var_bounds: tuple[float, float] = (1e-4, 1e4)


def _sqexp(A, B, lengthscales, signal_var):
    d = (A[:, None, :] - B[None, :, :]) / lengthscales
    return signal_var * np.exp(-0.5 * np.einsum("ijk,ijk->ij", d, d))


def _factor(K, nugget, max_nugget):
    """Cholesky with nugget escalation; returns (L, nugget_used)."""
    eye = np.eye(K.shape[0])
    while True:
        try:
            return np.linalg.cholesky(K + nugget * eye), nugget
        except np.linalg.LinAlgError:
            nugget *= 10.0
            if nugget > max_nugget * (1 + 1e-9):
                raise IllConditioned("covariance factorization failed at the largest nugget") from None


@dataclass(frozen=True, eq=False)
class GpModel:
    X_train: np.ndarray
    y_train: np.ndarray
    lengthscales: np.ndarray  # standardized input units
    signal_var: float  # standardized output units
    nugget: float
    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: float
    y_std: float
    _Xs: np.ndarray = field(repr=False, default=None)
    _L: np.ndarray = field(repr=False, default=None)
    _alpha: np.ndarray = field(repr=False, default=None)

    @classmethod
    def build(cls, X, y, lengthscales, signal_var, nugget, x_mean, x_std, y_mean, y_std, max_nugget=1e-4):
        X = np.array(X, dtype=float, copy=True)
        y = np.array(y, dtype=float, copy=True)
        Xs = (X - x_mean) / x_std
        ys = (y - y_mean) / y_std
        K = _sqexp(Xs, Xs, lengthscales, signal_var)
        L, nugget = _factor(K, nugget, max_nugget)
        alpha = linalg.cho_solve((L, True), ys)
        for arr in (X, y, Xs, L, alpha):
            arr.setflags(write=False)
        return cls(
            X, y, np.asarray(lengthscales, float), float(signal_var), float(nugget),
            np.asarray(x_mean, float), np.asarray(x_std, float), float(y_mean), float(y_std),
            Xs, L, alpha,
        )

    @property
    def n_inputs(self) -> int:
        return self.X_train.shape[1]

    @property
    def prior_std(self) -> float:
        return math.sqrt(self.signal_var) * self.y_std

    def log_marginal_likelihood(self) -> float:
        ys = (self.y_train - self.y_mean) / self.y_std
        n = ys.size
        return float(-0.5 * ys @ self._alpha - np.log(np.diag(self._L)).sum() - 0.5 * n * math.log(2 * math.pi))

    def with_data(self, X, y) -> "GpModel":
        """Condition on a new training set, keeping hyperparameters and scaling."""
        return GpModel.build(X, y, self.lengthscales, self.signal_var, self.nugget,
                             self.x_mean, self.x_std, self.y_mean, self.y_std)

    def _standardize(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n_inputs:
            raise DimensionMismatch(f"expected {self.n_inputs} inputs, got {x.shape[-1]}")
        return (np.atleast_2d(x) - self.x_mean) / self.x_std

    def predict_raw_variance(self, x):
        """Standardized predictive variance before clamping (diagnostics)."""
        xs = self._standardize(x)
        Ks = _sqexp(xs, self._Xs, self.lengthscales, self.signal_var)
        v = linalg.solve_triangular(self._L, Ks.T, lower=True)
        return self.signal_var - np.einsum("ij,ij->j", v, v)

    def predict(self, x):
        """Predictive mean and standard deviation; scalar for one point, arrays for ``(k, n)``."""
        single = np.ndim(x) == 1
        xs = self._standardize(x)
        mu = np.empty(xs.shape[0])
        var = np.empty(xs.shape[0])
        for start in range(0, xs.shape[0], _PREDICT_CHUNK):
            block = xs[start:start + _PREDICT_CHUNK]
            Ks = _sqexp(block, self._Xs, self.lengthscales, self.signal_var)
            mu[start:start + len(block)] = Ks @ self._alpha
            v = linalg.solve_triangular(self._L, Ks.T, lower=True, check_finite=False)
            var[start:start + len(block)] = self.signal_var - np.einsum("ij,ij->j", v, v)
        mu = mu * self.y_std + self.y_mean
        sigma = np.sqrt(np.maximum(var, 0.0)) * self.y_std
        if single:
            return float(mu[0]), float(sigma[0])
        return mu, sigma

    def predict_with_grad(self, x) -> GpPoint:
        xs = self._standardize(x)[0]
        diff = xs - self._Xs  # (N, n)
        k = self.signal_var * np.exp(-0.5 * np.sum((diff / self.lengthscales) ** 2, axis=1))
        dk = -k[:, None] * diff / self.lengthscales**2  # d k / d xs
        mu_s = k @ self._alpha
        dmu_s = dk.T @ self._alpha
        kinv_k = linalg.cho_solve((self._L, True), k)
        var_s = self.signal_var - k @ kinv_k
        dvar_s = -2.0 * dk.T @ kinv_k
        mu = mu_s * self.y_std + self.y_mean
        dmu = dmu_s * self.y_std / self.x_std
        if var_s <= 0.0:
            return GpPoint(float(mu), 0.0, dmu, np.zeros_like(dmu), True)
        sigma_s = math.sqrt(var_s)
        dsigma = 0.5 * dvar_s / sigma_s * self.y_std / self.x_std
        return GpPoint(float(mu), sigma_s * self.y_std, dmu, dsigma, False)

    def predict_grad(self, x):
        p = self.predict_with_grad(x)
        return p.dmu, p.dsigma

    def to_dict(self) -> dict:
        return {
            "format": "reliab-gp",
            "version": FORMAT_VERSION,
            "kernel": "squared_exponential",
            "lengthscales": self.lengthscales.tolist(),
            "signal_var": self.signal_var,
            "nugget": self.nugget,
            "x_mean": self.x_mean.tolist(),
            "x_std": self.x_std.tolist(),
            "y_mean": self.y_mean,
            "y_std": self.y_std,
            "X_train": self.X_train.tolist(),
            "y_train": self.y_train.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GpModel":
        if doc.get("format") != "reliab-gp" or doc.get("version") != FORMAT_VERSION:
            raise ValueError("not a reliab GP document of a supported version")
        return cls.build(doc["X_train"], doc["y_train"], np.array(doc["lengthscales"]), doc["signal_var"],
                         doc["nugget"], np.array(doc["x_mean"]), np.array(doc["x_std"]),
                         doc["y_mean"], doc["y_std"])

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path) -> "GpModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _neg_lml(theta, Xs, ys, cfg):
    n = Xs.shape[1]
    lengthscales = np.exp(theta[:n])
    signal_var = math.exp(theta[n])
    K = _sqexp(Xs, Xs, lengthscales, signal_var)
    try:
        L, _ = _factor(K, cfg.nugget, cfg.max_nugget)
    except IllConditioned:
        return 1e300
    alpha = linalg.cho_solve((L, True), ys)
    return float(0.5 * ys @ alpha + np.log(np.diag(L)).sum() + 0.5 * ys.size * math.log(2 * math.pi))


def seed_points(Xs, cfg: FitConfig) -> np.ndarray:
    """Deterministic multi-start seeds in log-parameter space."""
    span = Xs.max(axis=0) - Xs.min(axis=0)
    span = np.where(span > 0, span, 1.0)
    factors = np.geomspace(cfg.seed_span[0], cfg.seed_span[1], cfg.n_starts)
    return np.array([np.append(np.log(f * span), 0.0) for f in factors])


def _bounds(Xs, cfg):
    span = Xs.max(axis=0) - Xs.min(axis=0)
    span = np.where(span > 0, span, 1.0)
    lo, hi = cfg.lengthscale_bounds
    bounds = [(math.log(lo * s), math.log(hi * s)) for s in span]
    bounds.append(tuple(math.log(v) for v in cfg.signal_var_bounds))
    return bounds


def _scaling(X, y):
    x_mean = X.mean(axis=0)
    x_std = X.std(axis=0)
    x_std = np.where(x_std > 0, x_std, 1.0)
    y_mean = float(y.mean())
    y_std = float(y.std())
    return x_mean, x_std, y_mean, (y_std if y_std > 0 else 1.0)


def fit(X, y, config: Optional[FitConfig] = None) -> GpModel:
    cfg = config or FitConfig()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.shape[0] != y.size:
        raise DimensionMismatch(f"{X.shape[0]} input rows but {y.size} outputs")
    if X.shape[0] < 2:
        raise ValueError("at least two training points are required")
    if np.any(pdist(X) <= 1e-12):
        raise DuplicateTrainingPoints("training inputs contain duplicate rows")

    x_mean, x_std, y_mean, y_std = _scaling(X, y)
    Xs = (X - x_mean) / x_std
    ys = (y - y_mean) / y_std
    bounds = _bounds(Xs, cfg)
    best = None
    for theta0 in seed_points(Xs, cfg):
        theta0 = np.clip(theta0, [b[0] for b in bounds], [b[1] for b in bounds])
        res = optimize.minimize(
            _neg_lml, theta0, args=(Xs, ys, cfg), method="Nelder-Mead", bounds=bounds,
            options={"maxiter": cfg.max_iter, "fatol": cfg.fatol, "xatol": cfg.xatol},
        )
        value, theta = (res.fun, res.x) if res.fun <= _neg_lml(theta0, Xs, ys, cfg) else (
            _neg_lml(theta0, Xs, ys, cfg), theta0)
        if best is None or value < best[0]:
            best = (value, theta)
    if best[0] >= 1e300:
        raise IllConditioned("no hyperparameter candidate gave a factorizable covariance")
    theta = best[1]
    n = X.shape[1]
    return GpModel.build(X, y, np.exp(theta[:n]), math.exp(theta[n]), cfg.nugget,
                         x_mean, x_std, y_mean, y_std, max_nugget=cfg.max_nugget)


def read_training_csv(path, names=None):
    """Header of variable names with a final ``y`` column; returns (X, y, names)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = [h.strip() for h in rows[0]]
    if header[-1] != "y":
        raise ValueError(f"{path}: last column must be 'y'")
    data = np.array([[float(v) for v in row] for row in rows[1:] if row], dtype=float)
    cols = header[:-1]
    if names is not None:
        missing = [n for n in names if n not in cols]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        idx = [cols.index(n) for n in names]
        return data[:, idx], data[:, -1], list(names)
    return data[:, :-1], data[:, -1], cols


def write_training_csv(path, X, y, names):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(names) + ["y"])
        for row, yi in zip(np.atleast_2d(X), y):
            w.writerow([repr(float(v)) for v in row] + [repr(float(yi))])


class AnalyticSurrogate:
    """A surrogate given by closed-form mean/std functions of the physical inputs.

    Used for oracle cases (linear mean, constant std) where the conditional
    probabilities are known exactly.
    """

    def __init__(self, n_inputs: int, mean: Callable, std: Callable, mean_grad: Callable, std_grad: Callable):
        self.n_inputs = n_inputs
        self._mean, self._std = mean, std
        self._mean_grad, self._std_grad = mean_grad, std_grad

    def predict(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n_inputs:
            raise DimensionMismatch(f"expected {self.n_inputs} inputs, got {x.shape[-1]}")
        X = np.atleast_2d(x)
        mu = np.asarray(self._mean(X), float).reshape(-1) * np.ones(X.shape[0])
        sigma = np.asarray(self._std(X), float).reshape(-1) * np.ones(X.shape[0])
        if x.ndim == 1:
            return float(mu[0]), float(sigma[0])
        return mu, sigma

    def predict_with_grad(self, x) -> GpPoint:
        mu, sigma = self.predict(x)
        x = np.asarray(x, dtype=float)
        dmu = np.asarray(self._mean_grad(x), float)
        dsigma = np.asarray(self._std_grad(x), float) if sigma > 0 else np.zeros(self.n_inputs)
        return GpPoint(mu, sigma, dmu, dsigma, sigma <= 0)

    def predict_grad(self, x):
        p = self.predict_with_grad(x)
        return p.dmu, p.dsigma


def linear_gaussian(beta0: float, a, s: float) -> AnalyticSurrogate:
    """``mu(x) = beta0 - a.x`` with constant ``sigma = s``."""
    a = np.asarray(a, dtype=float)
    return AnalyticSurrogate(
        a.size,
        mean=lambda X: beta0 - X @ a,
        std=lambda X: np.full(X.shape[0], float(s)),
        mean_grad=lambda x: -a.copy(),
        std_grad=lambda x: np.zeros_like(a),
    )


class ZeroVariance:
    """Wraps a surrogate and forces its predictive std to zero."""

    def __init__(self, base):
        self.base = base
        self.n_inputs = base.n_inputs

    def predict(self, x):
        mu, sigma = self.base.predict(x)
        return mu, sigma * 0.0

    def predict_with_grad(self, x) -> GpPoint:
        p = self.base.predict_with_grad(x)
        return GpPoint(p.mu, 0.0, p.dmu, np.zeros_like(p.dmu), True)

    def predict_grad(self, x):
        p = self.predict_with_grad(x)
        return p.dmu, p.dsigma
