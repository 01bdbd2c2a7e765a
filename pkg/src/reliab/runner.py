"""Execute the methods requested by a :class:`ProblemConfig`."""

from __future__ import annotations

import dataclasses
import math
import time
from typing import Optional

import numpy as np
from scipy.stats import qmc

from . import gp as gp_mod
from .augmented import AugmentedBoundary, direct_form_augmented, direct_sorm_augmented
from .config import GP_METHODS, METHODS, ProblemConfig
from .errors import ConfigError, NumericalError
from .form_sorm import find_mpp, form_pf, sorm_breitung, sorm_curvatures, sorm_tvedt
from .ghqrm import ghqrm_pf
from .limit_state import LimitState
from .mcs import mcs_pf, mcs_pf_epistemic
from .report import CovRow, ReliabilityReport, ReportRow, with_errors


def shifted_limit_state(ls: LimitState, y: float) -> LimitState:
    """``g(X) - y``, so that failure ``g < y`` becomes the usual ``g < 0``."""
    if y == 0.0:
        return ls
    return dataclasses.replace(ls, batch=lambda X: ls.batch(X) - y, source=f"({ls.source}) - {y!r}")


def training_set(cfg: ProblemConfig):
    src = cfg.gp
    if src.fixture is not None:
        from .fixtures import load_training

        X, y, names = load_training(src.fixture)
    elif src.training_csv is not None:
        try:
            X, y, names = gp_mod.read_training_csv(src.training_csv, cfg.rv.names)
        except OSError as exc:
            raise ConfigError(f"cannot read training data {src.training_csv}: {exc.strerror or exc}") from exc
    else:
        if src.design == "lhs":
            if src.n < 2:
                raise ConfigError("gp.n must be at least 2 for a Latin hypercube design")
            U = qmc.LatinHypercube(d=cfg.rv.n, seed=src.seed).random(src.n)
            X = cfg.rv.from_standard_normal((2.0 * U - 1.0) * src.span)
        else:
            X = np.array(src.points, dtype=float)
            if X.ndim != 2 or X.shape[1] != cfg.rv.n:
                raise ConfigError(f"gp.points rows must have {cfg.rv.n} entries")
        y = cfg.limit_state.evaluate_batch(X)
        names = list(cfg.rv.names)
    if tuple(names) != tuple(cfg.rv.names):
        raise ConfigError(f"training columns {list(names)} do not match variables {list(cfg.rv.names)}")
    return X, y


def build_gp(cfg: ProblemConfig, fit_config: Optional[gp_mod.FitConfig] = None):
    if cfg.gp is None:
        raise ConfigError("config has no gp section")
    if cfg.gp.model is not None:
        try:
            model = gp_mod.GpModel.load(cfg.gp.model)
        except OSError as exc:
            raise ConfigError(f"cannot read GP model {cfg.gp.model}: {exc.strerror or exc}") from exc
        if model.n_inputs != cfg.rv.n:
            raise ConfigError(f"GP model has {model.n_inputs} inputs, config declares {cfg.rv.n}")
        return model
    return gp_mod.fit(*training_set(cfg), fit_config)


def _beta(b: float) -> str:
    return f"beta={b:.12g}"


def _run_original(cfg: ProblemConfig, method: str, threads):
    a = cfg.analysis
    ls = shifted_limit_state(cfg.limit_state, cfg.threshold)
    if method == "mcs":
        res = mcs_pf(ls, cfg.rv, a.mcs_n, a.mcs_seed, threads)
        return dict(pf=res.pf_hat, standard_error=res.standard_error, beta_or_nodes=f"n={res.n_samples}")

    def g(u):
        return ls.evaluate(cfg.rv.from_standard_normal(u))

    mpp = find_mpp(g, cfg.rv.n, a.mpp)
    if method == "form":
        return dict(pf=form_pf(mpp), beta_or_nodes=_beta(mpp.beta))
    kappas = sorm_curvatures(g, mpp).kappas
    formula = sorm_breitung if method == "sorm-breitung" else sorm_tvedt
    return dict(pf=formula(mpp.beta, kappas), beta_or_nodes=_beta(mpp.beta))


def _node_dicts(rep):
    return tuple(
        {"u_y": n.u_y, "weight": n.weight, "w": n.w, "beta": n.beta, "status": n.status} for n in rep.nodes
    )


def _run_gp(cfg: ProblemConfig, model, method: str, threads, extras: dict):
    a = cfg.analysis
    if method == "mcs-epistemic":
        res = mcs_pf_epistemic(model, cfg.rv, cfg.threshold, a.mcs_n, a.mcs_seed, threads)
        return dict(pf=res.pf_hat, standard_error=res.standard_error, beta_or_nodes=f"n={res.n_samples}")
    if method.startswith("direct-"):
        bnd = AugmentedBoundary(model, cfg.rv, cfg.threshold, a.cap)
        if method == "direct-form":
            pf, mpp = direct_form_augmented(bnd, a.mpp)
        else:
            pf, mpp, _ = direct_sorm_augmented(bnd, method.rsplit("-", 1)[1], a.mpp)
        return dict(pf=pf, beta_or_nodes=_beta(mpp.beta))
    inner = {"form-gq": "form", "sorm-gq-breitung": "sorm_breitung", "sorm-gq-tvedt": "sorm_tvedt"}[method]
    rep = ghqrm_pf(model, cfg.rv, cfg.threshold, a.quad_order, inner, a.mpp, threads)
    extras["cov"] = CovRow(method, rep.pf_mean, rep.pf_std, rep.cov)
    extras["nodes"] = _node_dicts(rep)
    return dict(pf=rep.pf_mean, beta_or_nodes=f"nodes={rep.n_converged}/{rep.order}")


def run_method(cfg: ProblemConfig, method: str, model=None, threads=None) -> tuple[ReportRow, dict]:
    """One table row; numerical failures are caught and recorded in the row."""
    family = "gp" if method in GP_METHODS else "original"
    extras: dict = {}
    t0 = time.perf_counter()
    try:
        if family == "gp":
            out = _run_gp(cfg, model, method, threads, extras)
        else:
            out = _run_original(cfg, method, threads)
        status, message = "ok", ""
    except NumericalError as exc:
        out, status, message = dict(pf=math.nan), type(exc).__name__, str(exc)
    ms = 1e3 * (time.perf_counter() - t0)
    return ReportRow(family, method, status=status, message=message, runtime_ms=ms, **out), extras


def run_compare(cfg: ProblemConfig, threads: Optional[int] = None, model=None) -> ReliabilityReport:
    """Run every requested method, in table order, and assemble the report."""
    methods = [m for m in METHODS if m in cfg.analysis.methods]
    if model is None and any(m in GP_METHODS for m in methods):
        model = build_gp(cfg)
    rows, cov, nodes = [], [], {}
    for method in methods:
        row, extras = run_method(cfg, method, model, threads)
        rows.append(row)
        if "cov" in extras:
            cov.append(extras["cov"])
            nodes[method] = extras["nodes"]
    return ReliabilityReport(cfg.name, with_errors(rows), tuple(cov), nodes)
