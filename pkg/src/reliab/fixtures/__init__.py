"""Frozen training sets and their Monte Carlo references.

The training designs are generated from the specs in :data:`SPECS` and written
next to this module by ``reliab fixture freeze``; tests and configs read the
committed files rather than regenerating them.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.stats import qmc

from .. import gp as gp_mod
from ..limit_state import builtin_problem
from ..mcs import mcs_pf, mcs_pf_epistemic

DATA_DIR = Path(__file__).resolve().parent


@dataclass(frozen=True)
class FixtureSpec:
    name: str
    problem: str
    points: Optional[tuple] = None  # explicit physical-space rows
    design: Optional[str] = None  # "lhs"
    n: int = 0
    seed: int = 0
    span: float = 4.0  # LHS half-width in standard normal space
    box: Optional[tuple] = None  # per-dimension (low, high) in standard normal space, overrides span
    oracle_n: int = 10_000_000
    oracle_seed: int = 20251014
    notes: str = ""
    extra: dict = field(default_factory=dict)


SPECS = {
    "case1": FixtureSpec(
        "case1", "example1", points=((-2.0,), (0.0,), (2.0,)),
        notes="three points away from the limit state at x=-2.6544; large predictive std there",
    ),
    "case2": FixtureSpec(
        "case2", "example1", points=((-2.5,), (-1.0,), (0.5,), (2.0,)),
        notes="four points, one close to the limit state; small predictive std there",
    ),
    "speed_reducer": FixtureSpec(
        "speed_reducer", "speed_reducer", design="lhs", n=200, seed=2024, span=4.0,
        notes="Latin hypercube over +-4 standard deviations in standard normal space",
    ),
    "bracket_standin": FixtureSpec(
        "bracket_standin", "bracket_standin", design="lhs", n=10, seed=0, box=((1.0, 4.0), (-2.0, 2.0)),
        notes="ten points on the stiff side only; the low-E failure region is extrapolated",
    ),
}


def training_design(spec: FixtureSpec):
    rv, ls = builtin_problem(spec.problem)
    if spec.points is not None:
        X = np.array(spec.points, dtype=float)
    elif spec.design == "lhs":
        U = qmc.LatinHypercube(d=rv.n, seed=spec.seed).random(spec.n)
        if spec.box is not None:
            lo, hi = np.array(spec.box, dtype=float).T
            X = rv.from_standard_normal(lo + U * (hi - lo))
        else:
            X = rv.from_standard_normal((2.0 * U - 1.0) * spec.span)
    else:
        raise ValueError(f"fixture {spec.name!r} has neither points nor a design")
    return X, ls.evaluate_batch(X), list(rv.names)


def paths(name: str, directory=None) -> dict:
    d = Path(directory) if directory is not None else DATA_DIR
    return {"train": d / f"{name}_train.csv", "oracle": d / f"{name}_oracle.json", "manifest": d / "manifest.json"}


def freeze_fixture(spec: FixtureSpec, directory=None, oracle_n: Optional[int] = None, threads=None) -> dict:
    """Write the training CSV, the oracle JSON and update the manifest."""
    p = paths(spec.name, directory)
    p["train"].parent.mkdir(parents=True, exist_ok=True)
    X, y, names = training_design(spec)
    gp_mod.write_training_csv(p["train"], X, y, names)
    rv, ls = builtin_problem(spec.problem)
    n = int(oracle_n or spec.oracle_n)
    model = gp_mod.fit(*gp_mod.read_training_csv(p["train"])[:2])
    t0 = time.perf_counter()
    epistemic = mcs_pf_epistemic(model, rv, 0.0, n, spec.oracle_seed, threads)
    original = mcs_pf(ls, rv, n, spec.oracle_seed, threads)
    oracle = {
        "fixture": spec.name,
        "threshold": 0.0,
        "gp": {"lengthscales": model.lengthscales.tolist(), "signal_var": model.signal_var,
               "log_marginal_likelihood": model.log_marginal_likelihood()},
        "mcs_epistemic": epistemic.to_dict(),
        "mcs_original": original.to_dict(),
        "seconds": round(time.perf_counter() - t0, 1),
    }
    p["oracle"].write_text(json.dumps(oracle, indent=1) + "\n")
    manifest = json.loads(p["manifest"].read_text()) if p["manifest"].exists() else {}
    entry = asdict(spec)
    entry["oracle_n"] = n
    entry["files"] = [p["train"].name, p["oracle"].name]
    manifest[spec.name] = entry
    p["manifest"].write_text(json.dumps(dict(sorted(manifest.items())), indent=1) + "\n")
    return oracle


def load_training(name: str, directory=None):
    return gp_mod.read_training_csv(paths(name, directory)["train"])


def load_oracle(name: str, directory=None) -> dict:
    return json.loads(paths(name, directory)["oracle"].read_text())


def fit_fixture(name: str, directory=None, config=None) -> gp_mod.GpModel:
    X, y, _ = load_training(name, directory)
    return gp_mod.fit(X, y, config)
