"""Problem configuration files.

A config is a JSON object::

    {
      "name": "example1-case1",
      "limit_state": "example1",              # built-in name or an expression
      "variables": [{"name": "x", "kind": "normal", "mean": 0, "std": 1}],
      "threshold": 0.0,
      "gp": {"fixture": "case1"},             # or training_csv / model / design
      "analysis": {"methods": ["form", "mcs", "form-gq"], "quad_order": 10,
                   "cap": 4.0, "mcs": {"n": 1000000, "seed": 42},
                   "mpp": {"tol_g": 1e-6, "tol_u": 1e-6, "max_iters": 100, "fd_step": 1e-6}}
    }

``variables`` is taken from the built-in problem when ``limit_state`` names
one. Relative paths resolve against the config file's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .distributions import RandomVector, random_vector
from .errors import ConfigError, ReliabError, UnknownMethod
from .form_sorm import MppOptions
from .limit_state import BUILTINS, LimitState, builtin_problem, parse_expression

ORIGINAL_METHODS = ("form", "sorm-breitung", "sorm-tvedt", "mcs")
GP_METHODS = (
    "direct-form", "direct-sorm-breitung", "direct-sorm-tvedt",
    "form-gq", "sorm-gq-breitung", "sorm-gq-tvedt", "mcs-epistemic",
)
METHODS = ORIGINAL_METHODS + GP_METHODS
GQ_METHODS = ("form-gq", "sorm-gq-breitung", "sorm-gq-tvedt")

_TOP_KEYS = {"name", "limit_state", "variables", "threshold", "gp", "analysis"}
_VAR_KEYS = {"name", "kind", "mean", "std"}
_GP_KEYS = {"fixture", "training_csv", "model", "design", "points", "n", "seed", "span"}
_ANALYSIS_KEYS = {"methods", "quad_order", "cap", "mcs", "mpp"}
_MCS_KEYS = {"n", "seed"}
_MPP_KEYS = {"tol_g", "tol_u", "max_iters", "fd_step"}


@dataclass(frozen=True)
class GpSource:
    fixture: Optional[str] = None
    training_csv: Optional[Path] = None
    model: Optional[Path] = None
    design: Optional[str] = None  # "lhs" or "points"
    points: Optional[tuple] = None
    n: int = 0
    seed: int = 0
    span: float = 4.0


@dataclass(frozen=True)
class Analysis:
    methods: tuple[str, ...] = ("form", "mcs")
    quad_order: int = 10
    cap: float = 4.0
    mcs_n: int = 1_000_000
    mcs_seed: int = 42
    mpp: MppOptions = field(default_factory=MppOptions)


@dataclass(frozen=True)
class ProblemConfig:
    name: str
    rv: RandomVector
    limit_state: Optional[LimitState]
    threshold: float = 0.0
    gp: Optional[GpSource] = None
    analysis: Analysis = field(default_factory=Analysis)

    def with_analysis(self, **changes) -> "ProblemConfig":
        return replace(self, analysis=replace(self.analysis, **changes))


def _check_keys(section: dict, allowed: set, where: str):
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _integer(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or float(value) != int(value):
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    return int(value)


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return float(value)


def check_methods(methods) -> tuple[str, ...]:
    if isinstance(methods, str) or not isinstance(methods, (list, tuple)):
        raise ConfigError("analysis.methods must be a list of method names")
    for m in methods:
        if m not in METHODS:
            raise UnknownMethod(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    return tuple(methods)


def _resolve(path: str, base: Path) -> Path:
    p = Path(path)
    return p if p.is_absolute() else base / p


def _gp_source(doc: dict, base: Path) -> GpSource:
    _check_keys(doc, _GP_KEYS, "gp")
    sources = [k for k in ("fixture", "training_csv", "model", "design") if k in doc]
    if len(sources) != 1:
        raise ConfigError("gp needs exactly one of fixture, training_csv, model, design")
    if "fixture" in doc:
        from .fixtures import SPECS

        if doc["fixture"] not in SPECS:
            raise ConfigError(f"unknown fixture {doc['fixture']!r}; choose from {sorted(SPECS)}")
        return GpSource(fixture=doc["fixture"])
    if "training_csv" in doc:
        return GpSource(training_csv=_resolve(doc["training_csv"], base))
    if "model" in doc:
        return GpSource(model=_resolve(doc["model"], base))
    design = doc["design"]
    if design == "lhs":
        return GpSource(design="lhs", n=_integer(doc.get("n", 0), "gp.n"), seed=_integer(doc.get("seed", 0), "gp.seed"),
                        span=_number(doc.get("span", 4.0), "gp.span"))
    if design == "points":
        points = doc.get("points")
        if not isinstance(points, list) or not points:
            raise ConfigError("gp.points must be a non-empty list of rows")
        return GpSource(design="points", points=tuple(tuple(float(v) for v in np.atleast_1d(row)) for row in points))
    raise ConfigError(f"unknown gp.design {design!r}; use 'lhs' or 'points'")


def _analysis(doc: dict) -> Analysis:
    _check_keys(doc, _ANALYSIS_KEYS, "analysis")
    out = Analysis()
    changes = {}
    if "methods" in doc:
        changes["methods"] = check_methods(doc["methods"])
    if "quad_order" in doc:
        changes["quad_order"] = _integer(doc["quad_order"], "analysis.quad_order")
    if "cap" in doc:
        changes["cap"] = _number(doc["cap"], "analysis.cap")
    if "mcs" in doc:
        _check_keys(doc["mcs"], _MCS_KEYS, "analysis.mcs")
        if "n" in doc["mcs"]:
            changes["mcs_n"] = _integer(doc["mcs"]["n"], "analysis.mcs.n")
        if "seed" in doc["mcs"]:
            changes["mcs_seed"] = _integer(doc["mcs"]["seed"], "analysis.mcs.seed")
    if "mpp" in doc:
        _check_keys(doc["mpp"], _MPP_KEYS, "analysis.mpp")
        mpp = {k: _number(v, f"analysis.mpp.{k}") for k, v in doc["mpp"].items()}
        if "max_iters" in mpp:
            mpp["max_iters"] = _integer(mpp["max_iters"], "analysis.mpp.max_iters")
        changes["mpp"] = MppOptions(**mpp)
    return replace(out, **changes)


def parse_config(doc: dict, base_dir=".") -> ProblemConfig:
    _check_keys(doc, _TOP_KEYS, "config")
    base = Path(base_dir)
    text = doc.get("limit_state")
    if text is not None and not isinstance(text, str):
        raise ConfigError("limit_state must be a string")
    try:
        if text in BUILTINS:
            if "variables" in doc:
                raise ConfigError(f"built-in problem {text!r} defines its own variables")
            rv, ls = builtin_problem(text)
        else:
            specs = doc.get("variables")
            if not isinstance(specs, list) or not specs:
                raise ConfigError("variables must be a non-empty list")
            for i, spec in enumerate(specs):
                _check_keys(spec, _VAR_KEYS, f"variables[{i}]")
                missing = _VAR_KEYS - set(spec)
                if missing:
                    raise ConfigError(f"variables[{i}] is missing {', '.join(sorted(missing))}")
            rv = random_vector(specs)
            ls = parse_expression(text, rv.names) if text is not None else None
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ReliabError):
            raise
        raise ConfigError(f"bad variables section: {exc}") from exc
    gp = _gp_source(doc["gp"], base) if "gp" in doc else None
    analysis = _analysis(doc.get("analysis", {}))
    if ls is None and any(m in ORIGINAL_METHODS for m in analysis.methods):
        raise ConfigError("original-model methods need a limit_state")
    if gp is None and any(m in GP_METHODS for m in analysis.methods):
        raise ConfigError("GP methods need a gp section")
    if gp is not None and gp.design is not None and ls is None:
        raise ConfigError("a generated GP design needs a limit_state to evaluate")
    name = doc.get("name", text if text in BUILTINS else "problem")
    return ProblemConfig(str(name), rv, ls, _number(doc.get("threshold", 0.0), "threshold"), gp, analysis)


def load_config(path) -> ProblemConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(doc, path.parent)
