"""``reliab`` command line interface.

Exit codes: 0 on success, 2 for configuration errors, 3 for numerical
failures. ``RELIAB_THREADS`` caps the worker count of parallel stages.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import __version__
from .augmented import AugmentedBoundary, GridSpec, boundary_csv, sample_boundary_surface
from .config import METHODS, ProblemConfig, _integer, check_methods, load_config
from .errors import ConfigError, NumericalError
from .ghqrm import gauss_hermite_rule
from .mcs import mcs_pf, mcs_pf_epistemic
from .report import emit_report
from .runner import build_gp, run_compare, shifted_limit_state

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _write(data: bytes, out):
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _override(cfg: ProblemConfig, args) -> ProblemConfig:
    changes = {}
    if getattr(args, "method", None):
        changes["methods"] = check_methods(args.method)
    if getattr(args, "quad_order", None) is not None:
        changes["quad_order"] = args.quad_order
    if getattr(args, "cap", None) is not None:
        changes["cap"] = args.cap
    if getattr(args, "n", None) is not None:
        changes["mcs_n"] = _integer(args.n, "--n")
    if getattr(args, "seed", None) is not None:
        changes["mcs_seed"] = args.seed
    mpp = {k: getattr(args, k) for k in ("tol_g", "tol_u", "max_iters", "fd_step") if getattr(args, k, None) is not None}
    if mpp:
        changes["mpp"] = dataclasses.replace(cfg.analysis.mpp, **mpp)
    return cfg.with_analysis(**changes) if changes else cfg


def cmd_fit(args) -> int:
    cfg = load_config(args.config)
    model = build_gp(cfg)
    model.save(args.out)
    summary = {
        "inputs": list(cfg.rv.names),
        "n_train": int(model.X_train.shape[0]),
        "lengthscales": model.lengthscales.tolist(),
        "signal_var": model.signal_var,
        "nugget": model.nugget,
        "log_marginal_likelihood": model.log_marginal_likelihood(),
    }
    sys.stdout.write(json.dumps(summary, indent=1) + "\n")
    return EXIT_OK


def _report(args, require_ok: bool) -> int:
    cfg = _override(load_config(args.config), args)
    report = run_compare(cfg, threads=args.threads)
    _write(emit_report(report, args.format, timings=True if args.timings else None), args.out)
    if require_ok and any(row.status != "ok" for row in report.rows):
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_analyze(args) -> int:
    return _report(args, require_ok=True)


def cmd_compare(args) -> int:
    return _report(args, require_ok=False)


def cmd_mcs(args) -> int:
    cfg = _override(load_config(args.config), args)
    a = cfg.analysis
    if args.epistemic:
        res = mcs_pf_epistemic(build_gp(cfg), cfg.rv, cfg.threshold, a.mcs_n, a.mcs_seed, args.threads)
    else:
        if cfg.limit_state is None:
            raise ConfigError("original-model MCS needs a limit_state")
        res = mcs_pf(shifted_limit_state(cfg.limit_state, cfg.threshold), cfg.rv, a.mcs_n, a.mcs_seed, args.threads)
    doc = {"model": "gp" if args.epistemic else "original", **res.to_dict()}
    _write((json.dumps(doc, indent=1) + "\n").encode(), args.out)
    return EXIT_OK


def cmd_quadrature(args) -> int:
    rule = gauss_hermite_rule(args.order)
    lines = ["node,weight"] + [f"{v:.17g},{c:.17g}" for v, c in zip(rule.nodes, rule.weights)]
    _write(("\n".join(lines) + "\n").encode(), args.out)
    return EXIT_OK


def cmd_boundary(args) -> int:
    cfg = load_config(args.config)
    cap = args.cap if args.cap is not None else cfg.analysis.cap
    bnd = AugmentedBoundary(build_gp(cfg), cfg.rv, cfg.threshold, cap)
    rows = sample_boundary_surface(bnd, GridSpec(args.lower, args.upper, args.points))
    _write(boundary_csv(rows, cfg.rv.n).encode(), args.out)
    return EXIT_OK


def cmd_fixture_freeze(args) -> int:
    from .fixtures import SPECS, freeze_fixture

    names = list(SPECS) if args.name == "all" else [args.name]
    for name in names:
        if name not in SPECS:
            raise ConfigError(f"unknown fixture {name!r}; choose from {sorted(SPECS)} or 'all'")
        oracle = freeze_fixture(SPECS[name], args.dir, args.oracle_n, args.threads)
        sys.stdout.write(json.dumps({"fixture": name, **oracle["mcs_epistemic"]}) + "\n")
    return EXIT_OK


def _add_report_options(p, with_methods: bool):
    p.add_argument("--config", required=True, help="problem config (JSON)")
    if with_methods:
        p.add_argument("--method", action="append", choices=METHODS,
                       help="method to run; repeat for several (default: the config's list)")
    p.add_argument("--quad-order", type=int, help="Gauss-Hermite order")
    p.add_argument("--cap", type=float, help="bound on |u_y| in the augmented space")
    p.add_argument("--n", type=float, help="MCS sample count")
    p.add_argument("--seed", type=int, help="MCS seed")
    p.add_argument("--tol-g", type=float, help="MPP tolerance on |g|, scaled by 1 + |g(0)|")
    p.add_argument("--tol-u", type=float, help="MPP tolerance on the distance of u from the gradient direction")
    p.add_argument("--max-iters", type=int, help="MPP iteration budget")
    p.add_argument("--fd-step", type=float, help="finite-difference step for numerical gradients")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--timings", action="store_true", help="include runtimes in csv/json output")
    p.add_argument("--out", help="write to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reliab", description="Reliability analysis with GP model uncertainty.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--threads", type=int, help="worker count (default: RELIAB_THREADS or all cores)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit the GP surrogate and save it as JSON")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("analyze", help="run selected methods; exit 3 if any fails")
    _add_report_options(p, with_methods=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compare", help="run the config's method list and print the comparison table")
    _add_report_options(p, with_methods=False)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("mcs", help="Monte Carlo reference estimate as JSON")
    p.add_argument("--config", required=True)
    p.add_argument("--n", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--epistemic", action="store_true", help="sample the GP's predictive distribution too")
    p.add_argument("--out")
    p.set_defaults(func=cmd_mcs)

    p = sub.add_parser("quadrature", help="Gauss-Hermite nodes and weights as CSV")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_quadrature)

    p = sub.add_parser("boundary", help="sample the augmented limit-state surface as CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--cap", type=float)
    p.add_argument("--lower", type=float, default=-5.0)
    p.add_argument("--upper", type=float, default=5.0)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--out")
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("fixture", help="manage the frozen training fixtures")
    fsub = p.add_subparsers(dest="fixture_command", required=True)
    f = fsub.add_parser("freeze", help="regenerate a fixture and its MCS oracle")
    f.add_argument("name", help="fixture name or 'all'")
    f.add_argument("--dir", help="output directory (default: the package's fixture directory)")
    f.add_argument("--oracle-n", type=float, help="oracle sample count")
    f.set_defaults(func=cmd_fixture_freeze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"reliab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"reliab: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:  # bad argument values that slipped past argparse
        print(f"reliab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
