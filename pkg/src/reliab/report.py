"""Comparison tables and their text, CSV and JSON renderings.

The layouts follow the usual reliability comparison tables: one block of
``Model / Method / p_f / Error`` rows with an MCS reference per model, and
a second block with the mean, standard deviation and cov of the conditional
failure probability for each quadrature method.

CSV and JSON use a fixed column order and 12 significant digits. Wall-clock
runtimes appear only in the text rendering unless ``timings=True``, so the
machine formats of two runs of the same config are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .distributions import RandomVector

ROW_COLUMNS = ("model", "method", "pf", "error", "standard_error", "beta_or_nodes", "status")
COV_COLUMNS = ("method", "mean", "std", "cov")

MODEL_LABELS = {"original": "Original model", "gp": "GP model"}
METHOD_LABELS = {
    "form": "Direct FORM",
    "sorm-breitung": "SORM Breitung",
    "sorm-tvedt": "SORM Tvedt",
    "mcs": "MCS",
    "direct-form": "Direct FORM",
    "direct-sorm-breitung": "Direct SORM Breitung",
    "direct-sorm-tvedt": "Direct SORM Tvedt",
    "form-gq": "FORM-GQ",
    "sorm-gq-breitung": "SORM-GQ Breitung",
    "sorm-gq-tvedt": "SORM-GQ Tvedt",
    "mcs-epistemic": "MCS",
}
REFERENCE_METHODS = {"original": "mcs", "gp": "mcs-epistemic"}


@dataclass(frozen=True)
class ReportRow:
    model: str  # "original" or "gp"
    method: str
    pf: float
    error: float = math.nan  # (pf - reference) / reference
    standard_error: float = math.nan  # MCS rows only
    beta_or_nodes: str = ""
    status: str = "ok"
    message: str = ""
    runtime_ms: float = math.nan

    @property
    def is_reference(self) -> bool:
        return REFERENCE_METHODS[self.model] == self.method


@dataclass(frozen=True)
class CovRow:
    method: str
    mean: float
    std: float
    cov: float


@dataclass(frozen=True)
class ReliabilityReport:
    title: str
    rows: tuple[ReportRow, ...] = ()
    cov: tuple[CovRow, ...] = ()
    nodes: dict = field(default_factory=dict)  # method -> tuple of per-node dicts

    def row(self, method: str) -> ReportRow:
        for r in self.rows:
            if r.method == method:
                return r
        raise KeyError(method)


def relative_error(pf: float, reference: float) -> float:
    if not (math.isfinite(pf) and math.isfinite(reference)) or reference == 0.0:
        return math.nan
    return (pf - reference) / reference


def with_errors(rows: Sequence[ReportRow]) -> tuple[ReportRow, ...]:
    """Fill the error column against each model's MCS reference row."""
    refs = {r.model: r.pf for r in rows if r.is_reference and r.status == "ok"}
    out = []
    for r in rows:
        err = math.nan if r.is_reference or r.model not in refs else relative_error(r.pf, refs[r.model])
        out.append(ReportRow(r.model, r.method, r.pf, err, r.standard_error, r.beta_or_nodes, r.status,
                             r.message, r.runtime_ms))
    return tuple(out)


def fmt(x: float) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{x:.12g}"


def _num(text: str) -> float:
    return float(text) if text != "" else math.nan


def _json_num(x: float):
    if x is None or not math.isfinite(x):
        return None
    return float(fmt(x))


# --- text -------------------------------------------------------------------

def _sci(x: float) -> str:
    return "-" if not math.isfinite(x) else f"{x:.4e}"


def _pct(x: float) -> str:
    return "-" if not math.isfinite(x) else f"{100 * x:.2f}%"


def _table(header: Sequence[str], body: Sequence[Sequence[str]]) -> list[str]:
    widths = [max(len(h), *(len(row[i]) for row in body)) if body else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return lines


def variables_table(rv: RandomVector) -> str:
    body = [(name, d.kind.value.capitalize(), f"{d.mean:g}", f"{d.std:g}") for name, d in zip(rv.names, rv.marginals)]
    return "\n".join(_table(("Variable", "Distribution", "Mean", "Standard deviation"), body)) + "\n"


def _text(r: ReliabilityReport, timings: bool) -> str:
    lines = [r.title, ""]
    header = ["Model", "Method", "p_f", "Error", "beta / nodes", "Status"]
    if timings:
        header.append("Time (ms)")
    body, last_model = [], None
    for row in r.rows:
        label = MODEL_LABELS[row.model] if row.model != last_model else ""
        last_model = row.model
        pf = _sci(row.pf)
        if row.is_reference and math.isfinite(row.standard_error):
            pf += f" (SE {row.standard_error:.2e})"
        cells = [label, METHOD_LABELS[row.method], pf, _pct(row.error), row.beta_or_nodes or "-",
                 row.status if row.status == "ok" else f"{row.status}: {row.message}"]
        if timings:
            cells.append("-" if not math.isfinite(row.runtime_ms) else f"{row.runtime_ms:.0f}")
        body.append(cells)
    lines += _table(header, body)
    if r.cov:
        lines += ["", "Model uncertainty (conditional p_f over U_Y)", ""]
        lines += _table(("Method", "Mean", "Standard deviation", "Coefficient of variation"),
                        [(METHOD_LABELS[c.method], _sci(c.mean), _sci(c.std),
                          "-" if math.isnan(c.cov) else f"{c.cov:.4f}") for c in r.cov])
    return "\n".join(lines) + "\n"


# --- csv / json ---------------------------------------------------------------

def _csv(r: ReliabilityReport, timings: bool) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROW_COLUMNS + (("runtime_ms",) if timings else ()))
    for row in r.rows:
        cells = [row.model, row.method, fmt(row.pf), fmt(row.error), fmt(row.standard_error), row.beta_or_nodes,
                 row.status]
        if timings:
            cells.append(fmt(row.runtime_ms))
        w.writerow(cells)
    if r.cov:
        w.writerow([])
        w.writerow(COV_COLUMNS)
        for c in r.cov:
            w.writerow([c.method, fmt(c.mean), fmt(c.std), fmt(c.cov)])
    return buf.getvalue()


def _json(r: ReliabilityReport, timings: bool) -> str:
    rows = []
    for row in r.rows:
        d = {
            "model": row.model, "method": row.method, "pf": _json_num(row.pf), "error": _json_num(row.error),
            "standard_error": _json_num(row.standard_error), "beta_or_nodes": row.beta_or_nodes,
            "status": row.status, "message": row.message,
        }
        if timings:
            d["runtime_ms"] = _json_num(row.runtime_ms)
        rows.append(d)
    doc = {"title": r.title, "rows": rows}
    if r.cov:
        doc["cov"] = [{"method": c.method, "mean": _json_num(c.mean), "std": _json_num(c.std),
                       "cov": _json_num(c.cov)} for c in r.cov]
    if r.nodes:
        doc["nodes"] = {
            method: [{k: (_json_num(v) if isinstance(v, float) else v) for k, v in node.items()} for node in nodes]
            for method, nodes in r.nodes.items()
        }
    return json.dumps(doc, indent=1) + "\n"


def emit_report(r: ReliabilityReport, format: str = "text", timings: Optional[bool] = None) -> bytes:
    """Render ``r``; ``timings`` defaults to True for text only."""
    if timings is None:
        timings = format == "text"
    render = {"text": _text, "csv": _csv, "json": _json}.get(format)
    if render is None:
        raise ValueError(f"unknown report format {format!r}")
    return render(r, timings).encode("utf-8")


def parse_report_csv(data, title: str = "") -> ReliabilityReport:
    """Inverse of the CSV rendering (messages and runtimes are not stored)."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    blocks = text.split("\n\n")
    reader = csv.reader(io.StringIO(blocks[0]))
    header = next(reader)
    if tuple(header[: len(ROW_COLUMNS)]) != ROW_COLUMNS:
        raise ValueError(f"unexpected report header {header}")
    rows = []
    for cells in reader:
        if not cells:
            continue
        runtime = _num(cells[7]) if len(header) > 7 else math.nan
        rows.append(ReportRow(cells[0], cells[1], _num(cells[2]), _num(cells[3]), _num(cells[4]), cells[5], cells[6],
                              "", runtime))
    cov = []
    if len(blocks) > 1 and blocks[1].strip():
        reader = csv.reader(io.StringIO(blocks[1]))
        if tuple(next(reader)) != COV_COLUMNS:
            raise ValueError("unexpected cov header")
        cov = [CovRow(c[0], _num(c[1]), _num(c[2]), _num(c[3])) for c in reader if c]
    return ReliabilityReport(title, tuple(rows), tuple(cov))
