"""Render alignment results as a table, CSV or JSON.

Human formats print numbers with 6 decimals; JSON keeps full precision so
that re-parsing yields the same floats. Every report carries the horizon,
weighting, norm order and tool version.
"""

from __future__ import annotations

import csv
import io
import json

from normalign import __version__
from normalign.alignment import AlignmentMatrix, AlignmentReport
from normalign.errors import AlignError

FORMATS = ("table", "csv", "json")
TOOL = "normalign"


def fmt(x: float) -> str:
    text = f"{x:.6f}"
    return "0.000000" if text == "-0.000000" else text


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def _meta(horizon, weighting, norms) -> dict:
    return {"tool": TOOL, "version": __version__, "horizon": horizon,
            "weighting": getattr(weighting, "value", weighting), "norm_order": list(norms)}


def _label(norms) -> str:
    return "+".join(norms) if norms else "(none)"


def _header(horizon, weighting, norms) -> list:
    return [f"{TOOL} {__version__}",
            f"norms: {_label(norms)}  horizon: {horizon}  weighting: {getattr(weighting, 'value', weighting)}"]


# -- align -----------------------------------------------------------------

def align_to_dict(report: AlignmentReport) -> dict:
    return {**_meta(report.horizon, report.weighting, report.norms), "result": report.to_dict()}


def render_align(report: AlignmentReport, form: str) -> str:
    if form == "json":
        return _dumps(align_to_dict(report))
    if form == "csv":
        rows = [["record", "index", "path", "length", "mean_preference", "weight", "degree",
                 "path_count", "mean_path_length", "norms", "values", "agents", "horizon",
                 "weighting", "version"]]
        common = [_label(report.norms), "+".join(report.values), "+".join(report.agents),
                  report.horizon, report.weighting.value, __version__]
        rows.append(["summary", "", "", "", "", "", fmt(report.degree), report.path_count,
                     fmt(report.mean_path_length)] + common)
        for i, p in enumerate(report.paths, 1):
            rows.append(["path", i, str(p.path), p.path.length, fmt(p.mean), fmt(p.weight),
                         "", "", ""] + common)
        return _csv(rows)
    summary = report.normative.summary()
    lines = _header(report.horizon, report.weighting, report.norms) + [
        f"agents: {', '.join(report.agents)}  values: {', '.join(report.values)}",
        f"degree: {fmt(report.degree)}",
        f"paths: {report.path_count}  mean length: {fmt(report.mean_path_length)}",
        f"normative world: {len(summary['states_added'])} states added, "
        f"{summary['transitions_forbidden']} transitions forbidden, "
        f"{summary['transitions_rewritten']} rewritten",
        "",
        f"{'#':>4}  {'mean':>10}  {'weight':>9}  path",
    ]
    for i, p in enumerate(report.paths, 1):
        lines.append(f"{i:>4}  {fmt(p.mean):>10}  {fmt(p.weight):>9}  {p.path}")
    return "\n".join(lines) + "\n"


# -- compare ---------------------------------------------------------------

def render_compare(first: AlignmentReport, second: AlignmentReport, difference: float, form: str) -> str:
    a, b = _label(first.norms), _label(second.norms)
    if form == "json":
        return _dumps({
            **_meta(first.horizon, first.weighting, [a, b]),
            "first": first.to_dict(include_paths=False),
            "second": second.to_dict(include_paths=False),
            "difference": difference,
            "sign_convention": "positive favours the first norm",
        })
    if form == "csv":
        return _csv([
            ["first", "second", "values", "agents", "degree_first", "degree_second", "difference",
             "horizon", "weighting", "version"],
            [a, b, "+".join(first.values), "+".join(first.agents), fmt(first.degree),
             fmt(second.degree), fmt(difference), first.horizon, first.weighting.value, __version__],
        ])
    lines = _header(first.horizon, first.weighting, [a, b]) + [
        f"agents: {', '.join(first.agents)}  values: {', '.join(first.values)}",
        f"degree[{a}]: {fmt(first.degree)}",
        f"degree[{b}]: {fmt(second.degree)}",
        f"difference: {fmt(difference)}  (positive favours {a})",
    ]
    return "\n".join(lines) + "\n"


# -- matrix ----------------------------------------------------------------

def _cell_token(cell) -> str:
    return f"ERR:{cell.code}" if isinstance(cell, AlignError) else fmt(cell.degree)


def render_matrix(matrix: AlignmentMatrix, horizon, weighting, agents, form: str) -> str:
    if form == "json":
        cells = []
        for n in matrix.norms:
            for v in matrix.values:
                cell = matrix.cells[(n, v)]
                entry = {"norm": n, "value": v}
                if isinstance(cell, AlignError):
                    entry["error"] = cell.to_dict()
                else:
                    entry.update(degree=cell.degree, path_count=cell.path_count,
                                 mean_path_length=cell.mean_path_length)
                cells.append(entry)
        return _dumps({**_meta(horizon, weighting, matrix.norms), "agents": list(agents),
                       "norms": list(matrix.norms), "values": list(matrix.values), "cells": cells})
    if form == "csv":
        rows = [["norm", "value", "degree", "error", "agents", "horizon", "weighting", "version"]]
        for n in matrix.norms:
            for v in matrix.values:
                cell = matrix.cells[(n, v)]
                err = isinstance(cell, AlignError)
                rows.append([n, v, "" if err else fmt(cell.degree), cell.code if err else "",
                             "+".join(agents), horizon, getattr(weighting, "value", weighting), __version__])
        return _csv(rows)
    width = max([len(n) for n in matrix.norms] + [4])
    colw = max([len(v) for v in matrix.values] + [22])
    lines = _header(horizon, weighting, matrix.norms) + [f"agents: {', '.join(agents)}", "",
                                                         " " * width + "  " + "  ".join(f"{v:>{colw}}" for v in matrix.values)]
    for n in matrix.norms:
        lines.append(f"{n:<{width}}  " + "  ".join(f"{_cell_token(matrix.cells[(n, v)]):>{colw}}"
                                                   for v in matrix.values))
    return "\n".join(lines) + "\n"


# -- paths -----------------------------------------------------------------

def render_paths(normative, pathset, form: str, report: AlignmentReport = None) -> str:
    """List a path set; with ``report`` the per-transition deltas are included."""
    norms = normative.norms_applied
    weighting = report.weighting if report else "uniform"
    entries = report.paths if report else None
    if form == "json":
        paths = []
        for i, p in enumerate(pathset, 1):
            entry = {"index": i, "path": str(p), "states": list(p.states),
                     "actions": [t.action for t in p.steps], "length": p.length}
            if entries:
                entry.update(deltas=list(entries[i - 1].deltas), mean_preference=entries[i - 1].mean)
            paths.append(entry)
        out = {**_meta(pathset.horizon, weighting, norms), "path_count": len(pathset), "paths": paths}
        if report:
            out.update(values=list(report.values), agents=list(report.agents))
        return _dumps(out)
    if form == "csv":
        rows = [["index", "step", "from", "action", "to", "delta", "norms", "horizon", "version"]]
        for i, p in enumerate(pathset, 1):
            for j, t in enumerate(p.steps, 1):
                delta = fmt(entries[i - 1].deltas[j - 1]) if entries else ""
                rows.append([i, j, t.src, t.action, t.dst, delta, _label(norms), pathset.horizon, __version__])
        return _csv(rows)
    lines = _header(pathset.horizon, weighting, norms) + [f"paths: {len(pathset)}", ""]
    for i, p in enumerate(pathset, 1):
        lines.append(f"{i:>4}  {p}")
        if entries:
            deltas = ", ".join(fmt(d) for d in entries[i - 1].deltas)
            lines.append(f"      deltas: [{deltas}]  mean: {fmt(entries[i - 1].mean)}")
    return "\n".join(lines) + "\n"
