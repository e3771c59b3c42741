"""Transition reports extracted from scan CSV files."""

from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field

from .errors import MalformedCsv

DELTA_THRESHOLD = 1e-3
# a phase change larger than this between neighbouring temperatures counts as a step
PHASE_STEP = math.pi / 2

_NUMERIC = {"param", "T", "F", "F_density", "trace_sqrt", "delta", "theta", "phase", "winding",
            "n_edge", "n_bulk", "ratio", "gap", "iterations", "residual", "site", "n"}


@dataclass
class Summary:
    kind: str
    records: list[dict] = field(default_factory=list)


def _parse(value: str, column: str, lineno: int):
    if value == "":
        return None
    if column == "converged":
        if value not in ("true", "false"):
            raise MalformedCsv(f"line {lineno}: converged must be true/false, got {value!r}")
        return value == "true"
    try:
        return float(value)
    except ValueError:
        raise MalformedCsv(f"line {lineno}: column {column!r} is not numeric: {value!r}") from None


def read_scan(path) -> tuple[list[str], list[dict]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedCsv(f"{path}: empty file") from None
        except csv.Error as exc:
            raise MalformedCsv(str(exc)) from exc
        if not {"param", "T", "error"} <= set(header):
            raise MalformedCsv(f"{path}: header lacks param/T/error columns: {header}")
        rows = []
        try:
            for lineno, raw in enumerate(reader, start=2):
                if len(raw) != len(header):
                    raise MalformedCsv(f"line {lineno}: expected {len(header)} fields, got {len(raw)}")
                row = {}
                for col, val in zip(header, raw):
                    if col in _NUMERIC or col == "converged":
                        row[col] = _parse(val, col, lineno)
                    else:
                        row[col] = val
                if row["param"] is None or row["T"] is None:
                    raise MalformedCsv(f"line {lineno}: missing param or T")
                rows.append(row)
        except csv.Error as exc:
            raise MalformedCsv(str(exc)) from exc
    return header, rows


def _ok(row, col) -> bool:
    return not row.get("error") and row.get(col) is not None and math.isfinite(row[col])


def _by_temperature(rows) -> dict[float, list[dict]]:
    groups = defaultdict(list)
    for row in rows:
        groups[row["T"]].append(row)
    return {T: sorted(groups[T], key=lambda r: r["param"]) for T in sorted(groups)}


def _by_param(rows) -> dict[float, list[dict]]:
    groups = defaultdict(list)
    for row in rows:
        groups[row["param"]].append(row)
    return {p: sorted(groups[p], key=lambda r: r["T"]) for p in sorted(groups)}


def _drop_records(rows, has_delta: bool, threshold: float) -> list[dict]:
    out = []
    for T, group in _by_temperature(rows).items():
        rec = {"T": T}
        good = [r for r in group if _ok(r, "F")]
        if good:
            best = min(good, key=lambda r: r["F"])
            rec["D"] = 1.0 - best["F"]
            rec["argmin"] = best["param"]
        if has_delta:
            deltas = [r["delta"] if _ok(r, "delta") else None for r in group]
            rec["params"] = [r["param"] for r in group]
            rec["delta_positive"] = [d is not None and d > threshold for d in deltas]
            finite = [d for d in deltas if d is not None]
            rec["delta_max"] = max(finite) if finite else None
        rec["failed"] = sum(1 for r in group if r.get("error"))
        out.append(rec)
    return out


def _phase_records(rows) -> list[dict]:
    out = []
    for p, group in _by_param(rows).items():
        good = [r for r in group if _ok(r, "phase")]
        steps = []
        for lo, hi in zip(good, good[1:]):
            jump = abs(math.remainder(hi["phase"] - lo["phase"], 2 * math.pi))
            if jump > PHASE_STEP:
                steps.append({"T_below": lo["T"], "T_above": hi["T"],
                              "phase_below": lo["phase"], "phase_above": hi["phase"]})
        rec = {"param": p, "steps": len(steps)}
        if len(steps) == 1:
            s = steps[0]
            rec.update(s, T_U=0.5 * (s["T_below"] + s["T_above"]))
        elif steps:
            rec["brackets"] = [[s["T_below"], s["T_above"]] for s in steps]
        out.append(rec)
    return out


def _gap_records(rows) -> list[dict]:
    out = []
    for p, group in _by_param(rows).items():
        good = [r for r in group if _ok(r, "gap")]
        gaps = [r["gap"] for r in good]
        rec = {"param": p, "monotone": all(b <= a for a, b in zip(gaps, gaps[1:]))}
        closed = [r["T"] for r in good if r["gap"] == 0]
        open_ = [r["T"] for r in good if r["gap"] > 0]
        if closed and open_:
            rec["T_c_bracket"] = [max(open_), min(closed)]
        out.append(rec)
    return out


def _edge_records(rows) -> list[dict]:
    out = []
    for T, group in _by_temperature(rows).items():
        good = [r for r in group if _ok(r, "ratio")]
        rec = {"T": T}
        if len(good) >= 2:
            jumps = [(abs(b["ratio"] - a["ratio"]), a["param"], b["param"]) for a, b in zip(good, good[1:])]
            size, lo, hi = max(jumps)
            rec.update(max_change=size, between=[lo, hi])
        out.append(rec)
    return out


def summarize(path, threshold: float = DELTA_THRESHOLD) -> Summary:
    """Transition report for a scan CSV; the report kind follows from its columns."""
    header, rows = read_scan(path)
    cols = set(header)
    if "F" in cols:
        return Summary("drop", _drop_records(rows, "delta" in cols, threshold))
    if "phase" in cols:
        return Summary("phase", _phase_records(rows))
    if "converged" in cols:
        return Summary("gap", _gap_records(rows))
    if "ratio" in cols:
        return Summary("edge", _edge_records(rows))
    raise MalformedCsv(f"{path}: no summarizable columns in {header}")


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, list):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    return str(value)


_TEXT_COLUMNS = {
    "drop": ["T", "D", "argmin", "delta_max", "failed"],
    "phase": ["param", "steps", "T_U", "T_below", "T_above"],
    "gap": ["param", "monotone", "T_c_bracket"],
    "edge": ["T", "max_change", "between"],
}


def render_text(summary: Summary) -> str:
    cols = _TEXT_COLUMNS[summary.kind]
    if summary.kind == "drop":
        cols = cols + ["positive"]
    table = [cols]
    for rec in summary.records:
        line = [_fmt(rec.get(c)) for c in cols if c != "positive"]
        if "positive" in cols:
            mask = rec.get("delta_positive")
            line.append("-" if mask is None else f"{sum(mask)}/{len(mask)}")
        table.append(line)
    widths = [max(len(r[i]) for r in table) for i in range(len(cols))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(r, widths)) for r in table) + "\n"


def render_jsonl(summary: Summary) -> str:
    return "".join(json.dumps({"kind": summary.kind, **rec}) + "\n" for rec in summary.records)
