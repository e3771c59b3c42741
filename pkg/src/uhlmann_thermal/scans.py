"""Grid scans behind the command-line interface.

A scan is a row-major sweep over (parameter value, temperature).  Each
parameter row is computed independently by :func:`compute_row`, so the CSV
is identical for any number of workers.  Numerical failures in a cell are
recorded in its ``error`` column instead of aborting the scan.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial

import numpy as np

from .bcs import gap_curve, gap_value, prime_gaps
from .errors import InvalidSpec, UhlmannError
from .fidelity import fidelity_total
from .holonomy import uhlmann_holonomy
from .models import BCS, DEFAULT_SWEEP, MODELS, MomentumGrid, ShellGrid, parameter_names
from .realspace import BDG, build_open_chain, default_mu_qp, eigh, thermal_occupations
from .spectra import winding_number

COMMANDS = (
    "fidelity-scan",
    "delta-scan",
    "holonomy-scan",
    "phase-scan",
    "edge-scan",
    "bcs-scan",
    "gap-curve",
)

COLUMNS = {
    "fidelity-scan": ["param", "T", "F", "F_density", "trace_sqrt", "delta", "error"],
    "delta-scan": ["param", "T", "delta", "F", "trace_sqrt", "error"],
    "holonomy-scan": ["param", "T", "theta", "phase", "winding", "error"],
    "phase-scan": ["param", "T", "theta", "phase", "error"],
    "edge-scan": ["param", "T", "n_edge", "n_bulk", "ratio", "error"],
    "edge-profile": ["param", "T", "site", "n", "error"],
    "bcs-scan": ["param", "T", "gap", "F", "F_density", "trace_sqrt", "delta", "error"],
    "gap-curve": ["param", "T", "gap", "converged", "iterations", "residual", "error"],
}

# exception types that become a per-cell error instead of aborting the scan
CELL_ERRORS = (UhlmannError, ValueError, ArithmeticError, RuntimeError, np.linalg.LinAlgError)


@dataclass(frozen=True)
class ScanSpec:
    command: str
    model: str
    param: str
    param_values: tuple[float, ...]
    temps: tuple[float, ...]
    fixed: tuple[tuple[str, float], ...] = ()
    dparam: float = 0.0
    dtemp: float = 0.0
    nk: int = 501
    sites: int = 300
    nodes: int = 256
    window: int = 1
    mu_qp: float | None = None
    profile: bool = False
    workers: int = 1
    out: str = "scan.csv"

    @property
    def columns(self) -> list[str]:
        if self.command == "edge-scan" and self.profile:
            return COLUMNS["edge-profile"]
        return COLUMNS[self.command]

    def base_model(self, value: float):
        cls = MODELS[self.model]
        return cls(**dict(self.fixed), **{self.param: value})


def parse_range(text: str) -> tuple[float, ...]:
    """``lo:hi:steps`` (inclusive, linear), a comma-separated list, or a single number."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return tuple(float(x) for x in text.split(","))
        if len(parts) == 3:
            lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
            if steps < 1:
                raise InvalidSpec(f"steps must be >= 1 in {text!r}")
            if steps == 1:
                return (lo,)
            return tuple(float(x) for x in np.linspace(lo, hi, steps))
    except ValueError as exc:
        raise InvalidSpec(f"cannot parse range {text!r}: {exc}") from exc
    raise InvalidSpec(f"range must be lo:hi:steps, a list or a number, got {text!r}")


def parse_param(text: str) -> tuple[str, tuple[float, ...]]:
    if "=" not in text:
        raise InvalidSpec(f"--param expects name=lo:hi:steps, got {text!r}")
    name, rng = text.split("=", 1)
    return name.strip(), parse_range(rng.strip())


def validate(spec: ScanSpec) -> None:
    if spec.command not in COMMANDS:
        raise InvalidSpec(f"unknown command {spec.command!r}")
    if spec.model not in MODELS:
        raise InvalidSpec(f"unknown model {spec.model!r}; choose from {sorted(MODELS)}")
    names = parameter_names(MODELS[spec.model])
    if spec.param not in names:
        raise InvalidSpec(f"{spec.model} has no parameter {spec.param!r}; choose from {names}")
    for name, value in spec.fixed:
        if name not in names:
            raise InvalidSpec(f"{spec.model} has no parameter {name!r}")
        if name == spec.param:
            raise InvalidSpec(f"{name!r} is both swept and fixed")
        if not math.isfinite(value):
            raise InvalidSpec(f"fixed parameter {name} is not finite")
    values = spec.param_values + spec.temps
    if not spec.param_values or not spec.temps:
        raise InvalidSpec("empty parameter or temperature axis")
    if not all(math.isfinite(v) for v in values):
        raise InvalidSpec("axis values must be finite")
    if any(T < 0 for T in spec.temps):
        raise InvalidSpec("temperatures must be >= 0")
    if spec.workers < 1:
        raise InvalidSpec("--workers must be >= 1")
    if spec.nk < 3:
        raise InvalidSpec("--nk must be >= 3")

    is_bcs = spec.model == "bcs"
    if spec.command in ("fidelity-scan", "delta-scan", "bcs-scan"):
        if spec.dparam == 0 and spec.dtemp == 0:
            raise InvalidSpec(f"{spec.command} needs a nonzero --dparam or --dtemp probe")
    if spec.command in ("holonomy-scan", "phase-scan", "edge-scan") and is_bcs:
        raise InvalidSpec(f"{spec.command} needs a lattice model (creutz, ssh, kitaev)")
    if spec.command in ("bcs-scan", "gap-curve") and not is_bcs:
        raise InvalidSpec(f"{spec.command} is defined for --model bcs only")
    if spec.command in ("phase-scan", "gap-curve") and len(spec.param_values) != 1:
        raise InvalidSpec(f"{spec.command} sweeps temperature only; give a single --param value")
    if spec.command == "edge-scan":
        if spec.sites < 8:
            raise InvalidSpec("edge-scan needs --sites >= 8")
        if any(T <= 0 for T in spec.temps):
            raise InvalidSpec("edge-scan needs T > 0")
        if not 1 <= spec.window <= spec.sites // 2:
            raise InvalidSpec("--window must lie in [1, sites/2]")


def _fail(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


def _grid(spec: ScanSpec, model):
    if isinstance(model, BCS):
        return ShellGrid(spec.nodes, model.omega_D)
    return MomentumGrid(spec.nk)


def _prime_bcs(spec: ScanSpec, p: float) -> None:
    try:
        m1 = spec.base_model(p)
        m2 = spec.base_model(p + spec.dparam)
    except CELL_ERRORS:
        return
    prime_gaps(m1.V, spec.temps, m1)
    prime_gaps(m2.V, [T + spec.dtemp for T in spec.temps if T + spec.dtemp >= 0], m2)


def _probe_rows(spec: ScanSpec, p: float, with_gap: bool) -> list[dict]:
    if spec.model == "bcs":
        _prime_bcs(spec, p)
    rows = []
    for T in spec.temps:
        row = {"param": p, "T": T}
        try:
            m1 = replace(spec.base_model(p), T=T)
            m2 = replace(spec.base_model(p + spec.dparam), T=T + spec.dtemp)
            grid = _grid(spec, m1)
            rep = fidelity_total(m1, m2, grid)
            if with_gap:
                row["gap"] = gap_value(m1)
            row.update(F=rep.F, F_density=rep.F_density, trace_sqrt=rep.trace_sqrt, delta=rep.delta)
        except CELL_ERRORS as exc:
            row["error"] = _fail(exc)
        rows.append(row)
    return rows


def _holonomy_rows(spec: ScanSpec, p: float, with_winding: bool) -> list[dict]:
    rows = []
    try:
        model = spec.base_model(p)
        grid = MomentumGrid(spec.nk)
        winding = winding_number(model, grid) if with_winding else None
    except CELL_ERRORS as exc:
        return [{"param": p, "T": T, "error": _fail(exc)} for T in spec.temps]
    for T in spec.temps:
        row = {"param": p, "T": T}
        try:
            res = uhlmann_holonomy(model, T, grid)
            row.update(theta=res.theta, phase=res.phase)
            if with_winding:
                row["winding"] = winding
        except CELL_ERRORS as exc:
            row["error"] = _fail(exc)
        rows.append(row)
    return rows


def _edge_rows(spec: ScanSpec, p: float) -> list[dict]:
    try:
        model = spec.base_model(p)
        chain = build_open_chain(model, spec.sites)
        eig = None if chain.kind == BDG else eigh(chain)
        mu_qp = default_mu_qp(model) if spec.mu_qp is None else spec.mu_qp
    except CELL_ERRORS as exc:
        return [{"param": p, "T": T, "error": _fail(exc)} for T in spec.temps]
    rows = []
    for T in spec.temps:
        try:
            prof = thermal_occupations(model, spec.sites, T, mu_qp, chain=chain, eig=eig)
        except CELL_ERRORS as exc:
            rows.append({"param": p, "T": T, "error": _fail(exc)})
            continue
        if spec.profile:
            rows.extend({"param": p, "T": T, "site": i + 1, "n": float(x)} for i, x in enumerate(prof.n))
            continue
        n_edge = float(np.mean(prof.n[: spec.window]))
        n_bulk = float(prof.n[len(prof.n) // 2])
        row = {"param": p, "T": T, "n_edge": n_edge, "n_bulk": n_bulk}
        if abs(n_bulk) < 1e-15:
            row["error"] = "EdgeBulkUndefined: bulk occupation vanishes"
        else:
            row["ratio"] = n_edge / n_bulk
        rows.append(row)
    return rows


def _gap_rows(spec: ScanSpec, p: float) -> list[dict]:
    try:
        model = spec.base_model(p)
        sols = gap_curve(model.V, spec.temps, model)
    except CELL_ERRORS as exc:
        return [{"param": p, "T": T, "error": _fail(exc)} for T in spec.temps]
    rows = []
    for T, sol in zip(spec.temps, sols):
        row = {"param": p, "T": T, "gap": sol.delta, "converged": sol.converged,
               "iterations": sol.iterations, "residual": sol.residual}
        if not sol.converged:
            row["error"] = "NoConvergence: gap bisection hit the iteration cap"
        rows.append(row)
    return rows


def compute_row(spec: ScanSpec, p: float) -> list[dict]:
    """All cells of one parameter row, in temperature order."""
    cmd = spec.command
    if cmd in ("fidelity-scan", "delta-scan"):
        return _probe_rows(spec, p, with_gap=False)
    if cmd == "bcs-scan":
        return _probe_rows(spec, p, with_gap=True)
    if cmd == "holonomy-scan":
        return _holonomy_rows(spec, p, with_winding=True)
    if cmd == "phase-scan":
        return _holonomy_rows(spec, p, with_winding=False)
    if cmd == "edge-scan":
        return _edge_rows(spec, p)
    if cmd == "gap-curve":
        return _gap_rows(spec, p)
    raise InvalidSpec(f"unknown command {cmd!r}")


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        # shortest round-trip representation
        return repr(float(value))
    return str(value)


def compute_rows(spec: ScanSpec) -> list[dict]:
    work = partial(compute_row, spec)
    if spec.workers == 1 or len(spec.param_values) == 1:
        chunks = [work(p) for p in spec.param_values]
    else:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            chunks = list(pool.map(work, spec.param_values))
    return [row for chunk in chunks for row in chunk]


def render_csv(spec: ScanSpec, rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cols = spec.columns
    writer.writerow(cols)
    for row in rows:
        writer.writerow([format_value(row.get(c)) for c in cols])
    return buf.getvalue()


@dataclass(frozen=True)
class ScanResult:
    rows: list
    failed: int

    @property
    def status(self) -> int:
        return 4 if self.rows and self.failed == len(self.rows) else 0


def run_scan(spec: ScanSpec) -> ScanResult:
    """Validate, compute and write the CSV; raises InvalidSpec or OSError."""
    validate(spec)
    # fail on an unwritable destination before doing any work
    with open(spec.out, "w", encoding="utf-8", newline="") as fh:
        rows = compute_rows(spec)
        fh.write(render_csv(spec, rows))
    failed = sum(1 for r in rows if r.get("error"))
    return ScanResult(rows=rows, failed=failed)


def default_param(model: str) -> str:
    return DEFAULT_SWEEP[model]
