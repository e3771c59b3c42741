"""Command-line scan driver.

    uhlmann-thermal fidelity-scan --model creutz --param M=0.5:1.5:101 \\
        --temp 0.01:1:5 --dparam 0.01 --out creutz.csv
    uhlmann-thermal summarize creutz.csv --jsonl creutz.jsonl

Options may also come from a ``key = value`` file given with ``--config``;
flags on the command line take precedence.
"""

from __future__ import annotations

import argparse
import sys

from .errors import InvalidSpec, MalformedCsv
from .scans import COMMANDS, ScanSpec, default_param, parse_param, parse_range, run_scan
from .summary import DELTA_THRESHOLD, render_jsonl, render_text, summarize

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_ALL_FAILED = 4

DEFAULTS = {
    "model": None,
    "param": None,
    "temp": None,
    "fix": [],
    "dparam": 0.0,
    "dtemp": 0.0,
    "nk": 501,
    "sites": 300,
    "nodes": 256,
    "window": 1,
    "mu_qp": None,
    "profile": False,
    "workers": 1,
    "out": None,
}

_CONVERT = {
    "dparam": float,
    "dtemp": float,
    "nk": int,
    "sites": int,
    "nodes": int,
    "window": int,
    "mu_qp": float,
    "workers": int,
}


def read_config(path: str) -> dict:
    """Parse a ``key = value`` file; ``#`` starts a comment and ``fix`` may repeat."""
    config: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidSpec(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise InvalidSpec(f"{path}:{lineno}: unknown key {key!r}")
            if key == "fix":
                config.setdefault("fix", []).append(value)
            elif key == "profile":
                config[key] = value.lower() in ("1", "true", "yes", "on")
            else:
                config[key] = value
    return config


def _scan_parser(sub, name: str) -> None:
    p = sub.add_parser(name, help=f"run a {name} and write CSV")
    p.add_argument("--model", choices=["creutz", "ssh", "kitaev", "bcs"])
    p.add_argument("--param", help="swept parameter, name=lo:hi:steps, name=v1,v2,... or name=value")
    p.add_argument("--fix", action="append", help="hold a parameter at name=value (repeatable)")
    p.add_argument("--temp", help="temperatures, lo:hi:steps, a comma-separated list or a single value")
    p.add_argument("--dparam", help="probe offset of the swept parameter")
    p.add_argument("--dtemp", help="probe offset of the temperature")
    p.add_argument("--nk", help="momentum points (default 501)")
    p.add_argument("--sites", help="open-chain length for edge-scan (default 300)")
    p.add_argument("--nodes", help="shell quadrature nodes for BCS (default 256)")
    p.add_argument("--window", help="edge sites averaged in edge-scan (default 1)")
    p.add_argument("--mu-qp", dest="mu_qp", help="quasi-particle chemical potential for edge-scan")
    p.add_argument("--profile", action="store_const", const=True, help="edge-scan: emit full site profiles")
    p.add_argument("--workers", help="worker processes (default 1)")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--config", help="key = value options file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uhlmann-thermal", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _scan_parser(sub, name)
    s = sub.add_parser("summarize", help="transition report for a scan CSV")
    s.add_argument("csv")
    s.add_argument("--jsonl", help="write machine-readable records here")
    s.add_argument("--threshold", type=float, default=DELTA_THRESHOLD, help="delta cut for the positivity mask")
    return parser


def _merge(args: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS)
    if args.config:
        opts.update(read_config(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            opts[key] = value
    for key, conv in _CONVERT.items():
        if opts[key] is not None and isinstance(opts[key], str):
            try:
                opts[key] = conv(opts[key])
            except ValueError:
                raise InvalidSpec(f"--{key.replace('_', '-')}: cannot parse {opts[key]!r}") from None
    return opts


def spec_from_args(args: argparse.Namespace) -> ScanSpec:
    opts = _merge(args)
    model = opts["model"]
    if model is None:
        raise InvalidSpec("--model is required")
    if opts["param"] is None:
        raise InvalidSpec(f"--param is required, e.g. {default_param(model)}=lo:hi:steps")
    if opts["temp"] is None:
        raise InvalidSpec("--temp is required")
    if opts["out"] is None:
        raise InvalidSpec("--out is required")
    name, values = parse_param(opts["param"])
    fixed = []
    for item in opts["fix"]:
        key, vals = parse_param(item)
        if len(vals) != 1:
            raise InvalidSpec(f"--fix takes a single value, got {item!r}")
        fixed.append((key, vals[0]))
    return ScanSpec(
        command=args.command,
        model=model,
        param=name,
        param_values=values,
        temps=parse_range(opts["temp"]),
        fixed=tuple(fixed),
        dparam=opts["dparam"],
        dtemp=opts["dtemp"],
        nk=opts["nk"],
        sites=opts["sites"],
        nodes=opts["nodes"],
        window=opts["window"],
        mu_qp=opts["mu_qp"],
        profile=bool(opts["profile"]),
        workers=opts["workers"],
        out=opts["out"],
    )


def _run_summarize(args) -> int:
    try:
        report = summarize(args.csv, threshold=args.threshold)
    except MalformedCsv as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    sys.stdout.write(render_text(report))
    if args.jsonl:
        try:
            with open(args.jsonl, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(render_jsonl(report))
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "summarize":
        return _run_summarize(args)
    try:
        spec = spec_from_args(args)
        result = run_scan(spec)
    except InvalidSpec as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    if result.failed:
        print(f"{result.failed} of {len(result.rows)} cells failed; see the error column", file=sys.stderr)
    return EXIT_ALL_FAILED if result.status == EXIT_ALL_FAILED else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
