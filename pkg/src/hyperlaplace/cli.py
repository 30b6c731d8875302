"""Command line entry point: ``hyperlaplace problem.hl [flags]``.

Exit status 0 means solved (and verified when ``--verify`` is given), 2 means
the search was exhausted, 1 means an error or a failed verification.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .dsl import parse_problem
from .errors import HyperLaplaceError, ParseError
from .genlaplace import PivotChoice
from .solver import DriverConfig, factorize_and_solve
from .verify import RealizationSpec, residual_check

SCHEMA = 1
NUMERIC_TOL = 1e-9

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_EXHAUSTED = 2


def _chain_max(text):
    try:
        n, k = text.split(":")
        return int(n), int(k)
    except ValueError:
        raise ValueError(f"chain bounds must look like N:K, got {text!r}") from None


def _pivots(text):
    text = text.strip()
    if text in ("all", "first"):
        return text
    if text.startswith("manual="):
        text = text[len("manual=") :]
    out = []
    for item in text.split(","):
        try:
            i, k = item.split(":")
            out.append(PivotChoice(int(i), int(k)))
        except ValueError:
            raise ValueError(f"pivot list must look like i:k[,i:k...], got {item!r}") from None
    return out


def _boolean(text):
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _from_file(config):
    """Driver settings from a ``config { }`` block."""
    out = {}
    for key, value in config.items():
        if key == "max_depth":
            out["max_depth"] = int(value)
        elif key == "chain_max":
            out["maxN"], out["maxK"] = _chain_max(value)
        elif key == "pivots":
            out["pivots"] = _pivots(value)
        elif key == "verify":
            out["verify"] = _boolean(value)
        elif key in ("seed", "points"):
            out[key] = int(value)
        else:
            raise ValueError(f"unknown config key {key!r}")
    return out


def build_config(args, file_config):
    """Flags override the file's ``config`` block, which overrides the defaults."""
    settings = _from_file(file_config)
    if args.max_depth is not None:
        settings["max_depth"] = args.max_depth
    if args.chain_max is not None:
        settings["maxN"], settings["maxK"] = _chain_max(args.chain_max)
    if args.pivots is not None:
        settings["pivots"] = _pivots(args.pivots)
    if args.verify:
        settings["verify"] = True
    if args.points is not None:
        settings["points"] = args.points
    if args.seed is not None:
        settings["seed"] = args.seed
    return DriverConfig(**settings)


def make_parser():
    ap = argparse.ArgumentParser(
        prog="hyperlaplace",
        description="Solve hyperbolic linear PDEs and systems in the plane by Laplace transformations.",
    )
    ap.add_argument("file", help="problem file (UTF-8)")
    ap.add_argument("--max-depth", type=int, help="maximum number of generalized transformations")
    ap.add_argument("--chain-max", metavar="N:K", help="forward and backward bounds for 2x2 chains")
    ap.add_argument("--pivots", metavar="all|first|manual=i:k,...", help="pivot strategy")
    ap.add_argument("--verify", action="store_true", help="check residuals of the solution")
    ap.add_argument("--points", type=int, help="number of numeric sample points")
    ap.add_argument("--seed", type=int, help="seed for realizations and sample points")
    ap.add_argument("--format", choices=("json", "text"), default="json")
    return ap


def _report(text, status, **fields):
    out = {"schema": SCHEMA, "status": status, "input": text}
    out.update(fields)
    out.setdefault("diagnostics", [])
    return out


def run(path, args):
    """``(report dict, exit status)`` for one problem file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        return _report(None, "error", diagnostics=[f"cannot read {path}: {exc}"]), EXIT_ERROR
    try:
        pf = parse_problem(text)
    except ParseError as exc:
        diag = {"kind": "syntax", "message": exc.message, "line": exc.line, "column": exc.column}
        return _report(text, "error", diagnostics=[diag]), EXIT_ERROR
    try:
        config = build_config(args, pf.config)
    except ValueError as exc:
        return _report(text, "error", diagnostics=[f"configuration: {exc}"]), EXIT_ERROR

    started = time.perf_counter()
    try:
        result = factorize_and_solve(pf, config)
    except HyperLaplaceError as exc:
        diag = {"kind": type(exc).__name__, "message": str(exc)}
        return _report(text, "error", config=config.to_json(), diagnostics=[diag]), EXIT_ERROR

    report = _report(
        text,
        result.status,
        problem_kind=result.problem_kind,
        config=config.to_json(),
        system=result.system.to_json() if result.system is not None else None,
        conversion=[r.to_json() for r in result.conversion],
        structure=result.structure.to_json() if result.structure is not None else None,
        path=[str(p) for p in result.path],
        trace=result.trace,
        chains=[c.to_json() for c in result.chains],
        solution=result.bundle.to_json() if result.bundle is not None else None,
        verification=None,
        diagnostics=list(result.diagnostics),
    )
    status = EXIT_OK if result.solved else EXIT_EXHAUSTED
    if result.solved and config.verify:
        spec = RealizationSpec(points=config.points, seed=config.seed)
        try:
            ver = residual_check(pf.problem, result.bundle, spec)
        except HyperLaplaceError as exc:
            report["diagnostics"].append({"kind": type(exc).__name__, "message": str(exc)})
            report["status"] = "error"
            return report, EXIT_ERROR
        report["verification"] = {**ver.to_json(), "tolerance": NUMERIC_TOL, "passed": ver.passed(NUMERIC_TOL)}
        if ver.passed(NUMERIC_TOL):
            report["status"] = "verified"
        else:
            report["status"] = "verification-failed"
            status = EXIT_ERROR
    report["elapsed_seconds"] = round(time.perf_counter() - started, 3)
    return report, status


def format_text(report):
    lines = [f"status: {report['status']}"]
    for d in report.get("diagnostics", []):
        if isinstance(d, dict):
            where = f" (line {d['line']}, column {d['column']})" if d.get("line") else ""
            lines.append(f"error: {d['message']}{where}")
        else:
            lines.append(f"note: {d}")
    if report.get("problem_kind"):
        lines.append(f"problem: {report['problem_kind']}")
    if report.get("system"):
        lines.append("characteristic system:")
        lines.extend(f"  {e}" for e in report["system"]["equations"])
    if report.get("path"):
        lines.append("pivots: " + ", ".join(report["path"]))
    for chain in report.get("chains", []):
        inv = ", ".join(f"h({i}) = {v}" for i, v in chain["invariants"].items())
        lines.append(f"chain {chain['status']}: {inv}")
    sol = report.get("solution")
    if sol:
        lines.append("solution:")
        lines.extend(f"  {l} = {v}" for l, v in sol["unknowns"].items())
        for r in sol["redefinitions"]:
            lines.append(f"  where {r}")
    ver = report.get("verification")
    if ver:
        exact = all(e["passed"] for e in ver["exact"])
        line = f"verification: exact {'ok' if exact else 'FAILED'}"
        if ver.get("max_residual") is not None:
            line += f", max residual {ver['max_residual']:.3g} over {ver['points']} points"
        lines.append(line)
    return "\n".join(lines) + "\n"


def main(argv=None):
    args = make_parser().parse_args(argv)
    report, status = run(args.file, args)
    if args.format == "json":
        sys.stdout.write(json.dumps(report, indent=2) + "\n")
    else:
        sys.stdout.write(format_text(report))
    return status


if __name__ == "__main__":
    sys.exit(main())
