"""Command-line front end: ``curvlab {check,constants,integrate,sobolev,export-zoo}``.

Every subcommand builds one JSON report ``{version, config, checks, results}``
plus a separate ``timestamp`` field; the markdown format is rendered from that
same report. ``check`` exits 1 iff some check has verdict "fail" (inapplicable
checks and failing pinching predicates do not count as failures).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .checks import ALL_CHECKS, CHECKS, FAIL, TOLERANCES, check_constants_ordering
from .constants import constants
from .curvature import chunk_size, concat_bundles, curvature_bundle
from .quadrature import FIELDS, integrate, lp_norm, sobolev_quotient, thm12_report
from .zoo import ZOO, MetricSpec, load_metric, sample_points, save_metric, zoo

EXPORT_DEFAULTS = {
    "euclidean": {"n": 4},
    "sphere": {"n": 4, "r": 1.0},
    "hyperbolic": {"n": 4},
    "product_spheres": {"p": 2, "a": 1.0, "q": 2, "b": 1.0},
    "conformal": {"n": 4, "f": "0.1*x1^2"},
    "perturbation": {"n": 4, "seed": 7, "eps": 0.02},
}


class CLIError(Exception):
    pass


def _scalar(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_params(items) -> dict:
    """``["n=4", "p=2,a=1"]`` -> ``{"n": 4, "p": 2, "a": 1}``."""
    out = {}
    for item in items or []:
        # a conformal factor may itself contain commas only inside parentheses
        parts, depth, cur = [], 0, ""
        for ch in item:
            depth += ch == "("
            depth -= ch == ")"
            if ch == "," and depth == 0:
                parts.append(cur)
                cur = ""
            else:
                cur += ch
        parts.append(cur)
        for part in parts:
            if "=" not in part:
                raise CLIError(f"parameter {part!r} is not of the form name=value")
            k, v = part.split("=", 1)
            out[k.strip()] = _scalar(v.strip())
    return out


def resolve_metric(source: str, params: dict) -> MetricSpec:
    if source.startswith("zoo:"):
        return zoo(source[4:], params)
    if params:
        raise CLIError("--param only applies to zoo metrics")
    try:
        return load_metric(source)
    except OSError as exc:
        raise CLIError(f"cannot read metric file {source}: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise CLIError(f"invalid metric file {source}: {exc}") from exc


def thread_count() -> int:
    raw = os.environ.get("CURVLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise CLIError(f"CURVLAB_THREADS must be an integer, got {raw!r}") from None


def parallel_bundle(metric, points, order: int, threads: int):
    """Curvature bundle on ``points``; chunks are evaluated concurrently but merged in order.

    The chunking is the same one the serial path uses, so every point sees
    identical batch shapes and the result is bitwise independent of ``threads``.
    """
    size = chunk_size(points.shape[-1], order)
    if threads <= 1 or len(points) <= size:
        return curvature_bundle(metric, points, order=order)
    chunks = [points[s:s + size] for s in range(0, len(points), size)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda p: curvature_bundle(metric, p, order=order), chunks))
    return concat_bundles(parts)


def parse_tolerances(items) -> dict:
    tols = {}
    for k, v in parse_params(items).items():
        if k not in TOLERANCES:
            raise CLIError(f"unknown tolerance {k!r}; known: {', '.join(TOLERANCES)}")
        tols[k] = float(v)
    return tols


# ---------------------------------------------------------------------------
# reports


def make_report(command: str, config: dict, checks=(), results=None) -> dict:
    return {
        "version": __version__,
        "command": command,
        "config": config,
        "checks": [c.to_json() for c in checks],
        "results": results or {},
    }


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.10g}"
    if v is None:
        return "-"
    return str(v)


def to_markdown(report: dict) -> str:
    lines = [f"# curvlab {report['command']} report", "", f"version {report['version']}", ""]
    cfg = report["config"]
    lines += ["## Configuration", ""] + [f"- {k}: `{json.dumps(cfg[k])}`" for k in cfg] + [""]
    if report["checks"]:
        lines += ["## Checks", "", "| check | metric | verdict | residual/margin | tolerance | points |",
                  "|---|---|---|---|---|---|"]
        for c in report["checks"]:
            lines.append(
                f"| {c['name']} | {c['metric']} | {c['verdict']} | {_fmt(c['residual_or_margin'])} "
                f"| {_fmt(c['tolerance'])} | {c['points']} |"
            )
        lines.append("")
    if report["results"]:
        lines += ["## Results", ""]
        for key, val in report["results"].items():
            if isinstance(val, dict):
                lines += [f"### {key}", "", "| quantity | value |", "|---|---|"]
                lines += [f"| {k} | {_fmt(v)} |" for k, v in val.items()]
                lines.append("")
            else:
                lines.append(f"- {key}: {_fmt(val)}")
        lines.append("")
    return "\n".join(lines)


def emit(report: dict, fmt: str, output: str | None) -> None:
    if fmt == "json":
        text = json.dumps({**report, "timestamp": datetime.now(timezone.utc).isoformat()}, indent=2) + "\n"
    else:
        text = to_markdown(report)
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(args) -> int:
    names = list(ALL_CHECKS) if args.all else list(args.check or [])
    if not names:
        raise CLIError("select checks with --check NAME (repeatable) or --all")
    unknown = [c for c in names if c not in ALL_CHECKS]
    if unknown:
        raise CLIError(f"unknown check(s): {', '.join(unknown)}; known: {', '.join(ALL_CHECKS)}")
    tols = parse_tolerances(args.tol)
    params = parse_params(args.param)
    metric = resolve_metric(args.metric, params)
    points = sample_points(metric, args.samples, args.seed)
    bundle = None
    if any(c in CHECKS for c in names):
        bundle = parallel_bundle(metric, points, 4, thread_count())
    reports = []
    for c in names:
        if c == "constants_ordering":
            reports.append(check_constants_ordering())
        else:
            reports.append(CHECKS[c](metric, points, tolerances=tols, bundle=bundle))
    config = {
        "metric": args.metric,
        "params": params,
        "checks": names,
        "seed": args.seed,
        "samples": args.samples,
        "tolerances": tols,
    }
    emit(make_report("check", config, reports), args.format, args.output)
    return 1 if any(r.verdict == FAIL for r in reports) else 0


def cmd_constants(args) -> int:
    rows = {f"n={n}": constants(n).to_json() for n in args.n}
    report = make_report("constants", {"n": args.n}, [check_constants_ordering()], rows)
    emit(report, args.format, args.output)
    return 0


def _compact_metric(args):
    return resolve_metric(args.metric, parse_params(args.param))


def cmd_integrate(args) -> int:
    metric = _compact_metric(args)
    results = {}
    for name in args.field:
        if args.p is None:
            r = integrate(metric, name, resolution=args.resolution)
            results[f"integral[{name}]"] = r.to_json()
        else:
            r = lp_norm(metric, name, args.p, resolution=args.resolution)
            results[f"L{args.p}[{name}]"] = r.to_json()
    config = {"metric": args.metric, "params": parse_params(args.param), "fields": args.field,
              "p": args.p, "resolution": args.resolution}
    emit(make_report("integrate", config, results=results), args.format, args.output)
    return 0


def cmd_sobolev(args) -> int:
    metric = _compact_metric(args)
    us = args.u or ["1"]
    results = {f"quotient[{u}]": sobolev_quotient(metric, u, resolution=args.resolution).to_json() for u in us}
    checks = []
    if args.pinching:
        checks.append(thm12_report(metric, us, resolution=args.resolution))
    config = {"metric": args.metric, "params": parse_params(args.param), "u": us,
              "resolution": args.resolution, "pinching": args.pinching}
    emit(make_report("sobolev", config, checks, results), args.format, args.output)
    return 0


def cmd_export_zoo(args) -> int:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    for name in sorted(ZOO):
        path = out / f"{name}.json"
        save_metric(zoo(name, EXPORT_DEFAULTS[name]), path)
        written[name] = str(path)
    report = make_report("export-zoo", {"output_dir": str(out)}, results={"files": written})
    emit(report, args.format, args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curvlab", description="Curvature identity laboratory.")
    parser.add_argument("--version", action="version", version=f"curvlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=["json", "markdown"], default="json")
        p.add_argument("--output", help="write the report here instead of stdout")

    def metric_args(p):
        p.add_argument("--metric", required=True, help="zoo:NAME or a metric definition file")
        p.add_argument("--param", action="append", help="name=value (repeatable, comma lists allowed)")

    p = sub.add_parser("check", help="run pointwise identity and pinching checks")
    metric_args(p)
    p.add_argument("--check", action="append", help=f"one of {', '.join(ALL_CHECKS)}")
    p.add_argument("--all", action="store_true", help="run every check")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--tol", action="append", help="tolerance override name=value")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("constants", help="tabulate dimensional constants")
    p.add_argument("--n", type=int, action="append", required=True)
    common(p)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("integrate", help="integrate curvature fields over a compact zoo member")
    metric_args(p)
    p.add_argument("--field", action="append", choices=sorted(FIELDS), required=True)
    p.add_argument("--p", type=float, help="report the L^p norm instead of the integral")
    p.add_argument("--resolution", type=int)
    common(p)
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("sobolev", help="Sobolev quotients of test functions in angular coordinates")
    metric_args(p)
    p.add_argument("--u", action="append", help="test function expression (default 1)")
    p.add_argument("--pinching", action="store_true", help="also evaluate the integral pinching condition")
    p.add_argument("--resolution", type=int)
    common(p)
    p.set_defaults(func=cmd_sobolev)

    p = sub.add_parser("export-zoo", help="write every zoo member as a metric definition file")
    p.add_argument("output_dir")
    common(p)
    p.set_defaults(func=cmd_export_zoo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CLIError, ValueError) as exc:
        print(f"curvlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
