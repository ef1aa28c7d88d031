"""Command-line front end: ``gmmflow {diagnose,transport,bench-table,bench-runtime,split}``."""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import bench
from .bounds import min_segments, segmentwise_bound_sum, split_path
from .errors import LocalityViolated, NotSpd, NumericalError, ValidationError
from .gaussian import pair_report
from .io import load_gmm, write_csv, write_snapshots
from .mixture import build_flow
from .scenarios import ScenarioSpec, builtin_table_scenarios
from .trajectory import IntegratorConfig, integrate, sample_source

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _emit(header: Sequence[str], rows: List[list], fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "csv":
        write_csv(out, header, rows)
    elif fmt == "json":
        json.dump([dict(zip(header, r)) for r in rows], out, indent=2, default=_json_default)
        out.write("\n")
    else:
        cells = [[_display(v) for v in r] for r in rows]
        widths = [max(len(h), *(len(c[k]) for c in cells)) if cells else len(h) for k, h in enumerate(header)]
        out.write("  ".join(h.rjust(w) for h, w in zip(header, widths)) + "\n")
        for c in cells:
            out.write("  ".join(v.rjust(w) for v, w in zip(c, widths)) + "\n")


def _json_default(v):
    if isinstance(v, np.generic):
        return v.item()
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _display(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.2f}" if abs(v) < 1e9 else f"{v:.3g}"
    return "" if v is None else str(v)


def _thresholds(args) -> dict:
    return dict(rho_max=args.rho_max, comm_max=args.comm_max, budget=args.budget)


def cmd_diagnose(args) -> int:
    src, dst = load_gmm(args.src), load_gmm(args.dst)
    rows = bench.diagnose(src, dst, **_thresholds(args))
    _emit(bench.DIAGNOSE_COLUMNS, [r.values() for r in rows], args.format)
    return EXIT_OK


def _parse_times(text: Optional[str]) -> List[float]:
    if not text:
        return []
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ValidationError(f"--snapshots: {exc}") from exc


def cmd_transport(args) -> int:
    src, dst = load_gmm(args.src), load_gmm(args.dst)
    flow = build_flow(src, dst, args.method, epsilon=args.epsilon)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    pi = flow.coupling.pi
    write_csv(
        out / "coupling.csv",
        ["i", "j", "pi", "cost"],
        ([i, j, float(pi[i, j]), float(flow.coupling.cost[i, j])]
         for i in range(pi.shape[0]) for j in range(pi.shape[1])),
    )
    pair_rows = []
    for i, a in enumerate(src.components):
        for j, b in enumerate(dst.components):
            rep = pair_report(a, b)
            pair_rows.append([i, j, rep.surrogate_total, rep.w2_total, rep.gap])
    write_csv(out / "pair_costs.csv", ["i", "j", "surrogate_cost", "w2sq", "gap"], pair_rows)

    if args.particles > 0:
        try:
            times = _parse_times(args.snapshots) or [0.0, 1.0]
            cfg = IntegratorConfig(steps=args.steps)
            particles = sample_source(src, args.particles, args.seed)
            res = integrate(flow, particles, cfg, snapshots=times)
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc
        write_snapshots(out / "particles.csv", res.snapshots)

    print(f"marginal_error {flow.coupling.marginal_error!r}")
    print(f"total_cost {flow.coupling.transport_cost!r}")
    return EXIT_OK


def _load_scenarios(source: str) -> List[ScenarioSpec]:
    if source == "builtin":
        return builtin_table_scenarios()
    text = Path(source).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{source}: {exc}") from exc
    try:
        return [ScenarioSpec.from_dict(d) for d in data]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{source}: bad scenario entry ({exc})") from exc


def cmd_bench_table(args) -> int:
    rows = bench.bench_table(_load_scenarios(args.scenarios), **_thresholds(args))
    columns = bench.DIAGNOSE_COLUMNS if args.full else bench.TABLE_COLUMNS
    _write_or_emit(args, columns, [r.values(columns) for r in rows])
    return EXIT_OK


def cmd_bench_runtime(args) -> int:
    try:
        dims = [int(d) for d in args.dims.split(",") if d.strip()]
    except ValueError as exc:
        raise ValidationError(f"--dims: {exc}") from exc
    try:
        rows = bench.bench_runtime(dims, args.scenario, args.repeats)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    _write_or_emit(args, bench.RUNTIME_COLUMNS, [list(r) for r in rows])
    return EXIT_OK


def _write_or_emit(args, header, rows):
    if args.out:
        write_csv(args.out, header, rows)
    else:
        _emit(header, rows, args.format)


def _component(gmm, index: int, label: str):
    if not 0 <= index < gmm.n_components:
        raise ValidationError(f"{label} component {index} out of range [0, {gmm.n_components})")
    return gmm.components[index]


def cmd_split(args) -> int:
    src = _component(load_gmm(args.src), args.i, "source")
    dst = _component(load_gmm(args.dst), args.j, "target")
    n = args.n if args.n else min_segments(src, dst)
    plan = split_path(src, dst, n)
    header = ["segment", "rho_hat", "valid", "true_gap", "bound_value"]
    rows = []
    for k, (a, b) in enumerate(plan.segments()):
        gb = plan.bounds[k]
        rows.append([k, gb.rho_hat, gb.valid, pair_report(a, b).gap, gb.bound_value])
    _emit(header, rows, args.format)
    total = segmentwise_bound_sum(plan)
    print(f"n_segments {n}", file=sys.stderr)
    print(f"bound_sum {total.value!r}" if total.valid else f"bound_sum invalid segments {list(total.offending)}",
          file=sys.stderr)
    return EXIT_OK


def _add_thresholds(p):
    p.add_argument("--rho-max", type=float, default=bench.RHO_MAX, help="recommend A only below this rho_hat")
    p.add_argument("--comm-max", type=float, default=bench.COMM_MAX, help="recommend A only below this comm")
    p.add_argument("--budget", type=float, default=math.inf, help="recommend A only if bound_value <= budget")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gmmflow", description="Training-free flow matching between GMMs.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    fmt = dict(choices=("csv", "json", "table"), default="csv")

    p = sub.add_parser("diagnose", help="per-pair cost diagnostics and method recommendation")
    p.add_argument("src")
    p.add_argument("dst")
    p.add_argument("--format", **fmt)
    _add_thresholds(p)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("transport", help="build the mixture flow and integrate particles")
    p.add_argument("src")
    p.add_argument("dst")
    p.add_argument("--method", choices=("A", "B"), default="A")
    p.add_argument("--epsilon", type=float, default=5e-2)
    p.add_argument("--particles", type=int, default=1000)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--snapshots", default="0,1", help="comma-separated times on the step grid")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_transport)

    p = sub.add_parser("bench-table", help="diagnostics table over scenario specs")
    p.add_argument("--scenarios", default="builtin", help="'builtin' or a JSON list of scenario specs")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--format", **fmt)
    p.add_argument("--full", action="store_true", help="include bound, min_segments and recommendation")
    _add_thresholds(p)
    p.set_defaults(func=cmd_bench_table)

    p = sub.add_parser("bench-runtime", help="stage timings of the transport construction")
    p.add_argument("--dims", default="2,50,100,200,300")
    p.add_argument("--scenario", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--format", **fmt)
    p.set_defaults(func=cmd_bench_runtime)

    p = sub.add_parser("split", help="split one component pair into locally valid segments")
    p.add_argument("src")
    p.add_argument("dst")
    p.add_argument("--i", type=int, default=0, help="source component index")
    p.add_argument("--j", type=int, default=0, help="target component index")
    p.add_argument("-n", type=int, default=0, help="segment count (default: min_segments)")
    p.add_argument("--format", **fmt)
    p.set_defaults(func=cmd_split)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NotSpd, NumericalError, LocalityViolated) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
