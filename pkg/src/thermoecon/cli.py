"""Command-line entry point: ``thermoecon run|sweep|list-presets|check``."""

from __future__ import annotations

import argparse
import copy
import csv
import itertools
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Optional, Sequence

from . import analysis, output
from .checks import check_record
from .economy import EconomyCollapsed
from .integrator import StepRejected, run
from .scenario import (
    PRESETS, ScenarioError, ScenarioSpec, list_presets, load_scenario, load_yaml,
    spec_from_dict, spec_to_dict,
)

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2
OUT_ENV = "THERMOECON_OUT_DIR"
DEFAULT_OUT = "out"

log = logging.getLogger("thermoecon")


def out_dir(arg: Optional[str]) -> Path:
    """``--out`` wins, then ``$THERMOECON_OUT_DIR``, then ``./out``."""
    return Path(arg or os.environ.get(OUT_ENV) or DEFAULT_OUT)


def _formats(text: str) -> list[str]:
    fmts = [f.strip() for f in text.split(",") if f.strip()]
    for f in fmts:
        if f not in output.FORMATS:
            raise argparse.ArgumentTypeError(f"unknown format {f!r}; choose from {', '.join(output.FORMATS)}")
    return fmts


def _apply_overrides(spec: ScenarioSpec, args) -> ScenarioSpec:
    kw = {k: getattr(args, k) for k in ("dt", "horizon", "stride") if getattr(args, k, None) is not None}
    if not kw:
        return spec
    # route through the dict form so overrides get the same validation as files
    return spec_from_dict({**spec_to_dict(spec), **kw})


# ----------------------------------------------------------------------
# subcommands


def cmd_run(args) -> int:
    spec = _apply_overrides(load_scenario(args.scenario), args)
    record = run(spec)
    files = output.emit(record, args.format, out_dir(args.out))
    s = analysis.summary(record)
    print(f"{spec.name}: {record.status} at t={record.t_end:g}, {len(record)} samples")
    if s["pinch_time"] is not None or s["cum_G"] is not None:
        print(f"  pinch_time={s['pinch_time']} drop_time={s['drop_time']} cum_G={s['cum_G']}")
    for f in files:
        print(f"  wrote {f}")
    return EXIT_OK


SWEEP_KEYS = {"name", "base", "set", "grid", "jobs"}


def _set_path(data: dict, dotted: str, value: Any) -> None:
    """Assign ``value`` at ``a.b.0.c`` inside nested dicts/lists."""
    keys = dotted.split(".")
    node: Any = data
    for k in keys[:-1]:
        node = node[int(k)] if isinstance(node, list) else node.setdefault(k, {})
    last = keys[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value


def sweep_points(sweep: dict) -> tuple[str, list[tuple[dict[str, Any], ScenarioSpec]]]:
    """Expand a sweep description into ``(name, [(point, spec), ...])``."""
    if not isinstance(sweep, dict):
        raise ScenarioError("<root>", "sweep file must be a mapping")
    for key in sweep:
        if key not in SWEEP_KEYS:
            raise ScenarioError(str(key), "unknown key")
    base = sweep.get("base")
    if isinstance(base, str):
        if base not in PRESETS:
            raise ScenarioError("base", f"unknown preset {base!r}")
        base_dict = spec_to_dict(PRESETS[base])
    elif isinstance(base, dict):
        base_dict = spec_to_dict(spec_from_dict(base))
    else:
        raise ScenarioError("base", "expected a preset name or a scenario mapping")
    for path, value in (sweep.get("set") or {}).items():
        _set_path(base_dict, path, value)
    grid = sweep.get("grid")
    if not isinstance(grid, dict) or not grid:
        raise ScenarioError("grid", "expected a non-empty mapping of parameter path -> list of values")
    for path, values in grid.items():
        if not isinstance(values, list) or not values:
            raise ScenarioError(f"grid.{path}", "expected a non-empty list")
    name = sweep.get("name") or base_dict["name"]
    points = []
    for k, combo in enumerate(itertools.product(*grid.values())):
        point = dict(zip(grid, combo))
        data = copy.deepcopy(base_dict)
        for path, value in point.items():
            try:
                _set_path(data, path, value)
            except (KeyError, IndexError, ValueError, TypeError):
                raise ScenarioError(f"grid.{path}", "does not address a scenario field") from None
        data["name"] = f"{name}-{k:03d}"
        points.append((point, spec_from_dict(data)))
    return name, points


def _sweep_one(spec: ScenarioSpec):
    try:
        record = run(spec)
    except StepRejected as exc:
        return None, str(exc)
    return record, None


def cmd_sweep(args) -> int:
    path = Path(args.sweep)
    if not path.exists():
        raise ScenarioError("<source>", f"no sweep file {str(path)!r}")
    sweep = load_yaml(path.read_text())
    name, points = sweep_points(sweep)
    jobs = args.jobs or sweep.get("jobs") or os.cpu_count() or 1
    target = out_dir(args.out) / name
    target.mkdir(parents=True, exist_ok=True)
    specs = [spec for _, spec in points]
    if jobs > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_one, specs))
    else:
        results = [_sweep_one(s) for s in specs]
    params = list(points[0][0])
    summary_cols = ["run", *params, "status", "t_end", "pinch_time", "drop_time", "cum_G", "final_delta_mu"]
    failed = 0
    with (target / "summary.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(summary_cols)
        for (point, spec), (record, err) in zip(points, results):
            if record is None:
                failed += 1
                print(f"{spec.name}: {err}", file=sys.stderr)
                w.writerow([spec.name, *point.values(), "rejected", "", "", "", "", ""])
                continue
            output.emit(record, args.format, target)
            s = analysis.summary(record)
            w.writerow([spec.name, *point.values(), record.status,
                        *("" if s[k] is None else s[k] for k in summary_cols[len(params) + 2:])])
    print(f"{name}: {len(points)} runs, summary in {target / 'summary.csv'}")
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_list(args) -> int:
    for name in list_presets():
        if args.long:
            print(f"{name:15s} {PRESETS[name].description}")
        else:
            print(name)
    return EXIT_OK


def cmd_check(args) -> int:
    spec = _apply_overrides(load_scenario(args.scenario), args)
    record = run(spec)
    results = check_record(record, spec)
    for r in results:
        print(f"{'PASS' if r.ok else 'FAIL'}  {r.name}" + (f"  ({r.detail})" if r.detail else ""))
    print(f"{spec.name}: {record.status} at t={record.t_end:g}")
    return EXIT_OK if all(r.ok for r in results) else EXIT_NUMERIC


# ----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    # usage errors are validation errors (exit 1); 2 is kept for numerical failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="thermoecon", description="Resource sheets coupled to a Goodwin economy.")
    ap.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = ap.add_subparsers(dest="command", required=True)

    def numeric_overrides(p):
        p.add_argument("--dt", type=float, help="time step")
        p.add_argument("--horizon", type=float, help="final time")
        p.add_argument("--stride", type=float, help="sampling interval of the output")

    p = sub.add_parser("run", help="run a preset or scenario file")
    p.add_argument("scenario", help="preset name or path to a YAML scenario")
    numeric_overrides(p)
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    p.add_argument("--format", type=_formats, default=["csv"], help="comma-separated: csv,json,svg (default csv)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a parameter grid from a YAML sweep file")
    p.add_argument("sweep", help="path to the sweep file")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    p.add_argument("--format", type=_formats, default=["csv"], help="per-run output formats")
    p.add_argument("--jobs", type=int, help="worker processes (default: CPU count)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("list-presets", help="print the built-in presets")
    p.add_argument("-l", "--long", action="store_true", help="include descriptions")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("check", help="run a scenario and verify its invariants")
    p.add_argument("scenario", help="preset name or path to a YAML scenario")
    numeric_overrides(p)
    p.set_defaults(func=cmd_check)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help or a usage error
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (StepRejected, EconomyCollapsed, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
