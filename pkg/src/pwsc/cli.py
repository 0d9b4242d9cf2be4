"""Command-line interface.

Subcommands: validate, classify, simulate, sweep, shadow-check, fixtures.
Exit codes: 0 success, 1 usage/IO/parse error, 2 domain-level failure
(failed hypothesis, nothing found). CSV output uses fixed 17-significant-
digit formatting so repeated runs are byte-identical; wall-clock times
appear only in the run manifest written alongside file outputs.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

from . import __version__
from .bifurcation import (
    ClassificationError,
    EquilibriumError,
    NotAHopfError,
    classify_corner,
    classify_fold_hopf,
)
from .expr import ExprError
from .integrate import (
    IntegratorConfig,
    integrate,
    write_events_csv,
    write_trajectory_csv,
)
from .orbits import (
    CycleSearchError,
    shadow_compare,
    sweep_amplitude,
    write_shadow_csv,
    write_sweep_csv,
)
from .system import (
    ConfigError,
    HypothesisError,
    fixture_names,
    fixture_path,
    load_system,
    validate,
)

USAGE_ERROR = 1
DOMAIN_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(USAGE_ERROR)


def _manifest(command: str, input_path, params: dict, outputs: list, started: float):
    return {
        "command": command,
        "input": str(input_path) if input_path else None,
        "parameters": params,
        "tool_version": __version__,
        "wall_clock_seconds": time.time() - started,
        "outputs": [str(p) for p in outputs],
    }


def _write_manifest(manifest: dict, outputs: list, explicit):
    path = explicit
    if path is None and outputs:
        path = f"{outputs[0]}.manifest.json"
    if path is None:
        return
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _print_json(obj):
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def cmd_validate(args) -> int:
    started = time.time()
    sys_def = load_system(args.system)
    report = validate(sys_def)
    _print_json(report.as_dict())
    _write_manifest(
        _manifest("validate", args.system, {}, [], started), [], args.manifest
    )
    return 0 if report.passed else DOMAIN_ERROR


def cmd_classify(args) -> int:
    started = time.time()
    sys_def = load_system(args.system)
    report = classify_fold_hopf(sys_def) if args.fold else classify_corner(sys_def)
    payload = report.as_dict()
    _print_json(payload)
    outputs = []
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        outputs.append(args.json)
    _write_manifest(
        _manifest("classify", args.system, {"fold": bool(args.fold)}, outputs, started),
        outputs,
        args.manifest,
    )
    return 0


def cmd_simulate(args) -> int:
    started = time.time()
    sys_def = load_system(args.system)
    if args.lam is not None:
        sys_def = sys_def.with_lambda(args.lam)
    if not (math.isfinite(args.x0) and math.isfinite(args.y0)):
        raise ValueError(f"initial state must be finite, got ({args.x0}, {args.y0})")
    if args.t_max < 0:
        raise ValueError("t-max must be nonnegative")
    cfg = IntegratorConfig(rtol=args.rtol, atol=args.atol)
    traj = integrate(
        sys_def,
        (args.x0, args.y0),
        (0.0, args.t_max),
        cfg,
        mode="backward" if args.backward else "forward",
    )
    write_trajectory_csv(traj, args.out)
    outputs = [args.out]
    if args.events_out:
        write_events_csv(traj, args.events_out)
        outputs.append(args.events_out)
    params = {
        "lambda": sys_def.lam,
        "x0": args.x0,
        "y0": args.y0,
        "t_max": args.t_max,
        "rtol": args.rtol,
        "atol": args.atol,
        "backward": bool(args.backward),
        "termination": traj.reason,
        "backend": traj.backend,
    }
    _write_manifest(
        _manifest("simulate", args.system, params, outputs, started), outputs, args.manifest
    )
    return 0


def cmd_sweep(args) -> int:
    started = time.time()
    sys_def = load_system(args.system)
    if not args.lambda_min < args.lambda_max:
        raise ValueError("empty lambda range: require lambda-min < lambda-max")
    if args.steps < 2:
        raise ValueError("need at least 2 sweep steps")
    result = sweep_amplitude(
        sys_def, (args.lambda_min, args.lambda_max), n_steps=args.steps, refine=args.refine
    )
    write_sweep_csv(result, args.out)
    summary = result.summary_dict()
    _print_json(summary)
    summary_path = f"{args.out}.summary.json"
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs = [args.out, summary_path]
    params = {
        "lambda_min": args.lambda_min,
        "lambda_max": args.lambda_max,
        "steps": args.steps,
        "refine": bool(args.refine),
        "threads": os.environ.get("PWSC_THREADS", "1"),
    }
    _write_manifest(
        _manifest("sweep", args.system, params, outputs, started), outputs, args.manifest
    )
    return 0


def cmd_shadow_check(args) -> int:
    started = time.time()
    sys_def = load_system(args.system)
    if not args.yc > 0.0:
        raise ValueError(f"entry height --yc must be positive, got {args.yc}")
    cmp = shadow_compare(sys_def, args.yc, lam=args.lam, left=args.left)
    write_shadow_csv(cmp, args.out)
    summary = {
        "y_c": args.yc,
        "max_violation": cmp.max_violation,
        "reentry_true": cmp.reentry_true,
        "reentry_shadow": cmp.reentry_shadow,
    }
    _print_json(summary)
    outputs = [args.out]
    params = {"yc": args.yc, "lambda": args.lam, "left": args.left}
    _write_manifest(
        _manifest("shadow-check", args.system, params, outputs, started),
        outputs,
        args.manifest,
    )
    return 0


def cmd_fixtures(args) -> int:
    for name in fixture_names():
        print(f"{name}\t{fixture_path(name)}")
    return 0


def build_parser() -> _Parser:
    p = _Parser(prog="pwsc", description=__doc__)
    p.add_argument("--version", action="version", version=f"pwsc {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("system", help="system definition INI file")
        sp.add_argument("--manifest", help="explicit run-manifest path")

    sp = sub.add_parser("validate", help="check the standing hypotheses")
    add_common(sp)
    sp.set_defaults(fn=cmd_validate)

    sp = sub.add_parser("classify", help="classify the corner (or fold) bifurcation")
    add_common(sp)
    sp.add_argument("--json", help="also write the report JSON to this path")
    sp.add_argument("--fold", action="store_true", help="classify the smooth-fold Hopf instead")
    sp.set_defaults(fn=cmd_classify)

    sp = sub.add_parser("simulate", help="integrate one trajectory to CSV")
    add_common(sp)
    sp.add_argument("--lambda", dest="lam", type=float, default=None)
    sp.add_argument("--x0", type=float, required=True)
    sp.add_argument("--y0", type=float, required=True)
    sp.add_argument("--t-max", dest="t_max", type=float, required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--events-out", help="also write the event records CSV")
    sp.add_argument("--rtol", type=float, default=1e-9)
    sp.add_argument("--atol", type=float, default=1e-12)
    sp.add_argument("--backward", action="store_true")
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("sweep", help="amplitude-vs-lambda sweep with window measurement")
    add_common(sp)
    sp.add_argument("--lambda-min", dest="lambda_min", type=float, required=True)
    sp.add_argument("--lambda-max", dest="lambda_max", type=float, required=True)
    sp.add_argument("--steps", type=int, default=30)
    sp.add_argument("--refine", action="store_true")
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_sweep)

    sp = sub.add_parser("shadow-check", help="verify the shadow bounding numerically")
    add_common(sp)
    sp.add_argument("--yc", type=float, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, default=None)
    sp.add_argument("--left", help="corollary-style replacement left piece expression")
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_shadow_check)

    sp = sub.add_parser("fixtures", help="list bundled example systems")
    sp.set_defaults(fn=cmd_fixtures)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        return args.fn(args)
    except (ConfigError, ExprError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return USAGE_ERROR
    except (
        HypothesisError,
        ClassificationError,
        EquilibriumError,
        NotAHopfError,
        CycleSearchError,
    ) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return DOMAIN_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
