"""Command-line driver: ``verify``, ``spectrum``, ``propagator``, ``heatkernel``, ``report``.

Exit codes: 0 all checks pass, 1 a check failed, 2 bad configuration,
3 output could not be written or read.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import backgrounds
from .errors import ConfigError, DomainError, LapseWickError, OutputError
from .suites import (
    SUITES,
    CheckRecord,
    VerificationReport,
    build_config,
    emit_artifacts,
    read_config_file,
    run_suite,
    write_table,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--grid", help="grid size NTxNX")
    p.add_argument("--dim", help="spatial dimension (1 or 2)")
    p.add_argument("--theta", help="comma-separated rotation angles in [0, pi)")
    p.add_argument("--map", action="append", default=[], help="diffeomorphism name:params (repeatable)")
    p.add_argument("--tol", action="append", default=[], help="tolerance override name=value (repeatable)")
    p.add_argument("--seed", help="RNG seed")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", help="json, csv or json,csv")
    p.add_argument("--background", help="flat | random | static | friedmann | file:PATH")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lapsewick", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("verify", help="run a verification suite")
    _common(p)
    p.add_argument("--suite", default="all", choices=SUITES + ("all",))
    p = sub.add_parser("spectrum", help="Hessian spectrum and sector checks")
    _common(p)
    p = sub.add_parser("propagator", help="rotated flat-space propagator sweep")
    _common(p)
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--pmax", type=float, default=5.0)
    p.add_argument("--n", type=int, default=21)
    p = sub.add_parser("heatkernel", help="rotated de Sitter heat kernel table")
    _common(p)
    p.add_argument("--s", type=float, default=0.5, help="diffusion time")
    p.add_argument("--hubble", type=float, default=1.0)
    p.add_argument("--xmax", type=float, default=1.0)
    p.add_argument("--n", type=int, default=11)
    p = sub.add_parser("report", help="summarize an existing report directory")
    p.add_argument("input", help="directory holding report.json")
    p.add_argument("--format", default="json")
    return parser


def config_from_args(args):
    file_pairs = read_config_file(args.config) if args.config else []
    flags = []
    for key in ("grid", "dim", "theta", "seed", "out", "format", "background"):
        v = getattr(args, key, None)
        if v is not None:
            flags.append((key, v))
    if args.map:
        flags.append(("map", ";".join(args.map)))
    for t in args.tol:
        flags.append(("tol", t))
    return build_config(file_pairs, flags)


def _print_records(report: VerificationReport, stream=sys.stdout) -> None:
    for r in report.records:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: {r.residual:.3e} {r.comparison} {r.tolerance:.1e}", file=stream)
    s = report.summary()
    print(f"{s['suite']}: {s['checks'] - s['failed']}/{s['checks']} checks passed", file=stream)


def _finish(report, cfg) -> int:
    emit_artifacts(report, cfg.out, cfg.formats)
    _print_records(report)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_verify(args) -> int:
    cfg = config_from_args(args)
    return _finish(run_suite(cfg, args.suite), cfg)


def cmd_spectrum(args) -> int:
    cfg = config_from_args(args)
    return _finish(run_suite(cfg, "spectrum"), cfg)


def cmd_propagator(args) -> int:
    cfg = config_from_args(args)
    if args.n < 2 or args.mass < 0:
        raise ConfigError("need --n >= 2 and --mass >= 0")
    report = VerificationReport("propagator", cfg.to_dict())
    axis = np.linspace(0.0, args.pmax, args.n)
    rows = []
    worst = np.inf
    for th in cfg.thetas:
        try:
            P0, P = np.meshgrid(axis, axis, indexing="ij")
            G = backgrounds.propagator(P0.ravel(), P.ravel() ** 2, args.mass, th)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
        lo, hi = backgrounds.propagator_bounds(P0.ravel(), P.ravel() ** 2, args.mass, th)
        mag = np.abs(G)
        worst = min(worst, float(np.min(mag - lo)), float(np.min(hi - mag)))
        pe = np.sqrt(P0.ravel() ** 2 + P.ravel() ** 2)
        for a, b, e, g, m in zip(P0.ravel(), P.ravel(), pe, G, mag):
            rows.append((th, a, b, args.mass, e, g.real, g.imag, m))
        if not report.plots:
            report.plots["propagator_magnitude"] = (axis, np.abs(backgrounds.propagator(axis, 0.0, args.mass, th)))
    report.add(CheckRecord.make("propagator_bounds", worst, 0.0, ">=", samples=len(rows)))
    _mkdir(cfg.out)
    write_table(Path(cfg.out) / "propagator.csv", ["theta", "p0", "p", "m", "pE", "re", "im", "abs"], rows)
    return _finish(report, cfg)


def cmd_heatkernel(args) -> int:
    cfg = config_from_args(args)
    report = VerificationReport("heatkernel", cfg.to_dict())
    d = cfg.d
    xs = np.zeros((args.n, d))
    xs[:, 0] = np.linspace(0.0, args.xmax, args.n)
    ts = np.zeros(args.n)
    rows = []
    for th in cfg.thetas:
        try:
            prm = backgrounds.DeSitterParams(H=args.hubble, d=d, theta=th, s=args.s)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
        res = backgrounds.ds_heat_kernel(prm, ts, xs, np.zeros(args.n), np.zeros((args.n, d)))
        for k in range(args.n):
            rows.append((th, ts[k], *xs[k], res.value[k].real, res.value[k].imag, res.error[k]))
        pts_t = np.array([0.2, -0.3])
        pts_x = np.array([[0.3, 0.1], [-0.2, 0.25]])[:, :d]
        r, _ = backgrounds.heat_residual(prm, pts_t, pts_x, 0.0, np.zeros(d))
        report.add(CheckRecord.make(f"ds_heat[d={d},{th:.6g}]", float(np.max(r)), cfg.tol("ds_heat"), d=d, theta=th))
    header = ["theta", "t"] + [f"x{a + 1}" for a in range(d)] + ["re", "im", "error"]
    _mkdir(cfg.out)
    write_table(Path(cfg.out) / "heatkernel.csv", header, rows)
    return _finish(report, cfg)


def cmd_report(args) -> int:
    path = Path(args.input) / "report.json"
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    for r in data.get("records", []):
        status = "PASS" if r["passed"] else "FAIL"
        print(f"{status} {r['name']}: {r['residual']} {r['comparison']} {r['tolerance']}  ({r['anchor']})")
    s = data.get("summary", {})
    print(f"{s.get('suite')}: {s.get('checks', 0) - s.get('failed', 0)}/{s.get('checks', 0)} checks passed")
    return EXIT_OK if s.get("passed", False) else EXIT_FAIL


def _mkdir(out) -> None:
    try:
        Path(out).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {out}: {exc}") from exc


COMMANDS = {
    "verify": cmd_verify,
    "spectrum": cmd_spectrum,
    "propagator": cmd_propagator,
    "heatkernel": cmd_heatkernel,
    "report": cmd_report,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_IO
    except LapseWickError as exc:
        print(f"check error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
