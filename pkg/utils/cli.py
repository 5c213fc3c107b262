"""Command-line entry point.

    python -m utils.cli [--out-dir DIR] [--threads N] [--seed S] [--verbose] <command> ...

Commands: run <config>, limit <config>, study <config>,
audit <snapshot | --random N>, pressure <snapshot>.
Exit codes: 0 success, 1 configuration/input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from utils.config import load_solver_config, load_study_config
from utils.diagnostics import (
    audit_grad_q,
    audit_pressure_gradient,
    audit_random_triples,
    audit_triple_product,
    pressure_frequency_split,
    wall_traces,
)
from utils.elliptic import recover_pressures
from utils.errors import ConfigError, HarnessError, NumericalFailure
from utils.field import velocity_from_state
from utils.grid import build_grid
from utils.io import read_snapshot, write_pressure, write_series, write_snapshot, write_study
from utils.study import resolution_shift, run_simulation, run_study

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="channel-harness", description="Anisotropic channel-flow solver and vanishing-viscosity study.")
    parser.add_argument("--out-dir", type=Path, default=Path("out"), help="directory for all artifacts")
    parser.add_argument("--threads", type=int, default=None, help="worker processes for the study")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_ in (("run", "integrate the viscous system"), ("limit", "integrate the limit system (nu2 = 0)")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", type=Path)

    p = sub.add_parser("study", help="vanishing-viscosity study")
    p.add_argument("config", type=Path)
    p.add_argument("--resolution-check", action="store_true", help="repeat the study on a doubled grid")

    p = sub.add_parser("audit", help="inequality audits of a snapshot or of random fields")
    p.add_argument("snapshot", type=Path, nargs="?")
    p.add_argument("--random", type=int, default=None, metavar="N", help="audit N seeded random triples")
    p.add_argument("--R", type=float, nargs="+", default=[4.0, 8.0, 16.0], help="frequency-split radii")
    p.add_argument("--nx", type=int, default=32)
    p.add_argument("--ny", type=int, default=33)
    p.add_argument("--stretch", type=float, default=0.5)

    p = sub.add_parser("pressure", help="recover p and q of a snapshot")
    p.add_argument("snapshot", type=Path)
    return parser


# ----------------------------
# Commands
# ----------------------------

def _cmd_simulate(args: argparse.Namespace, regime: str) -> int:
    cfg = load_solver_config(args.config, regime=regime)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    result = run_simulation(cfg)
    out = args.out_dir
    write_series(out / "series.csv", result.series)
    for i, s in enumerate(result.snapshots):
        write_snapshot(out / f"snapshot_{i:04d}.bin", s)
    logger.info("%d snapshots and series.csv written to %s", len(result.snapshots), out)
    return EXIT_OK


def _cmd_study(args: argparse.Namespace) -> int:
    cfg = load_study_config(args.config)
    overrides: Dict[str, Any] = {}
    if args.threads is not None:
        overrides["threads"] = args.threads
    if args.seed is not None:
        overrides["seed"] = args.seed
    cfg = replace(cfg, **overrides) if overrides else cfg
    result = run_study(cfg)
    write_study(args.out_dir, result)
    if args.resolution_check:
        fine = run_study(cfg.refined())
        write_study(args.out_dir / "refined", fine)
        shift = resolution_shift(result, fine)
        if shift is None:
            logger.warning("resolution check: too few members to fit alpha_2 on both grids")
        else:
            logger.info("resolution check: alpha_2 changes by %.4f on the refined grid", shift)
    if result.partial:
        logger.error("study is partial; failed members: %s", ", ".join(result.failed))
        return EXIT_NUMERICAL
    return EXIT_OK


def _snapshot_audit(path: Path, radii: Sequence[float]) -> Dict[str, Any]:
    s = read_snapshot(path)
    u, v = velocity_from_state(s)
    pressures = recover_pressures(s)
    traces = wall_traces(s)
    pg = audit_pressure_gradient(s)
    report: Dict[str, Any] = {
        "snapshot": str(path),
        "t": s.t,
        "triple_product": {str(m): audit_triple_product(u, v, u, m) for m in (1, 2, 4)},
        "grad_q": audit_grad_q(s),
        "pressure_gradient": pg.gradient_ratio,
        "pressure_magnitude": pg.magnitude_ratio,
        "frequency_split": {},
        "wall_traces": asdict(traces),
    }
    for R in radii:
        split = pressure_frequency_split(pressures.p, R)
        report["frequency_split"][f"{R:g}"] = {"low": split.low_ratio, "high": split.high_ratio}
    return report


def _random_audit(count: int, args: argparse.Namespace) -> Dict[str, Any]:
    seed = 0 if args.seed is None else args.seed
    grid = build_grid(args.nx, args.ny, args.stretch)
    coarse = audit_random_triples(grid, count, seed=seed)
    fine = audit_random_triples(grid.refine(2), count, seed=seed)
    coarse.to_csv(args.out_dir / "audit_random.csv", index=False, lineterminator="\n")
    by_m = {}
    for m, grp in coarse.groupby("m"):
        c_max = float(grp["ratio"].max())
        f_max = float(fine.loc[fine["m"] == m, "ratio"].max())
        by_m[str(m)] = {"max_ratio": c_max, "max_ratio_refined": f_max, "relative_change": abs(f_max - c_max) / c_max if c_max else 0.0}
    return {"random_triples": count, "seed": seed, "by_m": by_m, "all_finite": bool(np.all(np.isfinite(coarse["ratio"])))}


def _cmd_audit(args: argparse.Namespace) -> int:
    if (args.snapshot is None) == (args.random is None):
        raise ConfigError("audit takes either a snapshot path or --random N")
    args.out_dir.mkdir(parents=True, exist_ok=True)
    if args.random is not None:
        if args.random < 1:
            raise ConfigError("--random needs N >= 1")
        report = _random_audit(args.random, args)
        name = "audit_random.json"
    else:
        report = _snapshot_audit(args.snapshot, args.R)
        name = f"{args.snapshot.stem}_audit.json"
    path = args.out_dir / name
    path.write_text(json.dumps(report, indent=2, sort_keys=True), encoding="utf-8")
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_pressure(args: argparse.Namespace) -> int:
    s = read_snapshot(args.snapshot)
    pq = recover_pressures(s)
    path = write_pressure(args.out_dir / f"{args.snapshot.stem}_pq.bin", s, pq.p, pq.q)
    logger.info("p and q written to %s", path)
    return EXIT_OK


COMMANDS = {
    "run": lambda a: _cmd_simulate(a, "viscous"),
    "limit": lambda a: _cmd_simulate(a, "limit"),
    "study": _cmd_study,
    "audit": _cmd_audit,
    "pressure": _cmd_pressure,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format=LOG_FORMAT)
    try:
        return COMMANDS[args.command](args)
    except NumericalFailure as exc:
        logger.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except HarnessError as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
