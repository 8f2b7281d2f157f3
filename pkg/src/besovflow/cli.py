"""Command-line entry point: simulate, analyze, verify, decompose.

Exit codes: 0 success, 1 invalid input, 2 runtime abort (blow-up).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .corpus import CorpusSpec
from .inequalities import run_corpus
from .io import (
    ConfigError,
    SnapshotFormatError,
    load_config,
    load_snapshot,
    render_config,
    write_series,
    write_snapshot,
)
from .littlewood_paley import build_bank, shell_energies
from .monitor import build_report, sample_norms
from .solver import BlowUpError, simulate

log = logging.getLogger("besovflow")

EXIT_OK, EXIT_INVALID, EXIT_ABORT = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit with status 2
        raise _UsageError(f"{self.prog}: {message}")


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="besovflow", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", metavar="{simulate,analyze,verify,decompose}")
    sub.required = True

    s = sub.add_parser("simulate", help="run a trajectory with norm monitoring")
    s.add_argument("config", type=Path)
    s.add_argument("--output-dir", type=Path, help="override [monitor].output_dir")

    a = sub.add_parser("analyze", help="recompute norms from a snapshot")
    a.add_argument("snapshot", type=Path)

    v = sub.add_parser("verify", help="run the inequality corpus")
    v.add_argument("config", type=Path, nargs="?", help="TOML file with a [corpus] section")
    v.add_argument("--grids", type=int, nargs="+")
    v.add_argument("--count", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--output-dir", type=Path, default=None)

    d = sub.add_parser("decompose", help="dyadic shell energies of a snapshot")
    d.add_argument("snapshot", type=Path)
    d.add_argument("--field", choices=("u", "theta"), default="u")
    return p


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    out = (args.output_dir.resolve() if args.output_dir else cfg.monitor.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.toml").write_text(render_config(cfg))

    def on_snapshot(n, state):
        write_snapshot(state, out / f"snapshot_{n:07d}.bsvf")

    status = EXIT_OK
    try:
        traj = simulate(cfg.solver, on_snapshot=on_snapshot, keep_snapshots=False)
    except BlowUpError as exc:
        log.error("%s", exc)
        traj, status = exc.trajectory, EXIT_ABORT
    write_series(traj.samples, out / "series.ndjson", out / "series.csv")
    T0 = cfg.monitor.T0 if traj.samples and cfg.monitor.T0 <= traj.samples[-1].t else None
    report = build_report(
        traj.samples,
        traj.energy_residuals,
        T0,
        cfg.solver.nu,
        cfg.solver.kappa,
        traj.buoyancy_work,
    )
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=1) + "\n")
    if status == EXIT_OK:
        last = traj.samples[-1]
        print(f"{len(traj.samples)} samples to {out}; t={last.t:.6g} criterion_cum={last.criterion_cum:.6g}")
    return status


def _cmd_analyze(args) -> int:
    state = load_snapshot(args.snapshot)
    sample = sample_norms(state, build_bank(state.grid))
    print(json.dumps(sample.as_dict()))
    return EXIT_OK


def _corpus_spec(args) -> CorpusSpec:
    spec = load_config(args.config).corpus if args.config else CorpusSpec()
    overrides = {}
    if args.grids:
        overrides["grids"] = tuple(args.grids)
    if args.count is not None:
        overrides["count"] = args.count
    if args.seed is not None:
        overrides["rng_seed"] = args.seed
    if overrides:
        merged = {**spec.__dict__, **overrides}
        spec = CorpusSpec(**merged)
    return spec


def _cmd_verify(args) -> int:
    spec = _corpus_spec(args)
    out = (args.output_dir or Path("verify_out")).resolve()
    out.mkdir(parents=True, exist_ok=True)
    result = run_corpus(spec)
    by_name: dict[str, list] = {}
    for (name, _), rep in sorted(result.reports.items()):
        by_name.setdefault(name, []).append(rep)
    summary = ["inequality,grid,entries,skipped,max_ratio"]
    for name, reps in by_name.items():
        rows = ["family,grid,lhs,rhs_core,ratio"]
        for rep in reps:
            for e in rep.entries:
                rows.append(f"{e.family},{rep.grid},{e.lhs!r},{e.rhs_core!r},{e.ratio!r}")
            mx = "" if rep.max_ratio is None else repr(rep.max_ratio)
            summary.append(f"{name},{rep.grid},{len(rep.entries)},{rep.skipped},{mx}")
        (out / f"{name}.csv").write_text("\n".join(rows) + "\n")
    (out / "summary.csv").write_text("\n".join(summary) + "\n")
    bony = ["family,member,grid,band_limit,within_band,relative_residual"]
    for fam, idx, n, b in result.bony:
        bony.append(f"{fam},{idx},{n},{b.band_limit!r},{int(b.within_band)},{b.relative!r}")
    (out / "bony.csv").write_text("\n".join(bony) + "\n")
    (out / "corpus.sha256").write_text(result.digest + "\n")

    width = max((len(n) for n in by_name), default=10)
    print(f"corpus {result.digest[:16]}  grids={list(spec.grids)}")
    for line in summary[1:]:
        name, grid, n, skipped, mx = line.split(",")
        print(f"  {name:<{width}}  N={grid:<4} n={n:<5} skipped={skipped:<4} max={mx}")
    for msg in result.failures:
        print(f"  FAILED {msg}", file=sys.stderr)
    return EXIT_OK if not result.failures else EXIT_ABORT


def _cmd_decompose(args) -> int:
    state = load_snapshot(args.snapshot)
    f = state.u if args.field == "u" else state.theta
    print("j,energy")
    for j, e in shell_energies(f, build_bank(state.grid)):
        print(f"{j},{e!r}")
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "analyze": _cmd_analyze,
    "verify": _cmd_verify,
    "decompose": _cmd_decompose,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, SnapshotFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
