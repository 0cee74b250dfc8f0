"""Command-line entry point: ``ersim simulate | ensemble | verify``.

Exit codes: 0 success, 1 failed verification, 2 configuration error,
3 numerical blow-up.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

from .config import ConfigError, RunConfig
from .estimates import energy_estimate_report
from .solver import BlowUpError, simulate_ensemble, simulate_path, write_diagnostics_csv
from .spectral import write_snapshot
from .verify import SUITES, run_suite

log = logging.getLogger("ersim")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2, 3


def _load(args) -> RunConfig:
    cfg = RunConfig.load(args.config)
    if args.seed is not None:
        cfg.values["run"]["seed"] = args.seed
    if getattr(args, "paths", None) is not None:
        cfg.values["run"]["paths"] = args.paths
    if args.out is not None:
        cfg.values["run"]["out"] = args.out
    return cfg


def _outdir(cfg: RunConfig) -> str:
    out = cfg["run"]["out"]
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "config.ini"), "w") as fh:
        fh.write(cfg.to_text())
    return out


def cmd_simulate(args) -> int:
    cfg = _load(args)
    out = _outdir(cfg)
    seed = cfg["run"]["seed"]
    try:
        traj = simulate_path(cfg.solver(), cfg.models(), seed, 0)
    except BlowUpError as exc:
        dump = os.path.join(out, "blowup_dump.txt")
        exc.dump(dump)
        print(f"error: numerical blow-up: {exc}; state written to {dump}", file=sys.stderr)
        return EXIT_BLOWUP
    write_diagnostics_csv(os.path.join(out, "diagnostics.csv"), traj.diagnostics)
    if cfg["run"]["snapshots"]:
        write_snapshot(os.path.join(out, "velocity.ersf"), traj.grid, traj.velocities(),
                       times=traj.times)
    log.info("simulate: %d steps, final energy %.6e", cfg.solver().steps,
             float(traj.coefficients[-1] @ traj.coefficients[-1]))
    return EXIT_OK


def cmd_ensemble(args) -> int:
    cfg = _load(args)
    M = cfg["run"]["paths"]
    seed = cfg["run"]["seed"]
    if M < 2:
        raise ConfigError("an ensemble needs at least 2 paths (--paths or [run] paths)")
    out = _outdir(cfg)
    try:
        res = simulate_ensemble(cfg.solver(), cfg.models(), M, seed, keep_records=True)
    except BlowUpError as exc:
        dump = os.path.join(out, "blowup_dump.txt")
        exc.dump(dump)
        print(f"error: numerical blow-up: {exc}; state written to {dump}", file=sys.stderr)
        return EXIT_BLOWUP
    write_diagnostics_csv(os.path.join(out, "diagnostics.csv"), res.records)
    with open(os.path.join(out, "statistics.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["functional", "mean", "variance", "ci95_halfwidth", "M"])
        for key in sorted(res.stats):
            mean, var, hw = res.stats[key]
            w.writerow([key, repr(mean), repr(var), repr(hw), M])
    func = [s["energy_functional"] for s in res.summaries]
    v0 = [s["v0_norm_sq"] for s in res.summaries]
    f2 = [s["f_norm_sq"] for s in res.summaries]
    with open(os.path.join(out, "report.txt"), "w") as fh:
        fh.write("# energy estimate: E[sup||v||^2 + rho(eps(v))]^r vs 1 + E||v0||^2r + E||f||^2r\n")
        fh.write("r,lhs,lhs_stderr,data_quantity,ratio,M\n")
        for r in (1, 2, 4):
            rep = energy_estimate_report(func, v0, f2, r)
            fh.write(f"{rep.r},{rep.lhs!r},{rep.lhs_stderr!r},{rep.data_quantity!r},{rep.ratio!r},{rep.M}\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = run_suite(args.suite, args.seed or 0)
    print("suite,check,status,value,tolerance")
    for c in checks:
        print(c.row())
    failed = [c for c in checks if not c.ok]
    if failed:
        print(f"{len(failed)} check(s) failed: {', '.join(c.name for c in failed)}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ersim", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, paths=False):
        p.add_argument("--config", required=True, help="run configuration file")
        p.add_argument("--seed", type=int, help="override [run] seed")
        p.add_argument("--out", help="override [run] out directory")
        if paths:
            p.add_argument("--paths", type=int, help="override [run] paths (ensemble size M)")

    common(sub.add_parser("simulate", help="integrate one path"))
    common(sub.add_parser("ensemble", help="Monte Carlo ensemble of paths"), paths=True)
    v = sub.add_parser("verify", help="run an invariant suite")
    v.add_argument("suite", choices=sorted(SUITES))
    v.add_argument("--seed", type=int, default=0)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    handlers = {"simulate": cmd_simulate, "ensemble": cmd_ensemble, "verify": cmd_verify}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
