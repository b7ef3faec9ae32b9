"""Command-line entry point: ``polarforge <command> ...``.

All SNR flags are Es/N0 in dB.  Every command writes its data file(s) plus a
``<out>.manifest.json`` with the full parameter set, so a run can be
regenerated from its manifest alone.
"""

import argparse
import csv
import datetime
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .bler import estimate_bler
from .capacity import ConvergenceError, error_report, write_error_report
from .polarization import (
    CodeConstruction,
    construct,
    db_to_xi,
    polarize_distinct,
    polarize_uniform,
    select_information_set,
)
from .sim import SimConfig, append_sim_csv, run_monte_carlo, sim_csv_row

SEED_ENV = "POLARFORGE_SEED"


class CliError(Exception):
    """A validation failure reported as a one-line diagnostic."""


@dataclass
class RunManifest:
    command: str
    parameters: dict
    version: str = __version__
    seed: int = None
    outputs: list = field(default_factory=list)
    started_at: str = ""
    wall_clock_seconds: float = 0.0

    def write(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(asdict(self), fh, indent=2)
            fh.write("\n")


def _manifest_path(out):
    return out + ".manifest.json"


def _resolve_k(args, block_length):
    if args.k is not None and args.rate is not None:
        raise CliError("--rate and --k are mutually exclusive")
    if args.k is None and args.rate is None:
        raise CliError("one of --rate or --k is required")
    if args.k is not None:
        k = args.k
    else:
        exact = args.rate * block_length
        k = int(round(exact))
        if abs(exact - k) > 1e-9:
            raise CliError(f"rate {args.rate} does not give an integer K for N={block_length}")
    if not 0 <= k <= block_length:
        raise CliError(f"K={k} out of range for N={block_length}")
    return k


def read_channel_snrs(path):
    """Per-channel SNRs in dB from a CSV with a ``snr_db`` column."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from None
    if not rows or "snr_db" not in rows[0]:
        raise CliError(f"{path}: expected a header row with column 'snr_db'")
    try:
        vals = [float(r["snr_db"]) for r in rows]
    except (TypeError, ValueError):
        raise CliError(f"{path}: non-numeric value in column 'snr_db'") from None
    if not all(math.isfinite(v) for v in vals):
        raise CliError(f"{path}: SNR values must be finite")
    size = len(vals)
    if size & (size - 1):
        raise CliError(f"{path}: number of channels ({size}) is not a power of two")
    return np.array(vals)


def sweep_points(start, stop, step):
    if not all(math.isfinite(v) for v in (start, stop, step)):
        raise CliError("sweep bounds must be finite")
    if step == 0:
        return [start]
    if step < 0 or stop < start:
        raise CliError("sweep needs --snr-step >= 0 and --snr-stop >= --snr-start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(count)]


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise CliError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return int(np.random.SeedSequence().entropy % (1 << 63))


def _base_construction(args):
    """Construction from ``--construction`` or inline flags (may be None)."""
    if args.construction:
        try:
            return CodeConstruction.load(args.construction)
        except (OSError, ValueError, KeyError) as exc:
            raise CliError(f"cannot load construction {args.construction}: {exc}") from None
    if args.n is None:
        raise CliError("give --construction or --n with --rate/--k")
    k = _resolve_k(args, 1 << args.n)
    if args.design_snr_db is not None:
        return construct(args.n, k, args.design_snr_db)
    if not args.redesign_each_point:
        raise CliError("inline parameters need --design-snr-db or --redesign-each-point")
    return None


def _inline_nk(args, base):
    if base is not None:
        return base.n, base.k
    return args.n, _resolve_k(args, 1 << args.n)


def cmd_construct(args):
    if args.per_channel_snrs:
        snrs = read_channel_snrs(args.per_channel_snrs)
        n = len(snrs).bit_length() - 1
        if args.n is not None and args.n != n:
            raise CliError(f"--n {args.n} does not match {len(snrs)} channels in CSV")
        k = _resolve_k(args, 1 << n)
        profile = polarize_distinct(db_to_xi(snrs))
        cons = select_information_set(profile, k, None, "rca")
    else:
        if args.n is None or args.design_snr_db is None:
            raise CliError("--n and --design-snr-db are required without --per-channel-snrs")
        k = _resolve_k(args, 1 << args.n)
        cons = construct(args.n, k, args.design_snr_db)
    mask = args.mask_out or os.path.splitext(args.out)[0] + ".frozen.txt"
    cons.save(args.out, mask)
    return [args.out, mask], None


def cmd_estimate(args):
    base = _base_construction(args)
    n, k = _inline_nk(args, base)
    if k == 0:
        raise CliError("K must be positive for a BLER estimate")
    rows = []
    for snr in sweep_points(args.snr_start, args.snr_stop, args.snr_step):
        profile = polarize_uniform(n, db_to_xi(snr))
        if args.redesign_each_point:
            est = estimate_bler(profile, k)
        else:
            est = estimate_bler(profile, info_set=base.info_set)
        rows.append((snr, est.bler))
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["channel_snr_db", "estimated_bler"])
        for snr, b in rows:
            w.writerow([f"{snr:.6g}", f"{b:.6g}"])
    return [args.out], None


def cmd_simulate(args):
    base = _base_construction(args)
    n, k = _inline_nk(args, base)
    seed = _seed(args)
    if args.max_trials < 1 or args.target_errors < 1 or args.workers < 1:
        raise CliError("--max-trials, --target-errors and --workers must be >= 1")
    rows = []
    records = []
    for snr in sweep_points(args.snr_start, args.snr_stop, args.snr_step):
        cons = construct(n, k, snr) if args.redesign_each_point else base
        cfg = SimConfig(
            construction=cons,
            channel_snr_db=snr,
            max_trials=args.max_trials,
            target_block_errors=args.target_errors,
            seed=seed,
            worker_count=args.workers,
            batch_size=args.batch_size,
            all_zero=args.all_zero,
        )
        res = run_monte_carlo(cfg)
        rows.append(sim_csv_row(cons, snr, res))
        records.append({"channel_snr_db": snr, **cons.to_dict(), **res.to_dict()})
    append_sim_csv(args.out, rows)
    outputs = [args.out]
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(records, fh, indent=2)
            fh.write("\n")
        outputs.append(args.json_out)
    return outputs, seed


def cmd_capacity_report(args):
    if args.grid_db_points < 1:
        raise CliError("--grid-db-points must be >= 1")
    if args.grid_db_points == 1:
        grid_db = [args.grid_db_start]
    else:
        if args.grid_db_stop < args.grid_db_start:
            raise CliError("--grid-db-stop must be >= --grid-db-start")
        grid_db = np.linspace(args.grid_db_start, args.grid_db_stop, args.grid_db_points)
    rows = error_report([10.0 ** (g / 10.0) for g in grid_db])
    write_error_report(rows, args.out)
    return [args.out], None


def _add_code_flags(p, need_out=True):
    p.add_argument("--n", type=int, help="log2 of the block length")
    p.add_argument("--rate", type=float, help="code rate K/N")
    p.add_argument("--k", type=int, help="number of information bits")
    p.add_argument("--design-snr-db", type=float, help="design Es/N0 in dB")
    p.add_argument("--out", required=need_out, help="output path")


def _add_sweep_flags(p):
    p.add_argument("--construction", help="construction JSON written by 'construct'")
    p.add_argument("--snr-start", type=float, required=True)
    p.add_argument("--snr-stop", type=float, default=None)
    p.add_argument("--snr-step", type=float, default=0.0)
    p.add_argument(
        "--redesign-each-point",
        action="store_true",
        help="construct the code anew at every channel SNR of the sweep",
    )


def build_parser():
    parser = argparse.ArgumentParser(prog="polarforge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="design a polar code by RCA")
    _add_code_flags(p)
    p.add_argument("--per-channel-snrs", help="CSV with column snr_db, one row per coded bit")
    p.add_argument("--mask-out", help="frozen-mask text path (default: <out stem>.frozen.txt)")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("estimate", help="minimum estimated BLER over an SNR sweep")
    _add_code_flags(p)
    _add_sweep_flags(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="Monte Carlo SC decoding over an SNR sweep")
    _add_code_flags(p)
    _add_sweep_flags(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-trials", type=int, default=1_000_000)
    p.add_argument("--target-errors", type=int, default=100)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--batch-size", type=int, default=2000)
    p.add_argument("--all-zero", action="store_true", help="send the all-zero codeword only")
    p.add_argument("--json-out", help="also write SimResult records as JSON")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("capacity-report", help="approximation error of the capacity formula")
    p.add_argument("--grid-db-start", type=float, default=-20.0)
    p.add_argument("--grid-db-stop", type=float, default=15.0)
    p.add_argument("--grid-db-points", type=int, default=701)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_capacity_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "snr_stop", 0) is None:
        args.snr_stop = args.snr_start
    started = datetime.datetime.now(datetime.timezone.utc).isoformat()
    t0 = time.perf_counter()
    try:
        outputs, seed = args.func(args)
    except (CliError, ValueError, OSError, ConvergenceError) as exc:
        print(f"polarforge {args.command}: error: {exc}", file=sys.stderr)
        return 1
    params = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = RunManifest(
        command=args.command,
        parameters=params,
        seed=seed,
        outputs=outputs,
        started_at=started,
        wall_clock_seconds=time.perf_counter() - t0,
    )
    try:
        manifest.write(_manifest_path(outputs[0]))
    except OSError as exc:
        print(f"polarforge {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
