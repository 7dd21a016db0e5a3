"""Command-line front end: sweep, null, bounds, compare.

Exit codes: 0 success, 2 configuration problem (message names the offending
field), 3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import yaml

from . import harness
from .harness import ConfigError, SimConfig


def _load_config(path: str) -> SimConfig:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config: file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config: invalid YAML: {exc}") from None
    if raw is None:
        raise ConfigError("config: file is empty")
    return SimConfig.from_dict(raw)


def _emit(prefix: str, cfg: SimConfig, records) -> None:
    harness.write_records_csv(prefix + ".csv", records)
    harness.write_run_json(prefix + ".json", cfg, records)
    for r in records:
        print(f"{r.source}  snr={r.snr_db:+.2f} dB  bler={r.bler:.3e}  "
              f"({r.block_errors}/{r.trials})  [{r.wall_time_s:.1f}s]")
    print(f"wrote {prefix}.csv and {prefix}.json")


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    records = harness.run_sweep(cfg)
    _emit(args.out, cfg, records)
    return 0


def _cmd_null(args) -> int:
    cfg = _load_config(args.config)
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    cfg = replace(cfg, scenario=args.scenario)
    records = harness.run_sweep(cfg)
    _emit(args.out, cfg, records)
    return 0


def _cmd_bounds(args) -> int:
    cfg = _load_config(args.config)
    records = harness.run_bounds(cfg, mu_star=args.mu_star)
    _emit(args.out, cfg, records)
    return 0


def _cmd_compare(args) -> int:
    sim = harness.read_records_csv(args.sim)
    bound = harness.read_records_csv(args.bound)
    report = harness.compare_records(sim, bound, level=args.level)
    print(f"{'snr_db':>8} {'sim':>12} {'bound':>12} {'sim_ci_hi':>12} viol")
    for row in report.rows:
        print(f"{row.snr_db:>8.2f} {row.sim_bler:>12.4e} "
              f"{row.bound_bler:>12.4e} {row.sim_ci_hi:>12.4e} "
              f"{'YES' if row.violation else 'no':>4}")
    print(f"crossing@{args.level:g}: sim={report.sim_crossing_db:.3f} dB  "
          f"bound={report.bound_crossing_db:.3f} dB  "
          f"gap={report.crossing_gap_db:.3f} dB")
    print(f"violations: {report.violations}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="svcsim",
        description="Block-error-rate simulator for sparse support coding")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="Monte Carlo sweep over the SNR grid")
    p.add_argument("--config", required=True, help="YAML run configuration")
    p.add_argument("--out", default="sweep", help="output prefix (.csv/.json)")
    p.add_argument("--workers", type=int, default=None,
                   help="override worker count")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("null", help="sweep with no genuine packet")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="null")
    p.add_argument("--scenario", choices=["null", "wrong_codebook"],
                   default="null")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(fn=_cmd_null)

    p = sub.add_parser("bounds", help="closed-form error bound on the grid")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="bounds")
    p.add_argument("--mu-star", type=float, default=None,
                   help="override the measured codebook correlation")
    p.set_defaults(fn=_cmd_bounds)

    p = sub.add_parser("compare", help="dominance and crossing-gap report")
    p.add_argument("--sim", required=True, help="sweep CSV")
    p.add_argument("--bound", required=True, help="bounds CSV")
    p.add_argument("--level", type=float, default=1e-2,
                   help="BLER level for the crossing gap")
    p.set_defaults(fn=_cmd_compare)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
