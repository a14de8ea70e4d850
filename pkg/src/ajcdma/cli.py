"""Command line entry point: ``ajcdma run | sweep | selftest``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ExperimentConfig, parse_rank
from .errors import AjcdmaError
from .harness import run_experiment


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ranks(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ajcdma", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment described by a TOML config file")
    run.add_argument("config")
    run.add_argument("--workers", type=int, default=None)

    sw = sub.add_parser("sweep", help="run a sweep from command line flags")
    sw.add_argument("--config", help="base config file; flags override its values")
    sw.add_argument("--snr", type=_floats, help="comma-separated SNR list in dB (inf = no noise)")
    sw.add_argument("--sjr", type=_floats, help="comma-separated SJR list in dB (inf = no jammer)")
    sw.add_argument("--rank", type=_ranks, help="comma-separated ranks, e.g. 1,N/10,N")
    sw.add_argument("--trials", type=int)
    sw.add_argument("--seed", type=int)
    sw.add_argument("--profile", help="built-in channel profile or profile file")
    sw.add_argument("--out", help="CSV output path")
    sw.add_argument("-k", "--users", type=int)
    sw.add_argument("-m", "--code-len", type=int)
    sw.add_argument("-n", "--bits", type=int)
    sw.add_argument("--workers", type=int, default=None)
    sw.add_argument("--no-timing", action="store_true", help="write 0 runtimes (byte-stable CSV)")

    sub.add_parser("selftest", help="run the built-in property checks")
    return p


def _print_rows(rows) -> None:
    print(f"{'snr':>6} {'sjr':>6} {'rank':>5} {'receiver':>8} {'trials':>6} {'ber':>11} {'stderr':>10} {'time[s]':>9} {'iters':>6}")
    for r in rows:
        print(f"{r.snr_db:6.1f} {r.sjr_db:6.1f} {r.rank:5d} {r.receiver:>8} {r.trials:6d} "
              f"{r.ber_mean:11.4e} {r.ber_stderr:10.3e} {r.runtime_mean_s:9.4f} {r.rpca_iter_mean:6.1f}")


def _sweep_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    n = args.bits or cfg.n_bits
    ranks = tuple(parse_rank(r, n) for r in args.rank) if args.rank else None
    return cfg.with_overrides(
        k_users=args.users, m_code_len=args.code_len, n_bits=args.bits,
        snr_db_list=args.snr, sjr_db_list=args.sjr, rank_list=ranks,
        trials=args.trials, master_seed=args.seed, channel_profile=args.profile,
        output_path=args.out, timing=False if args.no_timing else None,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "selftest":
        from .selftest import run_all

        return 0 if run_all() else 1

    try:
        if args.command == "run":
            cfg = ExperimentConfig.from_file(args.config)
        else:
            cfg = _sweep_config(args)
        rows = run_experiment(cfg, workers=args.workers)
    except (AjcdmaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    _print_rows(rows)
    failed = sum(r.failures for r in rows) // max(1, len(cfg.receivers))
    if failed:
        print(f"error: {failed} trial(s) aborted", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
