#!/usr/bin/env python3
"""SNR sweep experiment: average link metrics over trials at each SNR point."""

import argparse
import sys

from otfslink.cli import emit_csv, parse_config
from otfslink.link_sim import snr_sweep


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default="configs/default.json")
    ap.add_argument("--trials", type=int, default=None)
    ap.add_argument("--output", default=None)
    args = ap.parse_args(argv)

    cfg = parse_config(args.config)
    trials = args.trials if args.trials is not None else cfg.trials
    rows = snr_sweep(cfg.sim, cfg.snr_grid_db, trials=trials)
    for row in rows:
        print(
            f"snr={row.snr_db:+6.1f} dB  ser={row.ser:.4f}  mse={row.mse:.4e}  "
            f"weighted_mse={row.weighted_mse:.4e}",
            file=sys.stderr,
        )
    return emit_csv(rows, args.output if args.output is not None else cfg.output)


if __name__ == "__main__":
    sys.exit(run())
