#!/usr/bin/env python3
"""Antenna sweep experiment: link metrics vs array size, keeping n_rx = n_tx."""

import argparse
import sys

from otfslink.cli import emit_csv, parse_config
from otfslink.link_sim import antenna_sweep


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default="configs/default.json")
    ap.add_argument("--trials", type=int, default=None)
    ap.add_argument("--output", default=None)
    args = ap.parse_args(argv)

    cfg = parse_config(args.config)
    trials = args.trials if args.trials is not None else cfg.trials
    rows = antenna_sweep(cfg.sim, cfg.n_tx_grid, trials=trials)
    for row in rows:
        print(
            f"n_tx={row.n_tx:3d}  ser={row.ser:.4f}  mse={row.mse:.4e}  "
            f"gamma_min={row.gamma_min:.3f}  gamma_max={row.gamma_max:.3f}",
            file=sys.stderr,
        )
    return emit_csv(rows, args.output if args.output is not None else cfg.output)


if __name__ == "__main__":
    sys.exit(run())
