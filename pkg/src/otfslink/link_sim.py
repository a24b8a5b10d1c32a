"""End-to-end link: payload -> allocation -> QAM -> OTFS -> channel -> recovery.

One link run draws a channel, diagonalizes it, allocates payload elements
to sub-channels (by importance, or uniformly), pushes 64-QAM symbols
through the full transmit/receive chain, and reports symbol error rate,
plain and importance-weighted MSE, the achieved rank alignment, and the
sub-channel gains.

SNR convention: per-DD-symbol transmit SNR = Es / sigma^2 with Es = 1 (the
constellation has unit average energy), so ``noise_var = 10**(-snr_db/10)``
is the total per-complex-component noise variance at each receive antenna.
Because every transform in the chain is (semi-)unitary, sigma^2 is also
the effective noise variance seen by each sub-channel.

All randomness flows through explicit seeds. Sweeps derive one stream per
trial as ``np.random.default_rng([seed, trial])``, shared across grid
points, so trials at different SNRs see common channels and noise shapes
(which makes metric-vs-SNR trends monotone) and semantic/uniform runs of
the same trial are exactly paired.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace

import numpy as np

from . import allocation, modem
from .channel import ChannelConfig, apply_channel, build_time_channel, sample_channel
from .dd_transforms import otfs_demodulate, otfs_modulate, stack_chains, unstack_chains
from .precoding import (
    PRECODER_MODES,
    build_precoder_combiner,
    decompose,
    sub_channel_gains,
)

ALLOCATION_MODES = ("semantic", "uniform")

DEFAULT_SNR_GRID_DB = (-6.0, 0.0, 6.0, 12.0, 18.0)
DEFAULT_ANTENNA_GRID = (4, 6, 8, 10, 12, 14, 16)

CSV_COLUMNS = (
    "snr_db",
    "n_tx",
    "n_rx",
    "n_rf",
    "mode",
    "trials",
    "ser",
    "mse",
    "weighted_mse",
    "kappa_exact",
    "kappa_soft",
    "gamma_max",
    "gamma_min",
)


@dataclass(frozen=True)
class SimConfig:
    """Full configuration of one link simulation."""

    n_tx: int = 8
    n_rx: int = 8
    n_rf: int = 2
    m_delay: int = 8
    n_doppler: int = 8
    n_frames: int = 1
    n_paths: int = 10
    max_delay_tap: int = 5
    max_doppler_tap: int = 1
    snr_db: float = 0.0
    precoder_mode: str = "dd_corrected"
    allocation_mode: str = "semantic"
    seed: int = 0

    def __post_init__(self):
        for name in ("n_tx", "n_rx", "n_rf", "m_delay", "n_doppler", "n_frames", "n_paths"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ValueError(f"{name} must be an integer, got {value!r}")
            if value < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")
        if self.n_rf > min(self.n_tx, self.n_rx):
            raise ValueError(
                f"n_rf must be <= min(n_tx, n_rx) = {min(self.n_tx, self.n_rx)}, got {self.n_rf}"
            )
        mn = self.m_delay * self.n_doppler
        for name in ("max_delay_tap", "max_doppler_tap"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ValueError(f"{name} must be an integer, got {value!r}")
            if not (0 <= value < mn):
                raise ValueError(f"{name} must be in [0, {mn}), got {value}")
        if not isinstance(self.snr_db, (int, float)) or isinstance(self.snr_db, bool):
            raise ValueError(f"snr_db must be a number, got {self.snr_db!r}")
        if math.isnan(self.snr_db):
            raise ValueError("snr_db must not be NaN")
        if self.precoder_mode not in PRECODER_MODES:
            raise ValueError(f"precoder_mode must be one of {PRECODER_MODES}, got {self.precoder_mode!r}")
        if self.allocation_mode not in ALLOCATION_MODES:
            raise ValueError(
                f"allocation_mode must be one of {ALLOCATION_MODES}, got {self.allocation_mode!r}"
            )
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ValueError(f"seed must be a nonnegative integer, got {self.seed!r}")

    @property
    def n_subchannels(self) -> int:
        return self.n_rf * self.m_delay * self.n_doppler

    @property
    def payload_len(self) -> int:
        return self.n_subchannels * self.n_frames

    @property
    def channel_config(self) -> ChannelConfig:
        return ChannelConfig(
            n_tx=self.n_tx,
            n_rx=self.n_rx,
            m_delay=self.m_delay,
            n_doppler=self.n_doppler,
            n_paths=self.n_paths,
            max_delay_tap=self.max_delay_tap,
            max_doppler_tap=self.max_doppler_tap,
        )


@dataclass(frozen=True)
class LinkMetrics:
    """Outcome of one link run (averages over all frames of the burst)."""

    mse: float
    weighted_mse: float
    ser: float
    kappa_exact: float
    kappa_soft: float
    gains: np.ndarray


@dataclass(frozen=True)
class SweepRow:
    """One averaged grid point of a sweep; fields mirror the CSV columns."""

    snr_db: float
    n_tx: int
    n_rx: int
    n_rf: int
    mode: str
    trials: int
    ser: float
    mse: float
    weighted_mse: float
    kappa_exact: float
    kappa_soft: float
    gamma_max: float
    gamma_min: float


def snr_to_noise_var(snr_db: float) -> float:
    """Per-complex-component noise variance at unit symbol energy: 10**(-snr_db/10)."""
    return float(10.0 ** (-float(snr_db) / 10.0))


def sample_importance(rng, n: int, sigma: float = 1.0) -> np.ndarray:
    """Heavy-tailed synthetic importance scores: log-normal(0, sigma)."""
    rng = np.random.default_rng(rng)
    return rng.lognormal(mean=0.0, sigma=sigma, size=n)


def sample_payload(rng, n: int) -> np.ndarray:
    """Uniform random symbol labels in [0, 64)."""
    rng = np.random.default_rng(rng)
    return rng.integers(0, modem.QAM_ORDER, size=n)


def run_link(cfg: SimConfig, payload_indices, importance, rng=None) -> LinkMetrics:
    """Run one burst of ``cfg.n_frames`` OTFS frames over a fresh channel.

    ``payload_indices`` are 64-QAM labels, ``importance`` the matching
    nonnegative per-element scores; both must have length
    ``cfg.payload_len``. The channel is held constant across the burst;
    allocation is recomputed per frame from that frame's importance slice.
    Deterministic given the seed / generator passed as ``rng``.
    """
    rng = np.random.default_rng(rng if rng is not None else cfg.seed)
    idx = np.asarray(payload_indices)
    w_all = np.asarray(importance, dtype=float)
    if idx.shape != (cfg.payload_len,):
        raise ValueError(f"payload must have length n_rf*m*n*n_frames = {cfg.payload_len}")
    if w_all.shape != idx.shape:
        raise ValueError("importance must match the payload length")
    if np.any(w_all < 0) or not np.all(np.isfinite(w_all)):
        raise ValueError("importance scores must be finite and >= 0")

    chan = sample_channel(cfg.channel_config, rng)
    h = build_time_channel(chan)
    dec = decompose(h)
    pc = build_precoder_combiner(dec, cfg.n_rf, cfg.m_delay, cfg.n_doppler, cfg.precoder_mode)
    gains = sub_channel_gains(dec, cfg.n_rf, cfg.m_delay, cfg.n_doppler)
    noise_var = snr_to_noise_var(cfg.snr_db)

    k = cfg.n_subchannels
    m, n = cfg.m_delay, cfg.n_doppler
    mn = m * n
    w_h = pc.w.conj().T

    n_err = 0
    sq_sum = 0.0
    wsq_sum = 0.0
    w_sum = 0.0
    kappa_exact = np.empty(cfg.n_frames)
    kappa_soft = np.empty(cfg.n_frames)
    for p in range(cfg.n_frames):
        sl = slice(p * k, (p + 1) * k)
        idx_f = idx[sl]
        w_f = w_all[sl]
        if cfg.allocation_mode == "semantic":
            pi = allocation.allocate(w_f, gains)
        else:
            pi = np.arange(k, dtype=np.intp)
        x = modem.modulate(allocation.apply_allocation(idx_f, pi))

        frames = [
            otfs_modulate(x[c * mn : (c + 1) * mn].reshape((m, n), order="F"))
            for c in range(cfg.n_rf)
        ]
        y = pc.g @ stack_chains(frames)
        r = apply_channel(h, y, noise_var, rng)
        s_hat = w_h @ r
        x_hat = np.concatenate(
            [otfs_demodulate(chunk, m, n).ravel(order="F") for chunk in unstack_chains(s_hat, cfg.n_rf)]
        )

        x_eq, _ = modem.equalize(x_hat, gains)
        rx_idx = modem.demodulate_hard(x_eq)
        x_eq_payload = allocation.invert_allocation(x_eq, pi)
        rx_idx_payload = allocation.invert_allocation(rx_idx, pi)

        err2 = np.abs(x_eq_payload - modem.modulate(idx_f)) ** 2
        sq_sum += float(err2.sum())
        wsq_sum += float((w_f * err2).sum())
        w_sum += float(w_f.sum())
        n_err += int(np.count_nonzero(rx_idx_payload != idx_f))
        if k >= 2:
            kappa_exact[p] = allocation.exact_kendall_tau(w_f[pi], gains)
            kappa_soft[p] = allocation.soft_kendall(w_f[pi], gains)
        else:
            kappa_exact[p] = math.nan
            kappa_soft[p] = math.nan

    total = cfg.payload_len
    mse = sq_sum / total
    return LinkMetrics(
        mse=mse,
        weighted_mse=wsq_sum / w_sum if w_sum > 0 else mse,
        ser=n_err / total,
        kappa_exact=float(np.mean(kappa_exact)),
        kappa_soft=float(np.mean(kappa_soft)),
        gains=gains,
    )


def run_random_link(cfg: SimConfig, rng=None) -> LinkMetrics:
    """Draw a random payload and importance vector, then run one link."""
    rng = np.random.default_rng(rng if rng is not None else cfg.seed)
    idx = sample_payload(rng, cfg.payload_len)
    w = sample_importance(rng, cfg.payload_len)
    return run_link(cfg, idx, w, rng)


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def _average_row(cfg: SimConfig, metrics: list[LinkMetrics]) -> SweepRow:
    return SweepRow(
        snr_db=cfg.snr_db,
        n_tx=cfg.n_tx,
        n_rx=cfg.n_rx,
        n_rf=cfg.n_rf,
        mode=cfg.allocation_mode,
        trials=len(metrics),
        ser=float(np.mean([m.ser for m in metrics])),
        mse=float(np.mean([m.mse for m in metrics])),
        weighted_mse=float(np.mean([m.weighted_mse for m in metrics])),
        kappa_exact=float(np.mean([m.kappa_exact for m in metrics])),
        kappa_soft=float(np.mean([m.kappa_soft for m in metrics])),
        gamma_max=float(np.mean([m.gains[0] for m in metrics])),
        gamma_min=float(np.mean([m.gains[-1] for m in metrics])),
    )


def snr_sweep(cfg: SimConfig, snr_list_db=DEFAULT_SNR_GRID_DB, trials: int = 1) -> list[SweepRow]:
    """Average ``trials`` random links at each SNR; one row per grid point."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    rows = []
    for snr in snr_list_db:
        point = replace(cfg, snr_db=float(snr))
        metrics = [run_random_link(point, _trial_rng(cfg.seed, t)) for t in range(trials)]
        rows.append(_average_row(point, metrics))
    return rows


def antenna_sweep(cfg: SimConfig, n_tx_list=DEFAULT_ANTENNA_GRID, trials: int = 1) -> list[SweepRow]:
    """Average ``trials`` random links per antenna count, keeping n_rx = n_tx."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    rows = []
    for n_tx in n_tx_list:
        point = replace(cfg, n_tx=int(n_tx), n_rx=int(n_tx))
        metrics = [run_random_link(point, _trial_rng(cfg.seed, t)) for t in range(trials)]
        rows.append(_average_row(point, metrics))
    return rows


def write_csv(rows, fileobj) -> None:
    """Write sweep rows with the canonical header; floats keep full repr precision."""
    writer = csv.writer(fileobj, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                repr(float(row.snr_db)),
                row.n_tx,
                row.n_rx,
                row.n_rf,
                row.mode,
                row.trials,
                repr(float(row.ser)),
                repr(float(row.mse)),
                repr(float(row.weighted_mse)),
                repr(float(row.kappa_exact)),
                repr(float(row.kappa_soft)),
                repr(float(row.gamma_max)),
                repr(float(row.gamma_min)),
            ]
        )


def format_csv(rows) -> str:
    """Render sweep rows to a CSV string (header + one line per row)."""
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()
