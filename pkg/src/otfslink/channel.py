"""Delay-Doppler MIMO channel: path model, dense time-domain matrix, AWGN.

The channel is a superposition of L discrete propagation paths. Path i has
a complex gain, an integer delay tap l_i, an integer Doppler tap k_i and a
pair of azimuth angles (departure/arrival). Its time-domain contribution is

    gain_i * (a_rx(aoa_i) a_tx(aod_i)^H)  kron  (Pi^l_i  Delta^k_i)

where Pi is the MN x MN forward cyclic shift, Delta the diagonal
phase-rotation matrix diag{exp(j 2 pi q / MN)}, and a_tx/a_rx are
half-wavelength uniform-linear-array responses. Delays act as cyclic
shifts over one frame, i.e. the frame is treated as cyclically extended;
no explicit cyclic prefix is modeled.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PathParams:
    """One propagation path: complex gain, integer taps, azimuth angles in radians."""

    gain: complex
    delay_tap: int
    doppler_tap: int
    aod: float
    aoa: float


@dataclass(frozen=True)
class DdMimoChannel:
    """A set of paths plus antenna geometry; expandable to a dense matrix."""

    paths: tuple[PathParams, ...]
    n_tx: int
    n_rx: int
    m_delay: int
    n_doppler: int

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if len(self.paths) < 1:
            raise ValueError("channel needs at least one path")
        for name in ("n_tx", "n_rx", "m_delay", "n_doppler"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        mn = self.mn
        for i, p in enumerate(self.paths):
            if not (0 <= p.delay_tap < mn):
                raise ValueError(f"path {i}: delay_tap {p.delay_tap} outside [0, {mn})")
            if not (abs(p.doppler_tap) < mn):
                raise ValueError(f"path {i}: |doppler_tap| {abs(p.doppler_tap)} must be < {mn}")
            if not np.isfinite(p.gain):
                raise ValueError(f"path {i}: gain must be finite")

    @property
    def mn(self) -> int:
        return self.m_delay * self.n_doppler

    def to_dict(self) -> dict:
        """JSON-ready description: geometry plus one record per path."""
        return {
            "n_tx": self.n_tx,
            "n_rx": self.n_rx,
            "m_delay": self.m_delay,
            "n_doppler": self.n_doppler,
            "paths": [
                {
                    "gain_re": float(p.gain.real),
                    "gain_im": float(p.gain.imag),
                    "delay_tap": int(p.delay_tap),
                    "doppler_tap": int(p.doppler_tap),
                    "aod": float(p.aod),
                    "aoa": float(p.aoa),
                }
                for p in self.paths
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DdMimoChannel":
        paths = tuple(
            PathParams(
                gain=complex(p["gain_re"], p["gain_im"]),
                delay_tap=int(p["delay_tap"]),
                doppler_tap=int(p["doppler_tap"]),
                aod=float(p["aod"]),
                aoa=float(p["aoa"]),
            )
            for p in d["paths"]
        )
        return cls(
            paths=paths,
            n_tx=int(d["n_tx"]),
            n_rx=int(d["n_rx"]),
            m_delay=int(d["m_delay"]),
            n_doppler=int(d["n_doppler"]),
        )

    def save_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def load_json(cls, path) -> "DdMimoChannel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class ChannelConfig:
    """Sampling parameters for random channel realizations."""

    n_tx: int = 8
    n_rx: int = 8
    m_delay: int = 8
    n_doppler: int = 8
    n_paths: int = 10
    max_delay_tap: int = 5
    max_doppler_tap: int = 1

    def __post_init__(self):
        for name in ("n_tx", "n_rx", "m_delay", "n_doppler", "n_paths"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        mn = self.m_delay * self.n_doppler
        if not (0 <= self.max_delay_tap < mn):
            raise ValueError(f"max_delay_tap must be in [0, {mn}), got {self.max_delay_tap}")
        if not (0 <= self.max_doppler_tap < mn):
            raise ValueError(f"max_doppler_tap must be in [0, {mn}), got {self.max_doppler_tap}")


def ula_response(angle: float, n_antennas: int) -> np.ndarray:
    """Half-wavelength uniform linear array response, unit L2 norm.

    Element a is ``exp(j pi a cos(angle)) / sqrt(n_antennas)``; ``angle`` is
    the azimuth in radians measured from the array axis (pi/2 = broadside).
    """
    if n_antennas < 1:
        raise ValueError(f"n_antennas must be >= 1, got {n_antennas}")
    a = np.arange(n_antennas)
    return np.exp(1j * np.pi * a * np.cos(angle)) / np.sqrt(n_antennas)


def cyclic_shift_matrix(size: int, power: int) -> np.ndarray:
    """Forward cyclic shift to the given power: entry (i, j) = 1 iff i == (j + power) mod size."""
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    return np.roll(np.eye(size), power, axis=0)


def phase_rotation_matrix(size: int, power: int) -> np.ndarray:
    """Diagonal phase rotation to the given power: diag{exp(j 2 pi q power / size)}."""
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    q = np.arange(size)
    return np.diag(np.exp(2j * np.pi * q * power / size))


def build_time_channel(chan: DdMimoChannel) -> np.ndarray:
    """Expand a path-parameterized channel to its dense time-domain matrix.

    Returns the ``(n_rx*MN, n_tx*MN)`` complex matrix; block (r, t) holds
    the sum over paths of ``gain * a_rx[r] * conj(a_tx[t]) * Pi^l Delta^k``.
    """
    mn = chan.mn
    h = np.zeros((chan.n_rx * mn, chan.n_tx * mn), dtype=complex)
    for p in chan.paths:
        spatial = np.outer(ula_response(p.aoa, chan.n_rx), ula_response(p.aod, chan.n_tx).conj())
        # Pi^l Delta^k == roll the rows of Delta^k down by l (cyclically)
        dd = np.roll(phase_rotation_matrix(mn, p.doppler_tap), p.delay_tap, axis=0)
        h += p.gain * np.kron(spatial, dd)
    return h


def sample_channel(cfg: ChannelConfig, rng=None) -> DdMimoChannel:
    """Draw one random channel realization.

    Gains are standard circular complex Gaussian, delay taps uniform on
    {0..max_delay_tap}, Doppler taps uniform on the symmetric range
    {-max_doppler_tap..max_doppler_tap}, angles uniform on [0, pi].
    Deterministic for a given integer seed.
    """
    rng = np.random.default_rng(rng)
    n = cfg.n_paths
    gains = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
    delays = rng.integers(0, cfg.max_delay_tap + 1, size=n)
    dopplers = rng.integers(-cfg.max_doppler_tap, cfg.max_doppler_tap + 1, size=n)
    aods = rng.uniform(0.0, np.pi, size=n)
    aoas = rng.uniform(0.0, np.pi, size=n)
    paths = tuple(
        PathParams(
            gain=complex(gains[i]),
            delay_tap=int(delays[i]),
            doppler_tap=int(dopplers[i]),
            aod=float(aods[i]),
            aoa=float(aoas[i]),
        )
        for i in range(n)
    )
    return DdMimoChannel(
        paths=paths,
        n_tx=cfg.n_tx,
        n_rx=cfg.n_rx,
        m_delay=cfg.m_delay,
        n_doppler=cfg.n_doppler,
    )


def apply_channel(h: np.ndarray, y: np.ndarray, noise_var: float, rng=None) -> np.ndarray:
    """Apply ``r = h @ y + n`` with circular complex Gaussian noise.

    ``noise_var`` is the total per-complex-component variance (real and
    imaginary parts carry ``noise_var/2`` each); 0 gives the exact product.
    ``y`` may be a vector or an ``(n_tx*MN, batch)`` matrix of columns.
    """
    h = np.asarray(h)
    y = np.asarray(y)
    if y.ndim not in (1, 2) or y.shape[0] != h.shape[1]:
        raise ValueError(f"signal shape {y.shape} incompatible with channel shape {h.shape}")
    if noise_var < 0:
        raise ValueError(f"noise_var must be >= 0, got {noise_var}")
    r = h @ y
    if noise_var > 0:
        rng = np.random.default_rng(rng)
        noise = (rng.standard_normal(r.shape) + 1j * rng.standard_normal(r.shape)) * np.sqrt(
            noise_var / 2.0
        )
        r = r + noise
    return r
