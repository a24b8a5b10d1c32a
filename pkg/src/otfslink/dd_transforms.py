"""Delay-Doppler <-> time-domain transforms for one OTFS frame.

Conventions used throughout the package:

* A DD grid is an ``(M, N)`` complex array; axis 0 is the delay dimension
  (M bins), axis 1 the Doppler dimension (N bins).
* Vectorization is column-major (delay index varies fastest), so that the
  fused per-row inverse DFT ``S = X @ F_N^H`` and the Kronecker form
  ``vec(S) = (F_N^H kron I_M) @ vec(X)`` are the same operation.
* DFT matrices are unitary (``1/sqrt(size)`` normalization) and exactly
  symmetric, which makes every transform here energy preserving.

With rectangular transmit/receive pulses the ISFFT + Heisenberg cascade of
OTFS modulation collapses to a single inverse DFT across the Doppler axis,
and the receive-side Wigner + SFFT cascade collapses to the forward DFT.
Only these fused forms are implemented; the intermediate time-frequency
grid is never materialized.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _dft_cached(size: int) -> np.ndarray:
    idx = np.arange(size)
    f = np.exp(-2j * np.pi * np.outer(idx, idx) / size) / np.sqrt(size)
    f.flags.writeable = False
    return f


def dft_matrix(size: int) -> np.ndarray:
    """Unitary DFT matrix with entry (a, b) = exp(-j 2 pi a b / size) / sqrt(size).

    The matrix is symmetric (``F.T == F`` bit-for-bit, because the exponent
    table ``a*b`` is) and unitary. The returned array is cached and marked
    read-only; copy before mutating.
    """
    if size < 1:
        raise ValueError(f"DFT size must be >= 1, got {size}")
    return _dft_cached(int(size))


def otfs_modulate(grid: np.ndarray) -> np.ndarray:
    """Map one (M, N) DD grid to its length-M*N time-domain frame.

    Computes ``vec(X @ F_N^H)`` with column-major vectorization. The
    transform is unitary, so ``norm(out) == frobenius_norm(grid)``.
    """
    grid = np.asarray(grid)
    if grid.ndim != 2 or grid.shape[0] < 1 or grid.shape[1] < 1:
        raise ValueError(f"DD grid must be a 2-D array with M, N >= 1, got shape {grid.shape}")
    if not np.all(np.isfinite(grid)):
        raise ValueError("DD grid entries must be finite")
    n = grid.shape[1]
    s = grid @ dft_matrix(n).conj().T
    return s.ravel(order="F")


def otfs_demodulate(frame: np.ndarray, m: int, n: int) -> np.ndarray:
    """Recover the (m, n) DD grid from a time-domain frame.

    Exact inverse of :func:`otfs_modulate`: reshapes column-major and
    applies the forward Doppler-axis DFT.
    """
    frame = np.asarray(frame)
    if m < 1 or n < 1:
        raise ValueError(f"grid dimensions must be >= 1, got m={m}, n={n}")
    if frame.ndim != 1 or frame.size != m * n:
        raise ValueError(f"frame must be 1-D of length m*n={m * n}, got shape {frame.shape}")
    s = frame.reshape((m, n), order="F")
    return s @ dft_matrix(n)


def stack_chains(frames) -> np.ndarray:
    """Concatenate the per-RF-chain time frames of one slot into one vector.

    Element ``c*L + q`` of the output is element ``q`` of frame ``c``.
    """
    arrs = [np.asarray(f) for f in frames]
    if not arrs:
        raise ValueError("need at least one frame to stack")
    length = arrs[0].size
    for a in arrs:
        if a.ndim != 1 or a.size != length:
            raise ValueError("all frames must be 1-D and of equal length")
    return np.concatenate(arrs)


def unstack_chains(signal: np.ndarray, n_chains: int) -> np.ndarray:
    """Split a stacked multi-chain vector back into per-chain rows.

    Inverse of :func:`stack_chains`; returns an ``(n_chains, L)`` array
    whose rows are the per-chain frames.
    """
    signal = np.asarray(signal)
    if n_chains < 1:
        raise ValueError(f"n_chains must be >= 1, got {n_chains}")
    if signal.ndim != 1 or signal.size % n_chains != 0:
        raise ValueError(
            f"signal of length {signal.size} does not split into {n_chains} equal chains"
        )
    return signal.reshape(n_chains, -1)
