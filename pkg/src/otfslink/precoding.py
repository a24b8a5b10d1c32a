"""SVD sub-channel decomposition and precoder/combiner construction.

An SVD of the time-domain channel turns the MIMO-OTFS link into parallel
scalar sub-channels whose gains are the singular values. Two precoder /
combiner modes are provided:

* ``paper_literal``: use the leading SVD factors directly (G = V1, W = U1),
  the textbook eigenmode scheme. The resulting DD-domain effective channel
  is ``C_R Sigma1 C_T``, which is diagonal only when ``Sigma1`` commutes
  with the block Doppler DFT -- generally it does not.
* ``dd_corrected`` (default): fold the DD transforms into the factors,
  G = V1 C_T^H and W = U1 C_R, so the DD-domain effective channel equals
  ``diag(sigma)`` exactly and the per-sub-channel scalar model holds.

Here ``C_T = I_{n_rf} kron (F_N^H kron I_M)`` and
``C_R = I_{n_rf} kron (F_N kron I_M)`` are the stacked transmit/receive
DD transforms; both modes yield semi-unitary matrices, so noise statistics
are preserved through combining.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dd_transforms import dft_matrix

PRECODER_MODES = ("dd_corrected", "paper_literal")

# Singular values below RANK_TOLERANCE * sigma_max count as zero.
RANK_TOLERANCE = 1e-10


class RankDeficientChannelError(ValueError):
    """The channel rank cannot support the requested number of streams."""


@dataclass(frozen=True)
class SubChannelDecomposition:
    """Rank-truncated SVD factors of a channel matrix.

    ``u`` and ``v`` are semi-unitary with ``rank`` columns; ``sigma`` holds
    the corresponding singular values in descending order.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    rank: int


@dataclass(frozen=True)
class PrecoderCombiner:
    """Semi-unitary precoder ``g`` and combiner ``w`` for one channel."""

    g: np.ndarray
    w: np.ndarray
    mode: str


def decompose(h: np.ndarray) -> SubChannelDecomposition:
    """SVD of the channel, truncated to its numerical rank.

    Exact singular-value ties are index-stabilized (value descending,
    original index ascending) so repeated runs order them identically.
    """
    h = np.asarray(h)
    if not np.all(np.isfinite(h)):
        raise ValueError("channel matrix must be finite")
    u, s, vh = np.linalg.svd(h, full_matrices=False)
    order = np.argsort(-s, kind="stable")
    u, s, vh = u[:, order], s[order], vh[order]
    sigma_max = s[0] if s.size else 0.0
    rank = int(np.count_nonzero(s > RANK_TOLERANCE * sigma_max))
    return SubChannelDecomposition(
        u=u[:, :rank], sigma=s[:rank], v=vh[:rank].conj().T, rank=rank
    )


def dd_transform_matrices(n_rf: int, m: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Dense stacked DD transforms (C_T, C_R) for n_rf chains of an (m, n) grid."""
    if n_rf < 1 or m < 1 or n < 1:
        raise ValueError(f"n_rf, m, n must all be >= 1, got {(n_rf, m, n)}")
    f = dft_matrix(n)
    eye_rf = np.eye(n_rf)
    eye_m = np.eye(m)
    c_t = np.kron(eye_rf, np.kron(f.conj().T, eye_m))
    c_r = np.kron(eye_rf, np.kron(f, eye_m))
    return c_t, c_r


def build_precoder_combiner(
    dec: SubChannelDecomposition, n_rf: int, m: int, n: int, mode: str = "dd_corrected"
) -> PrecoderCombiner:
    """Build the precoder/combiner pair for ``n_rf * m * n`` streams.

    Raises :class:`RankDeficientChannelError` when the channel rank is
    below the requested stream count.
    """
    if mode not in PRECODER_MODES:
        raise ValueError(f"mode must be one of {PRECODER_MODES}, got {mode!r}")
    k = n_rf * m * n
    if dec.rank < k:
        raise RankDeficientChannelError(
            f"channel rank {dec.rank} cannot carry {k} = n_rf*m*n streams"
        )
    v1 = dec.v[:, :k]
    u1 = dec.u[:, :k]
    if mode == "paper_literal":
        return PrecoderCombiner(g=v1, w=u1, mode=mode)
    c_t, c_r = dd_transform_matrices(n_rf, m, n)
    return PrecoderCombiner(g=v1 @ c_t.conj().T, w=u1 @ c_r, mode=mode)


def effective_dd_channel(
    h: np.ndarray, pc: PrecoderCombiner, n_rf: int, m: int, n: int
) -> np.ndarray:
    """End-to-end DD-domain channel ``C_R W^H H G C_T``.

    In ``dd_corrected`` mode this is ``diag(sigma[:k])`` up to rounding; in
    ``paper_literal`` mode it is returned as-is and is generally not
    diagonal.
    """
    h = np.asarray(h)
    k = n_rf * m * n
    if pc.g.shape[0] != h.shape[1] or pc.w.shape[0] != h.shape[0]:
        raise ValueError(
            f"precoder/combiner shapes {pc.g.shape}, {pc.w.shape} do not match channel {h.shape}"
        )
    if pc.g.shape[1] != k or pc.w.shape[1] != k:
        raise ValueError(f"precoder/combiner carry {pc.g.shape[1]} streams, expected {k}")
    c_t, c_r = dd_transform_matrices(n_rf, m, n)
    return c_r @ pc.w.conj().T @ h @ pc.g @ c_t


def sub_channel_gains(dec: SubChannelDecomposition, n_rf: int, m: int, n: int) -> np.ndarray:
    """Leading ``n_rf * m * n`` singular values, descending: the sub-channel gains."""
    k = n_rf * m * n
    if dec.rank < k:
        raise RankDeficientChannelError(
            f"channel rank {dec.rank} cannot carry {k} = n_rf*m*n streams"
        )
    return dec.sigma[:k].copy()


def per_subchannel_receive(x_s: complex, lambda_s: float, noise: complex) -> complex:
    """Scalar sub-channel model: received = gain * sent + noise."""
    if lambda_s < 0:
        raise ValueError(f"sub-channel gain must be >= 0, got {lambda_s}")
    return lambda_s * x_s + noise
