"""Alamouti STBC / SFBC and WHT-precoded SFBC for two transmit, two receive antennas.

Array conventions used throughout:

* symbol blocks are ``(..., N)``;
* per-antenna streams are ``(..., 2, N)`` indexed by transmit antenna;
* the STBC grid is ``(..., 2, 2, N)`` indexed ``[antenna, slot]``;
* CSI is ``(..., 2, 2, N)`` indexed ``[tx, rx, subcarrier]``;
* received spectra are ``(..., 2, N)`` indexed by receive antenna.
"""

from __future__ import annotations

import itertools

import numpy as np

from .modem import Modulation
from .transform import WHT2, wht2

#: Decode is refused when cond(H^H H) exceeds this.
MAX_CONDITION = 1e12


class DecodeError(ArithmeticError):
    """The Alamouti stack is (numerically) singular."""


def _check_even(a: np.ndarray) -> None:
    if a.shape[-1] % 2:
        raise ValueError(f"block length must be even, got {a.shape[-1]}")


def stbc_encode(a1: np.ndarray, a2: np.ndarray) -> np.ndarray:
    """Space-time Alamouti grid for two consecutive blocks.

    Returns ``u[..., s, tau, :]``: slot 1 carries ``(a1, a2)``, slot 2
    carries ``(-conj(a2), conj(a1))``.
    """
    a1 = np.asarray(a1, dtype=np.complex128)
    a2 = np.asarray(a2, dtype=np.complex128)
    if a1.shape != a2.shape:
        raise ValueError(f"block shapes differ: {a1.shape} vs {a2.shape}")
    u = np.empty(a1.shape[:-1] + (2, 2) + a1.shape[-1:], dtype=np.complex128)
    u[..., 0, 0, :] = a1
    u[..., 1, 0, :] = a2
    u[..., 0, 1, :] = -np.conj(a2)
    u[..., 1, 1, :] = np.conj(a1)
    return u


def sfbc_encode(a: np.ndarray) -> np.ndarray:
    """Alamouti across adjacent subcarrier pairs; returns ``b[..., s, :]``."""
    a = np.asarray(a, dtype=np.complex128)
    _check_even(a)
    b = np.empty(a.shape[:-1] + (2,) + a.shape[-1:], dtype=np.complex128)
    b[..., 0, 0::2] = a[..., 0::2]
    b[..., 0, 1::2] = -np.conj(a[..., 1::2])
    b[..., 1, 0::2] = a[..., 1::2]
    b[..., 1, 1::2] = np.conj(a[..., 0::2])
    return b


def whtsfbc_encode(a: np.ndarray) -> np.ndarray:
    """SFBC followed by a 2-point WHT on every subcarrier pair of each antenna."""
    return wht2(sfbc_encode(a))


def alamouti_stack(h: np.ndarray, r_first: np.ndarray, r_second: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Build the 4x2 Alamouti observation model.

    Args:
        h: channel gains ``(..., 2 tx, 2 rx)`` assumed valid for both halves.
        r_first: observations ``(..., 2 rx)`` of the first slot/subcarrier.
        r_second: observations ``(..., 2 rx)`` of the second slot/subcarrier.

    Returns:
        ``(H, r)`` with ``H`` of shape ``(..., 4, 2)`` and ``r`` of shape
        ``(..., 4)``. Rows 3-4 hold the conjugated second observations.
    """
    h = np.asarray(h)
    stack = np.empty(h.shape[:-2] + (4, 2), dtype=np.complex128)
    stack[..., 0:2, 0] = h[..., 0, :]
    stack[..., 0:2, 1] = h[..., 1, :]
    stack[..., 2:4, 0] = np.conj(h[..., 1, :])
    stack[..., 2:4, 1] = -np.conj(h[..., 0, :])
    r = np.concatenate((r_first, np.conj(r_second)), axis=-1)
    return stack, r


def zero_forcing(stack: np.ndarray, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(H^H H)^-1 H^H r`` over a batch of 4x2 stacks.

    Returns the estimates ``(..., 2)`` and a boolean mask of stacks whose
    Gram matrix is too ill-conditioned to invert; their estimates are zero.
    """
    col0, col1 = stack[..., 0], stack[..., 1]
    p = np.sum(col0.real ** 2 + col0.imag ** 2, axis=-1)
    q = np.sum(col1.real ** 2 + col1.imag ** 2, axis=-1)
    c = np.sum(np.conj(col0) * col1, axis=-1)
    rhs = np.stack((np.sum(np.conj(col0) * r, axis=-1), np.sum(np.conj(col1) * r, axis=-1)), axis=-1)
    mid = 0.5 * (p + q)
    rad = np.sqrt(0.25 * (p - q) ** 2 + np.abs(c) ** 2)
    lam_max = mid + rad
    lam_min = mid - rad
    failed = ~(lam_min * MAX_CONDITION > lam_max) | ~(lam_max > 0)
    det = p * q - np.abs(c) ** 2
    det = np.where(failed, 1.0, det)
    est = np.empty(rhs.shape, dtype=np.complex128)
    est[..., 0] = (q * rhs[..., 0] - c * rhs[..., 1]) / det
    est[..., 1] = (p * rhs[..., 1] - np.conj(c) * rhs[..., 0]) / det
    est[failed] = 0.0
    return est, failed


def stbc_decode(stack: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Standard Alamouti zero-forcing decode of one or more stacks.

    Raises:
        DecodeError: if any stack is numerically singular.
    """
    est, failed = zero_forcing(stack, r)
    if np.any(failed):
        raise DecodeError(f"{int(np.count_nonzero(failed))} singular Alamouti stack(s)")
    return est


def stbc_decode_grid(r: np.ndarray, csi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Decode a received STBC slot pair.

    Args:
        r: received spectra ``(..., 2 slot, 2 rx, N)``.
        csi: channel ``(..., 2 tx, 2 rx, N)`` used for both slots.

    Returns:
        Symbol estimates ``(..., 2 block, N)`` and the per-subcarrier failure mask.
    """
    h = np.moveaxis(csi, -1, -3)
    stack, obs = alamouti_stack(h, np.moveaxis(r[..., 0, :, :], -1, -2), np.moveaxis(r[..., 1, :, :], -1, -2))
    est, failed = zero_forcing(stack, obs)
    return np.moveaxis(est, -1, -2), failed


def sfbc_decode(r: np.ndarray, csi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Standard SFBC decode of every subcarrier pair of one OFDM symbol.

    The channel of the even subcarrier ``k`` is used for both members of
    the pair, so any difference ``H_k != H_{k+1}`` leaves residual
    interference in the estimates.

    Args:
        r: received spectra ``(..., 2 rx, N)``.
        csi: ``(..., 2 tx, 2 rx, N)``.

    Returns:
        Symbol estimates ``(..., N)`` and failure mask ``(..., N/2)``.
    """
    _check_even(r)
    h = np.moveaxis(csi[..., 0::2], -1, -3)
    r_even = np.moveaxis(r[..., 0::2], -1, -2)
    r_odd = np.moveaxis(r[..., 1::2], -1, -2)
    stack, obs = alamouti_stack(h, r_even, r_odd)
    est, failed = zero_forcing(stack, obs)
    return est.reshape(*est.shape[:-2], -1), failed


def candidate_pairs(modulation: Modulation) -> np.ndarray:
    """All ``(a_k, a_{k+1})`` hypotheses, ordered by ``label_k * M + label_{k+1}``."""
    points = modulation.constellation
    return np.array(list(itertools.product(points, repeat=2)), dtype=np.complex128)


def whtsfbc_decode(r: np.ndarray, csi: np.ndarray, modulation: Modulation) -> np.ndarray:
    """Pair-wise maximum-likelihood decode of a WHT-precoded SFBC symbol.

    Each receive antenna's subcarrier pair is passed through ``T2``; every
    candidate symbol pair is then re-encoded, sent through the exact
    per-subcarrier channel and ``T2``, and the candidate with the smallest
    squared distance summed over both receive antennas wins. Ties go to the
    lowest candidate index.

    Args:
        r: received spectra ``(..., 2 rx, N)``.
        csi: ``(..., 2 tx, 2 rx, N)``, including any transmit scaling.

    Returns:
        Detected constellation points ``(..., N)``.
    """
    _check_even(r)
    cands = candidate_pairs(modulation)                       # (C, 2)
    d = whtsfbc_encode(cands)                                 # (C, 2 tx, 2)
    n_pairs = r.shape[-1] // 2
    lead = r.shape[:-2]
    w = wht2(r).reshape(*lead, 2, n_pairs, 2)                 # (..., rx, P, i)
    h = csi.reshape(*csi.shape[:-1], n_pairs, 2)              # (..., tx, rx, P, j)
    # T2 diag(h_s) per pair, columns ordered (tx, j): rows (..., rx, P, i, 4)
    cols = np.moveaxis(h, -4, -2).reshape(*h.shape[:-4], 2, n_pairs, 4)
    g = cols[..., None, :] * WHT2[:, [0, 1, 0, 1]]
    # regenerated post-WHT observation for every candidate: (..., rx, P, i, C)
    w_hat = (g.reshape(-1, 4) @ d.reshape(len(cands), 4).T).reshape(*g.shape[:-1], len(cands))
    sq = np.abs(w[..., None] - w_hat) ** 2
    dist = (sq[..., 0, :] + sq[..., 1, :]).sum(axis=-3)      # (..., P, C)
    best = np.argmin(dist, axis=-1)
    return cands[best].reshape(*lead, -1)


def equivalent_channel(csi: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Per-pair equivalent channel seen after the receive-side WHT for BPSK data.

    For a pair with ``a_k == a_{k+1}`` antenna 1 sees ``H_{k+1}`` and
    antenna 2 sees ``H_k`` on both subcarriers; for ``a_k == -a_{k+1}``
    the roles swap. In both cases ``T2 r_k = L1 c1 + L2 c2`` with the
    diagonal matrices ``L`` having identical entries.

    Args:
        csi: ``(..., 2 tx, 2 rx, N)``.
        a: real BPSK symbols ``(..., N)``.

    Returns:
        ``(..., 2 tx, 2 rx, N)`` with equal values on both members of each pair.
    """
    a = np.asarray(a)
    if np.any(np.abs(np.abs(a) - 1.0) > 1e-12) or np.any(np.abs(np.imag(a)) > 1e-12):
        raise ValueError("equivalent channel is defined for BPSK symbols only")
    _check_even(a)
    same = (np.real(a[..., 0::2]) == np.real(a[..., 1::2]))[..., None, :]
    h_even, h_odd = csi[..., 0::2], csi[..., 1::2]
    lam = np.empty(np.broadcast_shapes(csi.shape, a.shape[:-1] + (1, 1, a.shape[-1])), dtype=np.complex128)
    lam[..., 0, :, 0::2] = np.where(same, h_odd[..., 0, :, :], h_even[..., 0, :, :])
    lam[..., 1, :, 0::2] = np.where(same, h_even[..., 1, :, :], h_odd[..., 1, :, :])
    lam[..., 1::2] = lam[..., 0::2]
    return lam
