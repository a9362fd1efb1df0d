"""Unitary DFT/IDFT (iterative radix-2) and the 2-point Walsh-Hadamard transform.

All transforms act on the last axis, so a stack of OFDM symbols of shape
``(..., N)`` is transformed in one call.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

#: 2x2 Walsh-Hadamard matrix; unitary and its own inverse.
WHT2 = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


def is_power_of_two(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


@lru_cache(maxsize=None)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


@lru_cache(maxsize=None)
def _twiddles(half: int, sign: int) -> np.ndarray:
    return np.exp(sign * 1j * np.pi * np.arange(half) / half)


def _radix2(x: np.ndarray, sign: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[-1]
    if not is_power_of_two(n):
        raise ValueError(f"transform length must be a power of two >= 2, got {n}")
    lead = x.shape[:-1]
    # transform index first, batch last: every butterfly works on long contiguous rows
    y = np.ascontiguousarray(x.reshape(-1, n).T[_bit_reversal(n)])
    m = y.shape[1]
    out = np.empty_like(y)
    half = 1
    while half < n:
        v = y.reshape(n // (2 * half), 2, half, m)
        w = out.reshape(v.shape)
        odd = v[:, 1] * _twiddles(half, sign)[:, None]
        np.add(v[:, 0], odd, out=w[:, 0])
        np.subtract(v[:, 0], odd, out=w[:, 1])
        y, out = out, y
        half *= 2
    y *= 1.0 / np.sqrt(n)
    return np.ascontiguousarray(y.T).reshape(*lead, n)


def dft(x: np.ndarray) -> np.ndarray:
    """Forward unitary DFT, ``r_k = N^-1/2 sum_n x_n exp(-j 2 pi n k / N)``.

    Raises:
        ValueError: if the last axis is not a power of two.
    """
    return _radix2(x, -1)


def idft(u: np.ndarray) -> np.ndarray:
    """Inverse unitary DFT, ``x_n = N^-1/2 sum_i u_i exp(j 2 pi n i / N)``."""
    return _radix2(u, +1)


def naive_dft(x: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Quadratic-time direct sum; reference for testing :func:`dft`/:func:`idft`."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[-1]
    sign = 1.0 if inverse else -1.0
    k = np.arange(n)
    mat = np.exp(sign * 2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)
    return x @ mat.T


def wht2(pairs: np.ndarray) -> np.ndarray:
    """Apply ``T2`` to consecutive pairs along the last axis.

    A plain 2-vector is transformed as-is; a length-N vector is treated as
    N/2 adjacent pairs ``(x_0, x_1), (x_2, x_3), ...``.
    """
    pairs = np.asarray(pairs)
    n = pairs.shape[-1]
    if n % 2:
        raise ValueError(f"need an even number of entries, got {n}")
    p = pairs.reshape(*pairs.shape[:-1], n // 2, 2)
    out = np.empty(p.shape, dtype=np.result_type(p.dtype, np.float64))
    out[..., 0] = (p[..., 0] + p[..., 1]) / np.sqrt(2.0)
    out[..., 1] = (p[..., 0] - p[..., 1]) / np.sqrt(2.0)
    return out.reshape(pairs.shape)
