"""BPSK / Gray-QPSK mapping and hard-decision demapping."""

from __future__ import annotations

import enum

import numpy as np


class Modulation(enum.Enum):
    BPSK = "bpsk"
    QPSK = "qpsk"

    @property
    def bits_per_symbol(self) -> int:
        return 1 if self is Modulation.BPSK else 2

    @property
    def constellation(self) -> np.ndarray:
        """Constellation points indexed by their integer label (first bit is MSB)."""
        labels = np.arange(2**self.bits_per_symbol)
        bits = (labels[:, None] >> np.arange(self.bits_per_symbol)[::-1]) & 1
        return map_bits(bits.ravel(), self)

    @classmethod
    def parse(cls, value: "str | Modulation") -> "Modulation":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown modulation {value!r}; expected bpsk or qpsk") from None


_RAIL = 1.0 / np.sqrt(2.0)


def map_bits(bits: np.ndarray, modulation: Modulation) -> np.ndarray:
    """Map bits (last axis) to unit-energy symbols.

    BPSK sends 0 -> +1 and 1 -> -1. QPSK is Gray coded with one bit per rail:
    the first bit picks the in-phase sign, the second the quadrature sign.

    Raises:
        ValueError: if the bit count is not a multiple of ``bits_per_symbol``.
    """
    bits = np.asarray(bits)
    bps = modulation.bits_per_symbol
    if bits.shape[-1] % bps:
        raise ValueError(f"{bits.shape[-1]} bits cannot be split into {modulation.name} symbols")
    signs = 1.0 - 2.0 * bits.astype(np.float64)
    if modulation is Modulation.BPSK:
        return signs.astype(np.complex128)
    signs = signs.reshape(*bits.shape[:-1], -1, 2)
    return _RAIL * (signs[..., 0] + 1j * signs[..., 1])


def demap_hard(symbols: np.ndarray, modulation: Modulation) -> np.ndarray:
    """Nearest-point hard decisions back to bits.

    Points exactly on a decision boundary resolve to the smaller label,
    i.e. a zero rail decides bit 0.
    """
    symbols = np.asarray(symbols)
    i_bits = (symbols.real < 0).astype(np.int8)
    if modulation is Modulation.BPSK:
        return i_bits
    q_bits = (symbols.imag < 0).astype(np.int8)
    return np.stack((i_bits, q_bits), axis=-1).reshape(*symbols.shape[:-1], -1)
