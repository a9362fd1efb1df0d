"""Closed-form and numerical BER references used to check the simulator."""

from __future__ import annotations

import numpy as np
from scipy.special import comb, erfc


def q_function(x):
    return 0.5 * erfc(np.asarray(x) / np.sqrt(2.0))


def mrc_bpsk_ber(branch_snr, n_branches: int) -> np.ndarray:
    """BPSK BER with ``n_branches``-fold MRC over i.i.d. Rayleigh branches.

    ``branch_snr`` is the average SNR per branch (linear). Uses
    ``((1-mu)/2)^L sum_k C(L-1+k, k) ((1+mu)/2)^k`` with
    ``mu = sqrt(g / (1 + g))``.
    """
    g = np.asarray(branch_snr, dtype=np.float64)
    mu = np.sqrt(g / (1.0 + g))
    total = sum(comb(n_branches - 1 + k, k) * ((1.0 + mu) / 2.0) ** k for k in range(n_branches))
    return ((1.0 - mu) / 2.0) ** n_branches * total


def alamouti_2x2_bpsk_ber(snr_db) -> np.ndarray:
    """Alamouti 2x2 BPSK with total transmit power split over two antennas.

    Four diversity branches, each at half the per-receive-antenna SNR.
    """
    snr = 10.0 ** (np.asarray(snr_db, dtype=np.float64) / 10.0)
    return mrc_bpsk_ber(snr / 2.0, 4)


def alamouti_2x2_bpsk_ber_numeric(snr_db: float, n_draws: int = 2_000_000, seed: int = 0) -> float:
    """Average of ``Q(sqrt(||H||_F^2 * SNR / 2 * 2))`` over random 2x2 Rayleigh matrices."""
    rng = np.random.default_rng(seed)
    h = (rng.standard_normal((n_draws, 4)) + 1j * rng.standard_normal((n_draws, 4))) / np.sqrt(2.0)
    gamma = np.sum(np.abs(h) ** 2, axis=1) * 10.0 ** (snr_db / 10.0) / 2.0
    return float(np.mean(q_function(np.sqrt(2.0 * gamma))))
