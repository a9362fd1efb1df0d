"""Self-checks run by ``airlink validate``.

Each check returns a :class:`Check` holding the measured quantity and the
bound it is held to.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import j0

from . import channel as ch
from .coding import equivalent_channel, sfbc_decode, sfbc_encode, whtsfbc_decode, whtsfbc_encode
from .modem import Modulation
from .sim import Scenario, run_point
from .theory import alamouti_2x2_bpsk_ber, alamouti_2x2_bpsk_ber_numeric
from .transform import dft, idft, naive_dft, wht2

BESSEL_FIRST_ZERO = 2.404825557695773


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    bound: float
    passed: bool
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.note})" if self.note else ""
        return f"[{status}] {self.name}: measured {self.measured:.6g}, bound {self.bound:.6g}{extra}"


def _le(name: str, measured: float, bound: float, note: str = "") -> Check:
    return Check(name, float(measured), float(bound), bool(measured <= bound), note)


def check_unitarity(seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    worst_rt = worst_parseval = worst_naive = 0.0
    for n in (2, 4, 8, 16, 32, 64):
        x = rng.standard_normal((20, n)) + 1j * rng.standard_normal((20, n))
        worst_rt = max(worst_rt, np.max(np.abs(dft(idft(x)) - x)) / np.max(np.abs(x)))
        e_in = np.sum(np.abs(x) ** 2, axis=-1)
        worst_parseval = max(worst_parseval, np.max(np.abs(np.sum(np.abs(dft(x)) ** 2, axis=-1) - e_in) / e_in))
        worst_naive = max(worst_naive, np.max(np.abs(dft(x) - naive_dft(x))),
                          np.max(np.abs(idft(x) - naive_dft(x, inverse=True))))
    return [
        _le("dft round trip (relative)", worst_rt, 1e-12),
        _le("Parseval (relative)", worst_parseval, 1e-12),
        _le("radix-2 vs direct sum", worst_naive, 1e-10),
    ]


def circulant_error(profile: ch.PowerDelayProfile, n_realizations: int = 100, seed: int = 0,
                    n: int = 64, cp: int = 16) -> float:
    """Max |time-domain chain - per-subcarrier product| over static realizations."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_realizations):
        fading = ch.generate_fading(profile, 0.0, n + cp + profile.max_delay, ch.FadingMode.STATIC, rng)
        u = rng.standard_normal((2, n)) + 1j * rng.standard_normal((2, n))
        x = idft(u)
        frame = np.concatenate((x[:, -cp:], x), axis=-1)
        y = ch.apply_channel(frame, fading.taps, fading.delays)
        r = dft(y[:, cp:cp + n])
        h = ch.extract_csi(fading, (cp, cp + n), n)
        expected = np.einsum("svk,sk->vk", h, u)
        worst = max(worst, float(np.max(np.abs(r - expected))))
    return worst


def check_circulant(n_realizations: int = 100) -> list[Check]:
    return [_le(f"circulant diagonalization {name}", circulant_error(ch.make_profile(name), n_realizations), 1e-9)
            for name in ("ch1", "ch2", "ch3")]


def check_wht_structure(n_draws: int = 1000, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    patterns = np.array([[1, 1], [-1, 1], [1, -1], [-1, -1]], dtype=np.complex128)
    d = whtsfbc_encode(patterns)                                  # (4, 2 tx, 2)
    zeros = np.sum(np.abs(d) < 1e-12, axis=-1)
    nulling_ok = bool(np.all(zeros == 1))
    worst = 0.0
    for _ in range(n_draws):
        h = rng.standard_normal((2, 2, 2)) + 1j * rng.standard_normal((2, 2, 2))
        for a in patterns:
            r = np.einsum("svk,sk->vk", h, whtsfbc_encode(a))
            w = wht2(r)
            lam = equivalent_channel(h, a)
            model = np.einsum("svk,sk->vk", lam, sfbc_encode(a))
            worst = max(worst, float(np.max(np.abs(w - model))),
                        float(np.max(np.abs(lam[..., 0] - lam[..., 1]))))
    return [
        Check("WHT nulling: one zero per pair", float(np.max(np.abs(zeros - 1))), 0.0, nulling_ok),
        _le("post-WHT equal-diagonal model", worst, 1e-12),
    ]


def noiseless_static_errors(n_draws: int = 1000, seed: int = 0, profile: str = "ch3",
                            n: int = 64) -> tuple[int, int, int]:
    """Noiseless per-subcarrier decoding on static draws.

    Returns ``(wht_symbol_errors, sfbc_symbol_errors, draws_with_sfbc_errors)``.
    """
    rng = np.random.default_rng(seed)
    pdp = ch.make_profile(profile)
    taps = np.stack([ch.draw_fading_params(pdp, rng).weights.sum(axis=-1) for _ in range(n_draws)])
    h = ch.frequency_response(taps, pdp.delays, n)             # (D, 2, 2, N)
    a = 1.0 - 2.0 * rng.integers(0, 2, (n_draws, n))
    a = a.astype(np.complex128)
    r_wht = np.einsum("dsvk,dsk->dvk", h, whtsfbc_encode(a))
    r_sfbc = np.einsum("dsvk,dsk->dvk", h, sfbc_encode(a))
    wht_err = np.sum(whtsfbc_decode(r_wht, h, Modulation.BPSK) != a)
    sfbc_est, _ = sfbc_decode(r_sfbc, h)
    sfbc_wrong = np.sign(sfbc_est.real) != a.real
    return int(wht_err), int(sfbc_wrong.sum()), int(np.any(sfbc_wrong, axis=-1).sum())


def check_noiseless_claim(n_draws: int = 1000) -> list[Check]:
    wht_err, sfbc_err, sfbc_draws = noiseless_static_errors(n_draws)
    return [
        Check("noiseless WHT-SFBC symbol errors on Ch-3", wht_err, 0, wht_err == 0),
        Check("noiseless SFBC draws with errors on Ch-3", sfbc_draws, 1, sfbc_draws >= 1,
              f"{sfbc_err} symbol errors; must be nonzero"),
    ]


def check_delay_spread() -> list[Check]:
    out = []
    for name, expected in (("ch1", 1.7304), ("ch2", 6.6144), ("ch3", 20.0)):
        value = ch.delay_spread(ch.make_profile(name))
        note = f"published {ch.PUBLISHED_DELAY_SPREAD[name]:g}"
        if name == "ch2":
            note += "; discrepancy in the published value"
        out.append(Check(f"delay spread {name} = {expected:g}", value, 5e-5,
                         abs(value - expected) < 5e-5, note))
    return out


def jakes_deviation(fd_hz: float, n_realizations: int = 400, n_lags: int = 40, seed: int = 0) -> float:
    """Max |empirical normalized autocorrelation - J0(2 pi fd tau)| up to the first J0 zero."""
    ts = ch.sample_period()
    max_lag = int(BESSEL_FIRST_ZERO / (2.0 * np.pi * fd_hz * ts))
    lags = np.unique(np.linspace(0, max_lag, n_lags).astype(int))
    origins = np.arange(0, max_lag, max(1, max_lag // 64))
    length = max_lag + origins[-1] + 1
    rng = np.random.default_rng(seed)
    acc = np.zeros(lags.size, dtype=np.complex128)
    power = 0.0
    for _ in range(n_realizations):
        params = ch.draw_fading_params(ch.make_profile("flat"), rng)
        h = ch.evaluate_taps(params, fd_hz, ts, np.arange(length))[..., 0, :].reshape(4, -1)
        h0 = h[:, origins]
        power += np.mean(np.abs(h0) ** 2)
        acc += np.array([np.mean(h[:, origins + lag] * np.conj(h0)) for lag in lags])
    rho = (acc / power).real
    return float(np.max(np.abs(rho - j0(2.0 * np.pi * fd_hz * lags * ts))))


def check_jakes() -> list[Check]:
    return [_le(f"Jakes autocorrelation fd={fd:g} Hz", jakes_deviation(fd), 0.05) for fd in (42.0, 105.0, 210.0)]


def check_diversity_oracle(quick: bool = True) -> list[Check]:
    out = []
    for snr in (0.0, 5.0, 10.0):
        numeric = alamouti_2x2_bpsk_ber_numeric(snr)
        closed = float(alamouti_2x2_bpsk_ber(snr))
        out.append(_le(f"MRC-4 closed form vs numeric average @ {snr:g} dB", abs(numeric / closed - 1), 0.03))
    snrs = (0.0, 5.0) if quick else (0.0, 5.0, 10.0)
    sc = Scenario("stbc", profile="flat", fading_mode="block", snr_grid_db=snrs,
                  min_bit_errors=20_000, max_bits=40_000_000, seed=1)
    for snr in snrs:
        point = run_point(sc, snr)
        closed = float(alamouti_2x2_bpsk_ber(snr))
        out.append(_le(f"flat STBC simulation vs MRC-4 @ {snr:g} dB", abs(point.ber / closed - 1), 0.10,
                       f"BER {point.ber:.4g} vs {closed:.4g}"))
    return out


SUITES: dict[str, Callable[[], list[Check]]] = {
    "transform": check_unitarity,
    "circulant": check_circulant,
    "wht": check_wht_structure,
    "noiseless": check_noiseless_claim,
    "delay-spread": check_delay_spread,
    "jakes": check_jakes,
    "diversity": check_diversity_oracle,
}


def run_all(emit: Callable[[str], None] = print) -> bool:
    ok = True
    for suite in SUITES.values():
        for check in suite():
            emit(check.line())
            ok &= check.passed
    return ok
