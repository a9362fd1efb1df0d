"""2x2 tapped-delay-line Rayleigh channel with Jakes Doppler, AWGN and genie CSI.

Tap trajectories are stored as ``(..., 2 tx, 2 rx, L, n_samples)`` complex
arrays; leading axes batch independent realizations.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
SUBCARRIER_SPACING_HZ = 4170.0
CARRIER_HZ = 2.4e9
N_OSCILLATORS = 16


class FadingMode(enum.Enum):
    STATIC = "static"
    BLOCK = "block"
    SAMPLE = "sample"

    @classmethod
    def parse(cls, value: "str | FadingMode") -> "FadingMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown fading mode {value!r}; expected static, block or sample") from None


@dataclass(frozen=True)
class PowerDelayProfile:
    name: str
    delays: tuple[int, ...]
    gains: tuple[float, ...]

    def __post_init__(self):
        delays = tuple(int(d) for d in self.delays)
        gains = tuple(float(g) for g in self.gains)
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "gains", gains)
        if not delays or len(delays) != len(gains):
            raise ValueError("delays and gains must be non-empty and of equal length")
        if delays[0] != 0 or any(b <= a for a, b in zip(delays, delays[1:])):
            raise ValueError(f"delays must start at 0 and increase strictly: {delays}")
        if any(g <= 0 for g in gains):
            raise ValueError(f"tap gains must be positive: {gains}")
        if abs(sum(gains) - 1.0) > 1e-9:
            raise ValueError(f"tap gains must sum to 1, got {sum(gains):.12g}")

    @property
    def max_delay(self) -> int:
        return self.delays[-1]

    @property
    def n_taps(self) -> int:
        return len(self.delays)


PROFILES = {
    "ch1": ((0, 1, 2, 3, 4), (0.35, 0.25, 0.18, 0.13, 0.09)),
    "ch2": ((0, 1, 2, 6, 11), (0.34, 0.28, 0.23, 0.11, 0.04)),
    "ch3": ((0, 4, 8, 12), (0.25, 0.25, 0.25, 0.25)),
    "flat": ((0,), (1.0,)),
}

#: Delay spreads printed for the built-in profiles; Ch-2 disagrees with its own taps.
PUBLISHED_DELAY_SPREAD = {"ch1": 1.74, "ch2": 6.37, "ch3": 20.0}


def make_profile(name: str) -> PowerDelayProfile:
    """Built-in profile by name (``ch1``, ``ch2``, ``ch3``, ``flat``; case and dash insensitive)."""
    key = name.lower().replace("-", "").replace("_", "")
    if key not in PROFILES:
        raise ValueError(f"unknown channel profile {name!r}; expected one of {sorted(PROFILES)}")
    delays, gains = PROFILES[key]
    return PowerDelayProfile(key, delays, gains)


def load_profile(path: str | Path) -> PowerDelayProfile:
    """Read a custom profile from ``key = value`` lines (``delays``, ``gains``, optional ``name``).

    Blank lines and ``#`` comments are ignored.
    """
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        fields[key.lower()] = value
    try:
        delays = [int(v) for v in fields["delays"].split(",")]
        gains = [float(v) for v in fields["gains"].split(",")]
    except KeyError as exc:
        raise ValueError(f"{path}: missing {exc.args[0]!r}") from None
    return PowerDelayProfile(fields.get("name", "custom"), tuple(delays), tuple(gains))


def resolve_profile(spec: "str | Path | PowerDelayProfile") -> PowerDelayProfile:
    if isinstance(spec, PowerDelayProfile):
        return spec
    try:
        return make_profile(str(spec))
    except ValueError:
        if Path(spec).is_file():
            return load_profile(spec)
        raise


def delay_spread(pdp: PowerDelayProfile) -> float:
    """Mean-square delay spread in samples^2 (second central moment of the PDP)."""
    d = np.asarray(pdp.delays, dtype=np.float64)
    p = np.asarray(pdp.gains)
    mean = np.dot(p, d)
    return float(np.dot(p, d * d) - mean * mean)


def sample_period(n_subcarriers: int = 64, spacing_hz: float = SUBCARRIER_SPACING_HZ) -> float:
    return 1.0 / (n_subcarriers * spacing_hz)


def doppler_to_speed_kmh(fd_hz: float, carrier_hz: float = CARRIER_HZ) -> float:
    return fd_hz * SPEED_OF_LIGHT / carrier_hz * 3.6


@dataclass(frozen=True)
class FadingParams:
    """Random parameters of a sum-of-sinusoids realization.

    ``weights`` are complex oscillator weights already scaled by the tap
    power; ``aoa`` the arrival angles in radians. Both have shape
    ``(..., 2, 2, L, M)``.
    """

    weights: np.ndarray
    aoa: np.ndarray


def fading_draw_sizes(pdp: PowerDelayProfile, n_oscillators: int = N_OSCILLATORS) -> tuple[int, int]:
    """Standard normals and uniforms consumed by one realization."""
    n = 4 * pdp.n_taps * n_oscillators
    return 2 * n, n


def fading_params_from_draws(pdp: PowerDelayProfile, normals: np.ndarray, uniforms: np.ndarray,
                             n_oscillators: int = N_OSCILLATORS) -> FadingParams:
    """Build parameters from raw draws; leading axes of the draws batch realizations.

    Consecutive normals form the real and imaginary parts of one weight.
    """
    shape = (2, 2, pdp.n_taps, n_oscillators)
    g = np.ascontiguousarray(normals).view(np.complex128)
    amp = np.sqrt(np.asarray(pdp.gains)[:, None] / (2.0 * n_oscillators))
    weights = amp * g.reshape(normals.shape[:-1] + shape)
    aoa = 2.0 * np.pi * uniforms.reshape(uniforms.shape[:-1] + shape)
    return FadingParams(weights, aoa)


def draw_fading_params(pdp: PowerDelayProfile, rng: np.random.Generator,
                       n_oscillators: int = N_OSCILLATORS) -> FadingParams:
    n_norm, n_unif = fading_draw_sizes(pdp, n_oscillators)
    return fading_params_from_draws(pdp, rng.standard_normal(n_norm), rng.random(n_unif), n_oscillators)


_MAX_TERMS = 18
_TRUNCATION = 1e-16


@lru_cache(maxsize=64)
def _taylor_basis(block: int, half: float, terms: int) -> np.ndarray:
    tau = (np.arange(block) - (block - 1) / 2.0) / half
    k = np.arange(terms)
    fact = np.cumprod(np.concatenate(([1.0], np.arange(1.0, terms))))
    return (1j * tau[None, :]) ** k[:, None] / fact[:, None]          # (K, block)


def _taylor_terms(x: float) -> int:
    """Smallest K with x^K / K! below the truncation target (x <= 1)."""
    bound, k = 1.0, 0
    while bound > _TRUNCATION and k < _MAX_TERMS:
        k += 1
        bound *= x / k
    return max(k, 1)


def evaluate_taps(params: FadingParams, fd_hz: float, ts: float, times: np.ndarray) -> np.ndarray:
    """Evaluate ``h(n) = sum_m w_m exp(j 2 pi fd cos(aoa_m) n Ts)`` at integer sample indices.

    The time axis is cut into blocks short enough that every oscillator
    turns by at most one radian from the block centre; inside a block the
    exponentials are replaced by a Taylor series truncated below 1e-16,
    which turns the evaluation into one matrix product shared by all
    oscillators and realizations.
    """
    times = np.asarray(times, dtype=np.int64)
    w = params.weights
    if fd_hz == 0.0 or times.size == 0:
        h0 = w.sum(axis=-1)
        return np.broadcast_to(h0[..., None], h0.shape + (times.size,))
    span = int(times.max()) + 1
    omega_max = 2.0 * np.pi * fd_hz * ts
    block = max(1, min(span, int(2.0 / omega_max)))
    n_blocks = -(-span // block)
    half = max((block - 1) / 2.0, 0.5)
    terms = _taylor_terms(omega_max * half)
    omega = omega_max * np.cos(params.aoa)                                 # (..., M)
    centres = np.arange(n_blocks) * block + (block - 1) / 2.0
    term = w[..., None, :] * np.exp(1j * omega[..., None, :] * centres[:, None])  # (..., B, M)
    step = (omega * half)[..., None, :]
    lead = term.shape[:-2]
    moments = np.empty(lead + (n_blocks, terms), dtype=np.complex128)
    for k in range(terms):
        moments[..., k] = term.sum(axis=-1)
        term *= step
    full = moments.reshape(-1, terms) @ _taylor_basis(block, half, terms)
    full = full.reshape(*lead, n_blocks * block)
    if times.size == span and np.array_equal(times, np.arange(span)):
        return full[..., :span]
    return full[..., times]


@dataclass(frozen=True)
class FadingProcess:
    taps: np.ndarray          # (..., 2 tx, 2 rx, L, n_samples)
    delays: tuple[int, ...]
    fd_hz: float
    mode: FadingMode

    @property
    def n_samples(self) -> int:
        return self.taps.shape[-1]


def fading_times(n_samples: int, mode: FadingMode, symbol_len: int) -> np.ndarray:
    """Sample index at which the taps are evaluated for each output sample."""
    n = np.arange(n_samples)
    if mode is FadingMode.STATIC:
        return np.zeros(n_samples, dtype=np.int64)
    if mode is FadingMode.BLOCK:
        return (n // symbol_len) * symbol_len
    return n


def realize_fading(params: FadingParams, pdp: PowerDelayProfile, fd_hz: float, n_samples: int,
                   mode: FadingMode, ts: float, symbol_len: int = 80) -> FadingProcess:
    mode = FadingMode.parse(mode)
    if mode is FadingMode.STATIC:
        fd_hz = 0.0
    times = fading_times(n_samples, mode, symbol_len)
    if mode is FadingMode.SAMPLE or fd_hz == 0.0:
        # time-invariant taps stay a zero-stride view
        taps = evaluate_taps(params, fd_hz, ts, times)
    else:
        uniq, inverse = np.unique(times, return_inverse=True)
        taps = evaluate_taps(params, fd_hz, ts, uniq)[..., inverse]
    return FadingProcess(taps, pdp.delays, float(fd_hz), mode)


def generate_fading(pdp: PowerDelayProfile, fd_hz: float, n_samples: int,
                    mode: "FadingMode | str" = FadingMode.SAMPLE,
                    seed: "int | np.random.Generator | None" = None, *,
                    ts: float | None = None, symbol_len: int = 80,
                    n_oscillators: int = N_OSCILLATORS) -> FadingProcess:
    """Draw one 2x2 fading realization.

    Every tap of every link is an independent sum of ``n_oscillators``
    Doppler-shifted oscillators with random arrival angles and complex
    Gaussian weights, giving a complex Gaussian tap with variance equal to
    the profile gain and autocorrelation ``gain * J0(2 pi fd tau)``.

    ``BLOCK`` mode freezes the taps at the start of every ``symbol_len``
    samples; ``STATIC`` freezes them for the whole trajectory.
    """
    mode = FadingMode.parse(mode)
    if fd_hz < 0:
        raise ValueError("Doppler spread must be non-negative")
    if mode is FadingMode.STATIC and fd_hz != 0:
        raise ValueError("static fading requires fd_hz == 0")
    rng = np.random.default_rng(seed)
    params = draw_fading_params(pdp, rng, n_oscillators)
    return realize_fading(params, pdp, fd_hz, n_samples, mode,
                          ts if ts is not None else sample_period(), symbol_len)


def apply_channel(tx: np.ndarray, taps: np.ndarray, delays: tuple[int, ...], offset: int = 0) -> np.ndarray:
    """Time-varying tapped-delay-line convolution of both transmit antennas.

    ``y^v_n = sum_s sum_l h_l^{s,v}(offset + n) x^s_{n - delay_l}`` for
    ``n < len(x) + max_delay``; samples before the frame are zero.

    Args:
        tx: ``(..., 2 tx, n_t)`` time-domain frames.
        taps: ``(..., 2 tx, 2 rx, L, n_samples)`` trajectories, or a
            :class:`FadingProcess`'s ``taps``.
        delays: integer tap delays.
        offset: trajectory index of the frame's first sample.

    Returns:
        ``(..., 2 rx, n_t + max_delay)`` received samples.

    Raises:
        ValueError: if the trajectory does not cover the frame.
    """
    n_t = tx.shape[-1]
    n_out = n_t + delays[-1]
    if offset < 0 or offset + n_out > taps.shape[-1]:
        raise ValueError(f"trajectory of {taps.shape[-1]} samples does not cover "
                         f"[{offset}, {offset + n_out})")
    lead = np.broadcast_shapes(tx.shape[:-2], taps.shape[:-4])
    if taps.strides[-1] == 0:
        return _apply_static(tx, taps[..., 0], delays, lead)
    y = np.zeros(lead + (2, n_out), dtype=np.complex128)
    for l, d in enumerate(delays):
        h = taps[..., l, offset + d:offset + d + n_t]                # (..., s, v, n_t)
        y[..., d:d + n_t] += h[..., 0, :, :] * tx[..., 0, None, :] + h[..., 1, :, :] * tx[..., 1, None, :]
    return y


def _apply_static(tx: np.ndarray, h: np.ndarray, delays: tuple[int, ...], lead: tuple) -> np.ndarray:
    """Time-invariant convolution as one batched product with delayed copies of ``tx``."""
    n_t, n_taps = tx.shape[-1], len(delays)
    shifted = np.zeros(lead + (2, n_taps, n_t + delays[-1]), dtype=np.complex128)
    for l, d in enumerate(delays):
        shifted[..., l, d:d + n_t] = tx
    h = np.broadcast_to(h, lead + h.shape[-3:])                     # (..., s, v, L)
    gains = np.swapaxes(h, -3, -2).reshape(lead + (2, 2 * n_taps))  # (..., v, s*L)
    return gains @ shifted.reshape(lead + (2 * n_taps, -1))


def add_awgn(samples: np.ndarray, noise_var: float,
             seed: "int | np.random.Generator | None" = None) -> np.ndarray:
    """Add circular complex Gaussian noise of total variance ``noise_var``."""
    if noise_var < 0:
        raise ValueError("noise variance must be non-negative")
    samples = np.asarray(samples, dtype=np.complex128)
    if noise_var == 0:
        return samples.copy()
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(samples.shape + (2,))
    return samples + np.sqrt(noise_var / 2.0) * (z[..., 0] + 1j * z[..., 1])


def frequency_response(taps: np.ndarray, delays: tuple[int, ...], n_subcarriers: int) -> np.ndarray:
    """``H_k = sum_m h_m exp(-j 2 pi d_m k / N)`` for tap vectors on the last axis."""
    k = np.arange(n_subcarriers)
    steer = np.exp(-2j * np.pi * np.outer(delays, k) / n_subcarriers)   # (L, N)
    return taps @ steer


def extract_csi(fading: "FadingProcess | np.ndarray", windows, n_subcarriers: int = 64,
                delays: tuple[int, ...] | None = None) -> np.ndarray:
    """Genie CSI from tap trajectories averaged over one or more sample windows.

    Args:
        fading: a :class:`FadingProcess` (or raw taps plus ``delays``).
        windows: ``(start, stop)`` or a list of them; typically the useful
            (post-CP) part of each OFDM symbol the CSI should describe.

    Returns:
        ``(..., 2 tx, 2 rx, N)`` frequency responses.
    """
    if isinstance(fading, FadingProcess):
        taps, delays = fading.taps, fading.delays
    else:
        taps = fading
        if delays is None:
            raise ValueError("delays are required with raw tap arrays")
    if isinstance(windows[0], (int, np.integer)):
        windows = [windows]
    if any(a < 0 or b > taps.shape[-1] or b <= a for a, b in windows):
        raise ValueError("CSI window lies outside the trajectory")
    if taps.strides[-1] == 0:
        mean_taps = taps[..., windows[0][0]]
    else:
        total = sum(taps[..., a:b].sum(axis=-1) for a, b in windows)
        mean_taps = total / sum(b - a for a, b in windows)
    return frequency_response(mean_taps, delays, n_subcarriers)
