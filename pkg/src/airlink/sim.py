"""Monte Carlo BER engine for STBC-, SFBC- and WHT-SFBC-OFDM over 2x2 links.

Each trial draws its own generator from ``(seed, snr, trial_index)``, so a
trial's outcome never depends on batching, ordering or the worker count.
Within a trial the fading parameters are drawn first, which makes every
scheme see the same channel for the same ``(seed, snr, trial_index)``.
"""

from __future__ import annotations

import enum
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import channel as ch
from .coding import sfbc_encode, stbc_decode_grid, stbc_encode, sfbc_decode, whtsfbc_decode, whtsfbc_encode
from .modem import Modulation, demap_hard, map_bits
from .transform import dft, idft

log = logging.getLogger(__name__)

TX_SCALE = 1.0 / np.sqrt(2.0)
_FIRST_CHUNK = 32
_MAX_CHUNK = 2048


class Scheme(enum.Enum):
    STBC = "stbc"
    SFBC = "sfbc"
    WHT_SFBC = "wht-sfbc"

    @property
    def n_slots(self) -> int:
        return 2 if self is Scheme.STBC else 1

    @classmethod
    def parse(cls, value: "str | Scheme") -> "Scheme":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("_", "-")
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown scheme {value!r}; expected stbc, sfbc or wht-sfbc") from None


@dataclass(frozen=True)
class Scenario:
    scheme: Scheme
    modulation: Modulation = Modulation.BPSK
    profile: ch.PowerDelayProfile = field(default_factory=lambda: ch.make_profile("ch1"))
    fd_hz: float = 0.0
    fading_mode: ch.FadingMode = ch.FadingMode.SAMPLE
    snr_grid_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    min_bit_errors: int = 200
    max_bits: int = 20_000_000
    seed: int = 0
    n_subcarriers: int = 64
    cp_len: int = 16
    subcarrier_spacing_hz: float = ch.SUBCARRIER_SPACING_HZ
    n_oscillators: int = ch.N_OSCILLATORS

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        object.__setattr__(self, "modulation", Modulation.parse(self.modulation))
        object.__setattr__(self, "profile", ch.resolve_profile(self.profile))
        object.__setattr__(self, "fading_mode", ch.FadingMode.parse(self.fading_mode))
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))
        if not self.snr_grid_db:
            raise ValueError("SNR grid must not be empty")
        if self.min_bit_errors <= 0 or self.max_bits <= 0:
            raise ValueError("stop bounds must be positive")
        if self.n_subcarriers < 2 or self.n_subcarriers & (self.n_subcarriers - 1):
            raise ValueError("number of subcarriers must be a power of two")
        if self.profile.max_delay > self.cp_len:
            raise ValueError(f"profile delay {self.profile.max_delay} exceeds cyclic prefix {self.cp_len}")
        if self.fd_hz < 0:
            raise ValueError("Doppler spread must be non-negative")
        if self.fading_mode is ch.FadingMode.STATIC and self.fd_hz != 0:
            raise ValueError("static fading requires fd_hz == 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def symbol_len(self) -> int:
        return self.n_subcarriers + self.cp_len

    @property
    def bits_per_trial(self) -> int:
        return self.scheme.n_slots * self.n_subcarriers * self.modulation.bits_per_symbol

    @property
    def sample_period(self) -> float:
        return ch.sample_period(self.n_subcarriers, self.subcarrier_spacing_hz)


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    bits_total: int
    bit_errors: int
    trials: int
    seed: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_total


def snr_to_noise_var(snr_db: float) -> float:
    """Noise variance for a per-receive-antenna SNR with unit received signal power."""
    if not np.isfinite(snr_db):
        raise ValueError(f"SNR must be finite, got {snr_db}")
    return 10.0 ** (-snr_db / 10.0)


def _zigzag(v: int) -> int:
    return 2 * v if v >= 0 else -2 * v - 1


def trial_rng(seed: int, snr_db: float, trial_index: int) -> np.random.Generator:
    """Independent generator for one trial; the SNR enters in milli-dB."""
    key = (_zigzag(int(round(snr_db * 1000))), int(trial_index))
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def modulate(sc: Scenario, bits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Bits ``(..., bits_per_trial)`` to transmit frames.

    Returns:
        ``(spectra, frames)``: per-slot, per-antenna subcarrier symbols
        ``(..., slots, 2, N)`` and CP-prefixed, power-scaled time samples
        ``(..., slots, 2, N + P)``.
    """
    a = map_bits(bits, sc.modulation)
    if sc.scheme is Scheme.STBC:
        n = sc.n_subcarriers
        spectra = np.swapaxes(stbc_encode(a[..., :n], a[..., n:]), -3, -2)
    elif sc.scheme is Scheme.SFBC:
        spectra = sfbc_encode(a)[..., None, :, :]
    else:
        spectra = whtsfbc_encode(a)[..., None, :, :]
    x = TX_SCALE * idft(spectra)
    frames = np.concatenate((x[..., -sc.cp_len:], x), axis=-1) if sc.cp_len else x
    return spectra, frames


def _draw(sc: Scenario, snr_db: float, trial_indices) -> tuple:
    """Per-trial random numbers: one normal and one uniform draw per trial generator.

    Normals hold the fading weights then the unit noise; uniforms hold the
    arrival angles then the data bits.
    """
    n_slots = sc.scheme.n_slots
    n_out = sc.symbol_len + sc.profile.max_delay
    n_fn, n_fu = ch.fading_draw_sizes(sc.profile, sc.n_oscillators)
    n_noise = n_slots * 2 * n_out * 2
    normals = np.empty((len(trial_indices), n_fn + n_noise))
    uniforms = np.empty((len(trial_indices), n_fu + sc.bits_per_trial))
    for i, t in enumerate(trial_indices):
        rng = trial_rng(sc.seed, snr_db, t)
        rng.standard_normal(out=normals[i])
        rng.random(out=uniforms[i])
    params = ch.fading_params_from_draws(sc.profile, normals[:, :n_fn], uniforms[:, :n_fu],
                                         sc.n_oscillators)
    noise = normals[:, n_fn:].reshape(-1, n_slots, 2, n_out, 2)
    bits = (uniforms[:, n_fu:] < 0.5).astype(np.int8)
    return params, bits, noise[..., 0] + 1j * noise[..., 1]


def simulate_trials(sc: Scenario, snr_db: float, trial_indices) -> np.ndarray:
    """Run a batch of trials; returns the bit-error count of each trial."""
    trial_indices = list(trial_indices)
    if not trial_indices:
        return np.zeros(0, dtype=np.int64)
    n, cp, n_t = sc.n_subcarriers, sc.cp_len, sc.symbol_len
    n_slots = sc.scheme.n_slots
    params, bits, unit_noise = _draw(sc, snr_db, trial_indices)

    _, frames = modulate(sc, bits)
    n_traj = n_slots * n_t + sc.profile.max_delay
    fading = ch.realize_fading(params, sc.profile, sc.fd_hz, n_traj, sc.fading_mode,
                               sc.sample_period, n_t)
    rx = np.stack([ch.apply_channel(frames[:, tau], fading.taps, fading.delays, tau * n_t)
                   for tau in range(n_slots)], axis=1)
    rx = rx + np.sqrt(snr_to_noise_var(snr_db) / 2.0) * unit_noise
    r = dft(rx[..., cp:cp + n])                                     # (B, slots, rx, N)

    windows = [(tau * n_t + cp, tau * n_t + cp + n) for tau in range(n_slots)]
    csi = TX_SCALE * ch.extract_csi(fading, windows, n)

    bps = sc.modulation.bits_per_symbol
    if sc.scheme is Scheme.STBC:
        est, failed = stbc_decode_grid(r, csi)                      # (B, 2, N), (B, N)
        bad_symbols = np.repeat(failed[:, None, :], 2, axis=1)
    elif sc.scheme is Scheme.SFBC:
        est, failed = sfbc_decode(r[:, 0], csi)                     # (B, N), (B, N/2)
        bad_symbols = np.repeat(failed, 2, axis=-1)
    else:
        est = whtsfbc_decode(r[:, 0], csi, sc.modulation)
        bad_symbols = np.zeros(est.shape, dtype=bool)
    decided = demap_hard(est.reshape(len(trial_indices), -1), sc.modulation)
    wrong = decided != bits
    wrong |= np.repeat(bad_symbols.reshape(len(trial_indices), -1), bps, axis=-1)
    return wrong.sum(axis=-1)


def run_trial(sc: Scenario, snr_db: float, trial_index: int) -> tuple[int, int]:
    """One transmission unit; returns ``(bits_sent, bit_errors)``."""
    errors = simulate_trials(sc, snr_db, [trial_index])
    return sc.bits_per_trial, int(errors[0])


def _chunks():
    start, size = 0, _FIRST_CHUNK
    while True:
        yield range(start, start + size)
        start += size
        size = min(2 * size, _MAX_CHUNK)


def _simulate_chunk(args):
    sc, snr_db, trials = args
    return simulate_trials(sc, snr_db, trials)


def run_point(sc: Scenario, snr_db: float, pool: ProcessPoolExecutor | None = None,
              workers: int = 1) -> BerPoint:
    """Accumulate trials in index order until the stop rule triggers.

    The stop is evaluated after every single trial, so the result is the
    same however the trials were grouped or distributed.
    """
    bits_per_trial = sc.bits_per_trial
    errors_total = trials = 0
    chunks = _chunks()

    def consume(per_trial: np.ndarray) -> bool:
        nonlocal errors_total, trials
        cum_err = errors_total + np.cumsum(per_trial)
        cum_bits = (trials + 1 + np.arange(per_trial.size)) * bits_per_trial
        hit = np.flatnonzero((cum_err >= sc.min_bit_errors) | (cum_bits >= sc.max_bits))
        take = int(hit[0]) + 1 if hit.size else per_trial.size
        errors_total += int(per_trial[:take].sum())
        trials += take
        return bool(hit.size)

    if pool is None or workers <= 1:
        for trial_range in chunks:
            if consume(simulate_trials(sc, snr_db, trial_range)):
                break
    else:
        done = False
        while not done:
            batch = [(sc, snr_db, next(chunks)) for _ in range(workers)]
            for per_trial in pool.map(_simulate_chunk, batch):
                if consume(per_trial):
                    done = True
                    break
    return BerPoint(snr_db, trials * bits_per_trial, errors_total, trials, sc.seed)


def run_sweep(sc: Scenario, workers: int = 1) -> list[BerPoint]:
    """BER at every grid SNR; identical output for any ``workers``."""
    points = []
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for snr in sc.snr_grid_db:
            point = run_point(sc, snr, pool, workers)
            log.info("%s %s fd=%g snr=%g: %d/%d errors (BER %.3g)", sc.scheme.value,
                     sc.profile.name, sc.fd_hz, snr, point.bit_errors, point.bits_total, point.ber)
            points.append(point)
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    return points


def with_overrides(sc: Scenario, **changes) -> Scenario:
    return replace(sc, **changes)
