"""Command-line front end: sweeps, figure presets, validation and channel facts.

Output is CSV with the header::

    scheme,modulation,channel,fd_hz,snr_db,bits,errors,ber,seed

Floats are written with six significant digits so files are byte-stable
across platforms.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import channel as ch
from .coding import equivalent_channel
from .modem import Modulation, map_bits
from .plot import render_svg
from .sim import Scenario, Scheme, run_sweep

CSV_HEADER = ("scheme", "modulation", "channel", "fd_hz", "snr_db", "bits", "errors", "ber", "seed")
FIG1_HEADER = ("subcarrier", "tx", "conventional_mag", "conventional_phase", "wht_mag", "wht_phase")
DEFAULT_SNR = "0:5:30"
SEED_ENV = "AIRLINK_SEED"

log = logging.getLogger("airlink")


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class Preset:
    schemes: tuple[str, ...]
    channels: tuple[str, ...]
    fds: tuple[float, ...]
    modulation: str = "bpsk"
    title: str = ""


PRESETS = {
    "fig2": Preset(("sfbc", "wht-sfbc"), ("ch1", "ch2", "ch3"), (0.0,),
                   title="Static channels, BPSK"),
    "fig3": Preset(("stbc", "sfbc", "wht-sfbc"), ("ch1",), (0.0, 42.0, 105.0, 210.0),
                   title="Ch-1, Doppler sweep"),
    "fig4": Preset(("stbc", "sfbc", "wht-sfbc"), ("ch3",), (0.0, 42.0),
                   title="Ch-3, low Doppler"),
    "fig5": Preset(("stbc", "sfbc", "wht-sfbc"), ("ch3",), (105.0, 210.0),
                   title="Ch-3, high Doppler"),
    "fig6": Preset(("sfbc", "wht-sfbc"), ("ch1", "ch2", "ch3"), (0.0,), modulation="qpsk",
                   title="Static channels, QPSK"),
}
PRESET_NAMES = ("fig1",) + tuple(PRESETS)


def fmt(value: float) -> str:
    """Six significant digits, locale independent."""
    return format(float(value), ".6g")


def count(text: str) -> int:
    """Integer that may be written in scientific notation, e.g. ``2e7``."""
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not value.is_integer():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(value)


def parse_snr(values) -> tuple[float, ...]:
    """Expand ``--snr`` values into a sorted, de-duplicated grid.

    Each value is either a number or ``start:step:stop`` (inclusive stop).

    Raises:
        UsageError: on malformed input.
    """
    grid = set()
    for item in values:
        for token in str(item).replace(",", " ").split():
            parts = token.split(":")
            try:
                nums = [float(p) for p in parts]
            except ValueError:
                raise UsageError(f"bad SNR value {token!r}") from None
            if not all(np.isfinite(nums)):
                raise UsageError(f"bad SNR value {token!r}")
            if len(nums) == 1:
                grid.add(nums[0])
            elif len(nums) == 3:
                start, step, stop = nums
                if step <= 0 or stop < start:
                    raise UsageError(f"bad SNR range {token!r}: need step > 0 and stop >= start")
                count = int(np.floor((stop - start) / step + 1e-9)) + 1
                grid.update(round(start + i * step, 9) for i in range(count))
            else:
                raise UsageError(f"bad SNR value {token!r}: use a number or start:step:stop")
    if not grid:
        raise UsageError("empty SNR grid")
    return tuple(sorted(grid))


def read_config(path: str) -> dict[str, list[str]]:
    """Parse a ``key = value`` file; keys use flag names without dashes.

    Repeated keys accumulate, and comma-separated values split.
    """
    out: dict[str, list[str]] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        out.setdefault(key, []).extend(v.strip() for v in value.split(",") if v.strip())
    return out


def _add_run_flags(p: argparse.ArgumentParser, with_scenario: bool) -> None:
    if with_scenario:
        p.add_argument("--scheme", action="append", help="stbc, sfbc or wht-sfbc (repeatable)")
        p.add_argument("--modulation", help="bpsk or qpsk (default bpsk)")
        p.add_argument("--channel", help="ch1, ch2, ch3, flat or a profile file (default ch1)")
        p.add_argument("--fd", type=float, help="maximum Doppler frequency in Hz (default 0)")
    p.add_argument("--mode", help="fading mode: static, block or sample (default sample)")
    p.add_argument("--snr", action="append", help=f"SNR in dB or start:step:stop (default {DEFAULT_SNR})")
    p.add_argument("--min-errors", type=count, help="stop a point after this many bit errors (default 200)")
    p.add_argument("--max-bits", type=count, help="stop a point after this many bits (default 2e7)")
    p.add_argument("--seed", type=int, help=f"master seed (default ${SEED_ENV} or 0)")
    p.add_argument("--workers", type=int, help="worker processes (default 1)")
    p.add_argument("-o", "--output", help="CSV path (default stdout)")
    p.add_argument("--plot", help="also write an SVG plot to this path")
    p.add_argument("--config", help="key = value file merged under the flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="airlink",
                                     description="BER simulation of STBC, SFBC and WHT-SFBC 2x2 MIMO-OFDM.")
    parser.add_argument("-v", "--verbose", action="store_true", help="progress logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_flags(sub.add_parser("sweep", help="custom BER sweep"), with_scenario=True)
    p = sub.add_parser("preset", help="reproduce a figure")
    p.add_argument("name", help=", ".join(PRESET_NAMES))
    _add_run_flags(p, with_scenario=False)
    sub.add_parser("validate", help="run the self-check suite")
    p = sub.add_parser("delay-spread", help="RMS delay spread of a profile in samples")
    p.add_argument("channel")
    return parser


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    if not getattr(args, "config", None):
        return args
    scalar = {"modulation": str, "channel": str, "fd": float, "mode": str, "min_errors": count,
              "max_bits": count, "seed": int, "workers": int, "output": str, "plot": str}
    for key, values in read_config(args.config).items():
        if not hasattr(args, key) or key in ("config", "name", "command"):
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, key) is not None:
            continue                                              # flags win
        if key in ("scheme", "snr"):
            setattr(args, key, values)
        else:
            try:
                setattr(args, key, scalar[key](values[-1]))
            except (ValueError, argparse.ArgumentTypeError):
                raise UsageError(f"bad value for config key {key!r}: {values[-1]!r}") from None
    return args


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None or not env.strip():
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _scenario_kwargs(args) -> dict:
    kw = {"snr_grid_db": parse_snr(args.snr or [DEFAULT_SNR]), "seed": _seed(args)}
    if args.mode is not None:
        kw["fading_mode"] = args.mode
    if args.min_errors is not None:
        kw["min_bit_errors"] = args.min_errors
    if args.max_bits is not None:
        kw["max_bits"] = args.max_bits
    return kw


def _workers(args) -> int:
    w = args.workers if args.workers is not None else 1
    if w < 1:
        raise UsageError("--workers must be at least 1")
    return w


def run_jobs(jobs, workers: int) -> list[tuple]:
    """Run ``(label, Scenario)`` jobs and return CSV rows."""
    rows = []
    for label, sc in jobs:
        for pt in run_sweep(sc, workers=workers):
            rows.append((sc.scheme.value, sc.modulation.value, label, fmt(sc.fd_hz), fmt(pt.snr_db),
                         str(pt.bits_total), str(pt.bit_errors), fmt(pt.ber), str(pt.seed)))
    return rows


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def ber_series(rows) -> dict[str, list[tuple[float, float]]]:
    series: dict[str, list[tuple[float, float]]] = {}
    for scheme, mod, chan, fd, snr, _bits, _err, ber, _seed in rows:
        series.setdefault(f"{scheme} {mod} {chan} fd={fd}", []).append((float(snr), float(ber)))
    return series


def fig1_rows(seed: int) -> list[tuple]:
    """Per-subcarrier response of one static Ch-1 draw, conventional vs WHT.

    The WHT column is the equivalent channel seen by receive antenna 1 for a
    random BPSK block; within each subcarrier pair the two values coincide.
    """
    rng = np.random.default_rng(seed)
    pdp = ch.make_profile("ch1")
    fading = ch.generate_fading(pdp, 0.0, 1, ch.FadingMode.STATIC, rng)
    h = ch.frequency_response(fading.taps[..., 0], fading.delays, 64)  # (2 tx, 2 rx, N)
    a = map_bits(rng.integers(0, 2, 64), Modulation.BPSK)
    lam = equivalent_channel(h, a)
    rows = []
    for tx in range(2):
        for k in range(64):
            conv, eq = h[tx, 0, k], lam[tx, 0, k]
            rows.append((str(k), str(tx + 1), fmt(abs(conv)), fmt(np.angle(conv)),
                         fmt(abs(eq)), fmt(np.angle(eq))))
    return rows


def _check_writable(*paths) -> None:
    """Fail before simulating rather than after."""
    for path in paths:
        if path is None or path == "-":
            continue
        parent = Path(path).resolve().parent
        if not parent.is_dir() or not os.access(parent, os.W_OK) or Path(path).is_dir():
            raise UsageError(f"cannot write {path}")


def cmd_sweep(args) -> int:
    _check_writable(args.output, args.plot)
    schemes = args.scheme or ["wht-sfbc"]
    kw = _scenario_kwargs(args)
    profile = ch.resolve_profile(args.channel or "ch1")
    mod = args.modulation or "bpsk"
    fd = args.fd if args.fd is not None else 0.0
    seen, jobs = set(), []
    for s in schemes:
        scheme = Scheme.parse(s)
        if scheme in seen:
            continue
        seen.add(scheme)
        jobs.append((profile.name, Scenario(scheme, modulation=mod, profile=profile, fd_hz=fd, **kw)))
    rows = run_jobs(jobs, _workers(args))
    _write(args.output, to_csv(CSV_HEADER, rows))
    if args.plot:
        _write(args.plot, render_svg(ber_series(rows), title=f"{profile.name}, fd = {fmt(fd)} Hz"))
    return 0


def cmd_preset(args) -> int:
    if args.name not in PRESET_NAMES:
        raise UsageError(f"unknown preset {args.name!r}; choose from {', '.join(PRESET_NAMES)}")
    _check_writable(args.output, args.plot)
    if args.name == "fig1":
        rows = fig1_rows(_seed(args))
        _write(args.output, to_csv(FIG1_HEADER, rows))
        if args.plot:
            series = {}
            for k, tx, cm, _cp, wm, _wp in rows:
                series.setdefault(f"conventional tx{tx}", []).append((float(k), float(cm)))
                series.setdefault(f"WHT tx{tx}", []).append((float(k), float(wm)))
            _write(args.plot, render_svg(series, title="Ch-1, fd = 0 Hz", xlabel="subcarrier",
                                         ylabel="|H|", log_y=False))
        return 0
    preset = PRESETS[args.name]
    kw = _scenario_kwargs(args)
    jobs = []
    for chan, fd, scheme in itertools.product(preset.channels, preset.fds, preset.schemes):
        mode = kw.get("fading_mode", "static" if fd == 0 else "sample")
        sc_kw = {**kw, "fading_mode": mode}
        jobs.append((chan, Scenario(scheme, modulation=preset.modulation, profile=chan, fd_hz=fd, **sc_kw)))
    rows = run_jobs(jobs, _workers(args))
    _write(args.output, to_csv(CSV_HEADER, rows))
    if args.plot:
        _write(args.plot, render_svg(ber_series(rows), title=preset.title))
    return 0


def cmd_validate(args) -> int:
    from .validate import run_all
    ok = run_all(lambda line: print(line, flush=True))
    print("all checks passed" if ok else "some checks FAILED")
    return 0 if ok else 1


def cmd_delay_spread(args) -> int:
    pdp = ch.resolve_profile(args.channel)
    print(f"{pdp.name}: {ch.delay_spread(pdp):.4f} samples")
    return 0


COMMANDS = {"sweep": cmd_sweep, "preset": cmd_preset, "validate": cmd_validate,
            "delay-spread": cmd_delay_spread}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        args = _merge_config(args)
        return COMMANDS[args.command](args)
    except (UsageError, ValueError) as exc:
        print(f"airlink: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
