import csv
import io

import numpy as np
import pytest

from airlink import cli
from airlink.cli import CSV_HEADER, main, parse_snr
from airlink.plot import render_svg

FAST = ["--max-bits", "2000"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


@pytest.mark.parametrize("values, expected", [
    (["0:5:30"], (0, 5, 10, 15, 20, 25, 30)),
    (["10", "10"], (10,)),
    (["20", "0:10:10"], (0, 10, 20)),
    (["0:2.5:5"], (0, 2.5, 5)),
    (["-3"], (-3,)),
])
def test_parse_snr(values, expected):
    assert parse_snr(values) == tuple(float(v) for v in expected)


@pytest.mark.parametrize("bad", [["x"], ["0:0:10"], ["10:1:0"], ["1:2"], ["nan"]])
def test_parse_snr_rejects(bad):
    with pytest.raises(cli.UsageError):
        parse_snr(bad)


def test_sweep_seven_rows(capsys):
    code, out, _ = run(capsys, "sweep", "--scheme", "wht-sfbc", "--channel", "ch3", "--fd", "0",
                       "--snr", "0:5:30", "--seed", "7", *FAST)
    table = rows(out)
    assert code == 0
    assert tuple(table[0]) == CSV_HEADER
    assert len(table) == 8
    assert {r[0] for r in table[1:]} == {"wht-sfbc"}
    assert [r[4] for r in table[1:]] == ["0", "5", "10", "15", "20", "25", "30"]
    for r in table[1:]:
        assert float(r[7]) == pytest.approx(int(r[6]) / int(r[5]), rel=1e-5)
        assert r[8] == "7"


def test_sweep_dedup_and_rerun_identical(capsys):
    args = ("sweep", "--scheme", "sfbc", "--scheme", "stbc", "--snr", "10", "--snr", "10", "--seed", "3", *FAST)
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
    assert len(rows(first)) == 3


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("AIRLINK_SEED", "42")
    _, out, _ = run(capsys, "sweep", "--snr", "5", *FAST)
    assert rows(out)[1][8] == "42"
    monkeypatch.setenv("AIRLINK_SEED", "abc")
    code, _, err = run(capsys, "sweep", "--snr", "5", *FAST)
    assert code != 0 and "AIRLINK_SEED" in err


def test_config_file_under_flags(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep settings\nscheme = sfbc, stbc\nsnr = 5\nmax_bits = 1e3\nseed = 3\nchannel = ch2\n")
    _, out, _ = run(capsys, "sweep", "--config", str(cfg), "--seed", "4")
    table = rows(out)
    assert [r[0] for r in table[1:]] == ["sfbc", "stbc"]
    assert {r[2] for r in table[1:]} == {"ch2"}
    assert {r[8] for r in table[1:]} == {"4"}


@pytest.mark.parametrize("text, value", [("2000", 2000), ("2e7", 20_000_000), ("1.5e3", 1500)])
def test_count_parser(text, value):
    assert cli.count(text) == value


@pytest.mark.parametrize("text", ["1.5", "x", "2e-1"])
def test_count_parser_rejects(text):
    import argparse
    with pytest.raises(argparse.ArgumentTypeError):
        cli.count(text)


def test_config_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    code, _, err = run(capsys, "sweep", "--config", str(cfg))
    assert code != 0 and "colour" in err


def test_custom_profile_file(capsys, tmp_path):
    prof = tmp_path / "two.txt"
    prof.write_text("name = tworay\ndelays = 0, 2\ngains = 0.6, 0.4\n")
    _, out, _ = run(capsys, "sweep", "--channel", str(prof), "--snr", "5", *FAST)
    assert rows(out)[1][2] == "tworay"


def test_output_file_and_plot(capsys, tmp_path):
    out_csv, out_svg = tmp_path / "r.csv", tmp_path / "r.svg"
    code, out, _ = run(capsys, "sweep", "--snr", "0:5:10", "-o", str(out_csv), "--plot", str(out_svg), *FAST)
    assert code == 0 and out == ""
    assert out_csv.read_text().startswith(",".join(CSV_HEADER))
    svg = out_svg.read_text()
    assert svg.startswith("<svg") and "polyline" in svg and "http" in svg.splitlines()[0]


@pytest.mark.parametrize("argv", [
    ["sweep", "--scheme", "ofdm"],
    ["sweep", "--channel", "ch7"],
    ["sweep", "--snr", "a:b"],
    ["sweep", "--workers", "0"],
    ["sweep", "--mode", "static", "--fd", "42"],
    ["preset", "fig7"],
    ["delay-spread", "nowhere"],
])
def test_errors_exit_nonzero(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code != 0 and out == "" and err.startswith("airlink: error")


def test_unwritable_output(capsys, tmp_path):
    code, _, err = run(capsys, "sweep", "-o", str(tmp_path / "missing" / "x.csv"))
    assert code != 0 and "cannot write" in err


def test_delay_spread_command(capsys):
    assert run(capsys, "delay-spread", "ch1")[1].strip() == "ch1: 1.7304 samples"
    assert run(capsys, "delay-spread", "Ch-3")[1].strip() == "ch3: 20.0000 samples"


def test_preset_fig1(capsys):
    code, out, _ = run(capsys, "preset", "fig1", "--seed", "1")
    table = rows(out)
    assert code == 0 and tuple(table[0]) == cli.FIG1_HEADER and len(table) == 129
    vals = np.array(table[1:], dtype=float)
    wht_mag = vals[:, 4].reshape(2, 32, 2)
    np.testing.assert_array_equal(wht_mag[..., 0], wht_mag[..., 1])
    conv_mag = vals[:, 2].reshape(2, 32, 2)
    assert np.any(conv_mag[..., 0] != conv_mag[..., 1])


@pytest.mark.parametrize("name, schemes, channels, fds, mod", [
    ("fig2", {"sfbc", "wht-sfbc"}, {"ch1", "ch2", "ch3"}, {"0"}, "bpsk"),
    ("fig3", {"stbc", "sfbc", "wht-sfbc"}, {"ch1"}, {"0", "42", "105", "210"}, "bpsk"),
    ("fig4", {"stbc", "sfbc", "wht-sfbc"}, {"ch3"}, {"0", "42"}, "bpsk"),
    ("fig5", {"stbc", "sfbc", "wht-sfbc"}, {"ch3"}, {"105", "210"}, "bpsk"),
    ("fig6", {"sfbc", "wht-sfbc"}, {"ch1", "ch2", "ch3"}, {"0"}, "qpsk"),
])
def test_preset_combinations(capsys, name, schemes, channels, fds, mod):
    code, out, _ = run(capsys, "preset", name, "--snr", "10", "--max-bits", "500")
    table = rows(out)[1:]
    assert code == 0
    assert {r[0] for r in table} == schemes
    assert {r[2] for r in table} == channels
    assert {r[3] for r in table} == fds
    assert {r[1] for r in table} == {mod}
    assert len(table) == len(schemes) * len(channels) * len(fds)


def test_preset_workers_invariant(capsys):
    base = ("preset", "fig5", "--snr", "0:10:20", "--min-errors", "50", "--max-bits", "20000", "--seed", "7")
    _, one, _ = run(capsys, *base)
    _, two, _ = run(capsys, *base, "--workers", "2")
    assert one == two


def test_module_entry_point():
    import subprocess
    import sys
    res = subprocess.run([sys.executable, "-m", "airlink", "delay-spread", "ch3"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.strip() == "ch3: 20.0000 samples"


def test_fmt_is_six_significant_digits():
    assert cli.fmt(1 / 3) == "0.333333"
    assert cli.fmt(1.2345678e-7) == "1.23457e-07"
    assert cli.fmt(25.0) == "25"


def test_svg_handles_zero_and_linear():
    svg = render_svg({"a": [(0, 0.1), (5, 0.0)], "b": []})
    assert svg.count("<circle") == 1
    assert "<svg" in render_svg({"m": [(0, 1.0), (1, 2.0)]}, log_y=False)
