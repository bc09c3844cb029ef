import json

import numpy as np
import pytest

from resistive_sift.cli import OUT_ENV, main, parse_quantity
from resistive_sift.pgm import write_pgm

from .conftest import DATA


def read_csv(path):
    lines = path.read_text().splitlines()
    return lines[0].split(","), [[float(x) if x else None for x in ln.split(",")] for ln in lines[1:]]


@pytest.mark.parametrize("text,unit,value", [("250Ω", "ohm", 250.0), ("250ohm", "ohm", 250.0),
                                             ("9k", "ohm", 9e3), ("0.1pF", "farad", 1e-13),
                                             ("1fF", "farad", 1e-15), ("2ns", "second", 2e-9),
                                             ("255mV", "volt", 0.255), ("1V", "volt", 1.0),
                                             ("1e-12", "farad", 1e-12)])
def test_parse_quantity(text, unit, value):
    assert parse_quantity(text, unit) == pytest.approx(value)


@pytest.mark.parametrize("text,unit", [("abc", "farad"), ("1pV", "farad"), ("1m", "ohm")])
def test_parse_quantity_errors(text, unit):
    with pytest.raises(ValueError):
        parse_quantity(text, unit)


def test_impulse_1d(tmp_path, capsys):
    assert main(["impulse", "--dim", "1", "--nodes", "45", "--lambda", "36", "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "impulse.csv")
    assert header == ["node", "response", "fitted", "error_percent", "in_support"]
    assert len(rows) == 45
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert 0.8 <= summary["mean_error_percent"] <= 3.0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "impulse" and manifest["config"]["lam"] == 36.0
    assert str(tmp_path / "impulse.csv") in manifest["outputs"]


def test_impulse_lambda_zero(tmp_path):
    assert main(["impulse", "--lambda", "0", "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "impulse.csv")
    assert [r[1] for r in rows].count(1.0) == 1
    assert all(r[3] == 0 for r in rows)


def test_impulse_2d(tmp_path):
    assert main(["impulse", "--dim", "2", "--rows", "33", "--cols", "33", "--lambda", "36",
                 "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "rings.csv")
    assert len(rows) == 16 and rows[0][0] == 1


def test_outputs_are_deterministic(tmp_path):
    for d in ("a", "b"):
        main(["impulse", "--dim", "2", "--rows", "15", "--cols", "15", "--out", str(tmp_path / d)])
    for name in ("rings.csv", "response.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_env_var_sets_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path))
    assert main(["impulse", "--nodes", "21", "--lambda", "4"]) == 0
    assert (tmp_path / "impulse" / "manifest.json").exists()


def test_bad_arguments_exit_nonzero(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["impulse", "--dim", "3"])
    assert info.value.code != 0
    with pytest.raises(SystemExit) as info:
        main(["transient", "--c=-1pF", "--out", str(tmp_path)])
    assert info.value.code != 0
    with pytest.raises(SystemExit) as info:
        main(["transient", "--c", "0pF", "--out", str(tmp_path)])
    assert info.value.code != 0
    assert main(["impulse", "--nodes", "3", "--out", str(tmp_path)]) == 1


def test_transient_table(tmp_path, capsys):
    assert main(["transient", "--c", "0.1pF,1pF,10pF,100pF", "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "settle.csv")
    assert header == ["capacitance_F", "settle_time_s", "reference_settle_time_s"]
    assert len(rows) == 4
    assert rows[1][2] == pytest.approx(4.77e-9)
    assert "4.770 ns" in capsys.readouterr().out


def test_transient_ratio_and_femtofarad(tmp_path):
    main(["transient", "--c", "1pF,2pF", "--out", str(tmp_path / "a")])
    _, rows = read_csv(tmp_path / "a" / "settle.csv")
    assert rows[1][1] / rows[0][1] == pytest.approx(2.0, rel=1e-3)
    main(["transient", "--c", "1fF", "--out", str(tmp_path / "b")])
    _, rows = read_csv(tmp_path / "b" / "settle.csv")
    assert rows[0][1] < 1e-9


def test_filter_constant_image(tmp_path):
    src = tmp_path / "const.pgm"
    write_pgm(src, np.full((32, 32), 128))
    assert main(["filter", str(src), "--lambda", "36", "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "filtered.pgm").read_bytes() == src.read_bytes()
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert list(manifest["inputs"]) == [str(src)]


def test_pyramid_writes_18_images(tmp_path):
    assert main(["pyramid", str(DATA / "camera256.pgm"), "--out", str(tmp_path)]) == 0
    assert len(list(tmp_path.glob("octave*_scale*.pgm"))) == 18


@pytest.mark.parametrize("backend", ["ideal", "network"])
def test_sift_keypoint_files(tmp_path, backend, capsys):
    assert main(["sift", str(DATA / "camera64.pgm"), "--backend", backend, "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "keypoints.csv")
    assert header[:4] == ["octave", "scale", "x", "y"]
    d = (tmp_path / "descriptors.csv").read_text().splitlines()
    assert len(d) == 129 and len(d[1].split(",")) == len(rows)
    out = capsys.readouterr().out
    assert "gaussian_pyramid" in out and "descriptor" in out


def test_sift_unreadable_image(tmp_path, capsys):
    assert main(["sift", str(tmp_path / "missing.pgm"), "--out", str(tmp_path)]) == 1
    small = tmp_path / "small.pgm"
    write_pgm(small, np.zeros((16, 16)))
    assert main(["sift", str(small), "--out", str(tmp_path)]) == 1
    assert "8x8" in capsys.readouterr().err


def test_power_zero_image_and_reference_line(tmp_path, capsys):
    src = tmp_path / "zero.pgm"
    write_pgm(src, np.zeros((256, 256)))
    assert main(["power", str(src), "--out", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out
    assert "paper: 669.6 pJ" in out and out.count("86016 pixels") == 6
    assert json.loads((tmp_path / "o" / "summary.json").read_text())["energy_J"] == 0.0


def test_power_settle_time_doubles_energy(tmp_path):
    img = str(DATA / "camera64.pgm")
    main(["power", img, "--settle", "1ns", "--out", str(tmp_path / "a")])
    main(["power", img, "--settle", "2ns", "--out", str(tmp_path / "b")])
    a = json.loads((tmp_path / "a" / "summary.json").read_text())["energy_J"]
    b = json.loads((tmp_path / "b" / "summary.json").read_text())["energy_J"]
    assert b == pytest.approx(2 * a, rel=1e-8)
