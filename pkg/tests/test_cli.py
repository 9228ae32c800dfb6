import csv
import io
import json

import numpy as np
import pytest

from dbsampler import cli
from dbsampler.errors import ConfigError, NumericalError


def _write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def _rows(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config:")
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_spectrum_sine_case(tmp_path):
    cfg = _write(tmp_path, "# closed-form check\nnu = 0.5\ns = pi\ngamma = 0\nN = 4\n")
    out = tmp_path / "spec.csv"
    assert cli.main(["spectrum", "--config", str(cfg), "--out", str(out)]) == 0
    lam = [float(r["lambda"]) for r in _rows(out)]
    assert np.allclose(lam, [1, 4, 9, 16], atol=1e-8)


def test_missing_key_is_invalid_input(tmp_path, capsys):
    cfg = _write(tmp_path, "nu = 0.5\ns = pi\nN = 4\n")
    assert cli.main(["spectrum", "--config", str(cfg), "--out", str(tmp_path / "x.csv")]) == 2
    rec = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert rec["exit_code"] == 2 and "gamma" in rec["message"]
    assert not (tmp_path / "x.csv").exists()


@pytest.mark.parametrize(
    "text",
    ["nu = 0.5\ns = pi\ngamma = 0\nN = 4\nbogus = 1\n", "nu = 0.5\nnu = 0.5\n", "nu = 0.5\ns = pi\ngamma = 0\nN = four\n",
     "nu = 0.5\ns = -1\ngamma = 0\nN = 4\n"],
)
def test_invalid_configs(tmp_path, text):
    cfg = _write(tmp_path, text)
    assert cli.main(["spectrum", "--config", str(cfg)]) == 2


def test_rerun_is_byte_identical(tmp_path):
    cfg = _write(tmp_path, "nu = 0.5\ns = 1\ngamma = 0\na = 0.5\nN = 60\ndelta = 1e-3\nprofile = bump\n"
                           "grid_x_hi = 100\ngrid_m = 5\ngrid_k = 1\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert cli.main(["oversample", "--config", str(cfg), "--out", str(out), "--seed", "11"]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = _rows(a)
    assert {"sup_error", "fitted_C", "noise_gain"} <= set(rows[0])
    assert "seed=11" in a.read_text().splitlines()[0]


def test_figure_written(tmp_path):
    cfg = _write(tmp_path, "mode = exact\na = 1\nN = 50\npacket = indicator\npacket_c = 1\n")
    fig = tmp_path / "pw.png"
    assert cli.main(["pw-baseline", "--config", str(cfg), "--out", str(tmp_path / "pw.csv"), "--figure", str(fig)]) == 0
    assert fig.read_bytes()[:4] == b"\x89PNG"


def test_ibp_and_decay_kinds(tmp_path):
    cfg = _write(tmp_path, "nu = 0.75\ns = 1\ngamma = 0\nq = constant\nq_c = 2\na = 0.5\nt = 4, 6\nz = 2, 1+1i\n")
    out = tmp_path / "ibp.csv"
    assert cli.main(["ibp-check", "--config", str(cfg), "--out", str(out)]) == 0
    assert max(float(r["residual"]) for r in _rows(out)) < 1e-9
    cfg = _write(tmp_path, "nu = 0.5\ns = 1\ngamma = 0\nquantity = norming\nN = 60\n", "d.cfg")
    out = tmp_path / "d.csv"
    assert cli.main(["decay-fit", "--config", str(cfg), "--out", str(out)]) == 0
    assert float(_rows(out)[0]["slope"]) == pytest.approx(-2.0, abs=0.01)


def test_alias_with_gamma_zero_is_rejected(tmp_path):
    cfg = _write(tmp_path, "nu = 0.5\ns = 1\ngamma = 0\na = 0.5\nN = 20\nprofile = indicator\n")
    assert cli.main(["alias", "--config", str(cfg)]) == 2


def test_numerical_failure_exit_code(tmp_path, monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise NumericalError("bracketing failed")

    monkeypatch.setattr(cli, "compute_spectrum", boom)
    cfg = _write(tmp_path, "nu = 0.5\ns = pi\ngamma = 0\nN = 4\n")
    assert cli.main(["spectrum", "--config", str(cfg)]) == 3
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["exit_code"] == 3


def test_number_parser():
    p = cli.Params("spectrum", {"s": "2*pi/4", "N": "3", "gamma": "1e-3"})
    assert p.float("s") == pytest.approx(np.pi / 2)
    assert p.int("N") == 3
    with pytest.raises(ConfigError):
        cli.Params("spectrum", {"s": "__import__('os')"}).float("s")
    with pytest.raises(ConfigError):
        cli.parse_config("novalue\n")
