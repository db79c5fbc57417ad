import subprocess
import sys

import pytest

from twinbeam import cli
from twinbeam.configs import path as config_path

REDUCED = config_path("reduced_waist.ini").read_text()


def _write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_help_runs_as_module():
    out = subprocess.run([sys.executable, "-m", "twinbeam", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "dimensionality" in out.stdout


def test_missing_config_file_is_config_error(tmp_path):
    assert cli.main(["schmidt", "--config", str(tmp_path / "nope.ini"), "--out", str(tmp_path)]) == 2


def test_invalid_config_is_config_error(tmp_path):
    cfg = _write(tmp_path, REDUCED.replace("length_L = 8e-3", "length_L = 0"))
    assert cli.main(["schmidt", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert cli.main(["schmidt", "--config", str(config_path("reduced_waist.ini")),
                     "--out", str(tmp_path / "o"), "--grid-scale", "-1"]) == 2


def test_unusable_output_is_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = cli.main(["schmidt", "--config", str(config_path("reduced_waist.ini")),
                     "--out", str(blocker / "sub")])
    assert code == 4


def test_numeric_error_removes_partial_outputs(tmp_path, capsys):
    cfg = _write(tmp_path, REDUCED.replace("power_max = 5e-2", "power_max = 1e4"))
    out = tmp_path / "o"
    assert cli.main(["all", "--config", str(cfg), "--out", str(out)]) == 3
    assert "[spectrum]" in capsys.readouterr().err
    assert list(out.iterdir()) == []


def test_schmidt_outputs_and_manifest(tmp_path):
    from twinbeam import io

    out = tmp_path / "o"
    assert cli.main(["schmidt", "--config", str(config_path("reduced_waist.ini")), "--out", str(out),
                     "--threads", "1"]) == 0
    meta, cols = io.read_csv(out / "spectral_eigenvalues.csv")
    assert "config_hash" in meta and "units" in meta
    assert cols["lambda_par"][0] == pytest.approx(cols["lambda_par"].max())
    assert (out / "manifest.json").exists()
    _, dens = io.read_csv(out / "eigenvalue_density.csv")
    assert dens["count"].sum() == int(meta.get("total_mode_count", dens["count"].sum()))
